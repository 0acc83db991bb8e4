#pragma once

// Random ordered trees with arbitrary tag placement, for exercising the edit
// distance away from well-formed tables. Content lengths are kept in {0,1,2,4}
// so relabel costs are dyadic and sums compare exactly across algorithms.

#include <functional>
#include <vector>

#include "tabrec/synth.hpp"
#include "tabrec/table_tree.hpp"

namespace tabrec::testing {

inline TableTree random_tree_node(SynthRng& rng) {
    static const Tag tags[] = {Tag::Table, Tag::Thead, Tag::Tbody, Tag::Tr, Tag::Td};
    static const char* contents[] = {"", "a", "ab", "xy", "abcd", "bbcd"};
    TableTree node;
    node.tag = tags[rng.uniform_int(0, 4)];
    if (node.tag == Tag::Td) {
        node.content = contents[rng.uniform_int(0, 5)];
        node.colspan = rng.uniform_int(1, 2);
        node.rowspan = rng.uniform_int(1, 2);
    }
    return node;
}

inline TableTree random_ordered_tree(SynthRng& rng, int max_nodes) {
    int n = rng.uniform_int(1, max_nodes);
    std::vector<TableTree> payload;
    payload.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) payload.push_back(random_tree_node(rng));
    std::vector<std::vector<int>> kids(static_cast<std::size_t>(n));
    for (int i = 1; i < n; ++i) {
        kids[static_cast<std::size_t>(rng.uniform_int(0, i - 1))].push_back(i);
    }
    std::function<TableTree(int)> build = [&](int idx) {
        TableTree node = payload[static_cast<std::size_t>(idx)];
        for (int child : kids[static_cast<std::size_t>(idx)]) node.children.push_back(build(child));
        return node;
    };
    return build(0);
}

} // namespace tabrec::testing
