#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tabrec/error.hpp"

namespace tabrec {

enum class Tag { Table, Thead, Tbody, Tr, Td };

const char* tag_name(Tag tag);

// Tag-labeled table tree: table -> [thead, tbody] -> tr* -> td*. Cell content
// is an opaque string that may embed inline markup (<b>, <i>, <sup>, <sub>).
struct TableTree {
    Tag tag = Tag::Table;
    int colspan = 1;
    int rowspan = 1;
    std::string content;  // td only
    std::vector<TableTree> children;

    bool operator==(const TableTree&) const = default;

    // A table always carries both sections, possibly row-less.
    static TableTree table() {
        TableTree thead;
        thead.tag = Tag::Thead;
        TableTree tbody;
        tbody.tag = Tag::Tbody;
        TableTree t;
        t.tag = Tag::Table;
        t.children.push_back(std::move(thead));
        t.children.push_back(std::move(tbody));
        return t;
    }
    static TableTree row() {
        TableTree t;
        t.tag = Tag::Tr;
        return t;
    }
    static TableTree cell(std::string content = "", int colspan = 1, int rowspan = 1) {
        TableTree t;
        t.tag = Tag::Td;
        t.colspan = colspan;
        t.rowspan = rowspan;
        t.content = std::move(content);
        return t;
    }

    TableTree& thead() { return children.at(0); }
    TableTree& tbody() { return children.at(1); }
    const TableTree& thead() const { return children.at(0); }
    const TableTree& tbody() const { return children.at(1); }
};

// Canonical serialization: lowercase tags, double-quoted colspan/rowspan
// (emitted only when > 1, colspan first), no whitespace between structural
// tags, cell content verbatim.
std::string to_html(const TableTree& tree);

// Parses a single <table> fragment back into a tree; inverse of to_html on
// valid trees. Missing sections are synthesized empty so the tree invariant
// (children == [thead, tbody]) always holds. Throws Error{ParseError} with a
// byte offset on malformed input.
TableTree parse_table_html(std::string_view html);

int node_count(const TableTree& tree);

template <typename Tree, typename Fn>
void for_each_td(Tree& tree, Fn&& fn) {
    if (tree.tag == Tag::Td) {
        fn(tree);
        return;
    }
    for (auto& child : tree.children) for_each_td(child, fn);
}

} // namespace tabrec
