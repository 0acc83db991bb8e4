#include "tabrec/teds.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tabrec/dataset_io.hpp"
#include "tabrec/utf8.hpp"

namespace tabrec {

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
    if (a.size() > b.size()) std::swap(a, b);
    std::vector<std::size_t> row(a.size() + 1);
    for (std::size_t i = 0; i <= a.size(); ++i) row[i] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
        std::size_t prev_diag = row[0];
        row[0] = j;
        for (std::size_t i = 1; i <= a.size(); ++i) {
            std::size_t del = row[i] + 1;
            std::size_t ins = row[i - 1] + 1;
            std::size_t sub = prev_diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            prev_diag = row[i];
            row[i] = std::min({del, ins, sub});
        }
    }
    return row[a.size()];
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
    if (a == b) return 0.0;
    std::u32string ua = utf8::decode(a);
    std::u32string ub = utf8::decode(b);
    std::size_t longest = std::max(ua.size(), ub.size());
    if (longest == 0) return 0.0;
    return static_cast<double>(edit_distance(ua, ub)) / static_cast<double>(longest);
}

double CostModel::relabel(const TableTree& a, const TableTree& b) const {
    if (a.tag != b.tag) return 1.0;
    if (a.tag != Tag::Td) return 0.0;
    if (a.colspan != b.colspan || a.rowspan != b.rowspan) return 1.0;
    if (struct_only) return 0.0;
    return normalized_edit_distance(a.content, b.content);
}

namespace {

// Postorder flattening with leftmost-leaf-descendants and keyroots, the
// classical machinery for the keyroots dynamic program.
struct FlatTree {
    std::vector<const TableTree*> nodes;  // postorder
    std::vector<int> lmld;
    std::vector<int> keyroots;
};

int flatten(const TableTree& node, FlatTree& out) {
    int first_leaf = -1;
    for (const auto& child : node.children) {
        int child_lmld = flatten(child, out);
        if (first_leaf < 0) first_leaf = child_lmld;
    }
    int index = static_cast<int>(out.nodes.size());
    out.nodes.push_back(&node);
    out.lmld.push_back(node.children.empty() ? index : first_leaf);
    return out.lmld.back();
}

FlatTree flat_tree(const TableTree& root) {
    FlatTree out;
    flatten(root, out);
    int n = static_cast<int>(out.nodes.size());
    // keyroots: nodes with no later node sharing their leftmost leaf
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int i = n - 1; i >= 0; --i) {
        if (!seen[static_cast<std::size_t>(out.lmld[static_cast<std::size_t>(i)])]) {
            seen[static_cast<std::size_t>(out.lmld[static_cast<std::size_t>(i)])] = true;
            out.keyroots.push_back(i);
        }
    }
    std::sort(out.keyroots.begin(), out.keyroots.end());
    return out;
}

} // namespace

double tree_edit_distance(const TableTree& a, const TableTree& b, const CostModel& costs) {
    FlatTree ta = flat_tree(a);
    FlatTree tb = flat_tree(b);
    int na = static_cast<int>(ta.nodes.size());
    int nb = static_cast<int>(tb.nodes.size());

    std::vector<double> tree_dist(static_cast<std::size_t>(na) * static_cast<std::size_t>(nb), 0.0);
    auto td = [&](int i, int j) -> double& {
        return tree_dist[static_cast<std::size_t>(i) * static_cast<std::size_t>(nb) +
                         static_cast<std::size_t>(j)];
    };

    std::vector<double> fd;  // forest-distance scratch, reused across keyroot pairs
    for (int i : ta.keyroots) {
        int li = ta.lmld[static_cast<std::size_t>(i)];
        int m = i - li + 2;
        for (int j : tb.keyroots) {
            int lj = tb.lmld[static_cast<std::size_t>(j)];
            int n = j - lj + 2;
            fd.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), 0.0);
            auto f = [&](int x, int y) -> double& {
                return fd[static_cast<std::size_t>(x) * static_cast<std::size_t>(n) +
                          static_cast<std::size_t>(y)];
            };
            for (int x = 1; x < m; ++x) f(x, 0) = f(x - 1, 0) + 1.0;
            for (int y = 1; y < n; ++y) f(0, y) = f(0, y - 1) + 1.0;
            for (int x = 1; x < m; ++x) {
                int node_a = x + li - 1;
                for (int y = 1; y < n; ++y) {
                    int node_b = y + lj - 1;
                    double remove = f(x - 1, y) + 1.0;
                    double insert = f(x, y - 1) + 1.0;
                    double match;
                    if (ta.lmld[static_cast<std::size_t>(node_a)] == li &&
                        tb.lmld[static_cast<std::size_t>(node_b)] == lj) {
                        match = f(x - 1, y - 1) +
                                costs.relabel(*ta.nodes[static_cast<std::size_t>(node_a)],
                                              *tb.nodes[static_cast<std::size_t>(node_b)]);
                        f(x, y) = std::min({remove, insert, match});
                        td(node_a, node_b) = f(x, y);
                    } else {
                        int p = ta.lmld[static_cast<std::size_t>(node_a)] - li;
                        int q = tb.lmld[static_cast<std::size_t>(node_b)] - lj;
                        match = f(p, q) + td(node_a, node_b);
                        f(x, y) = std::min({remove, insert, match});
                    }
                }
            }
        }
    }
    return td(na - 1, nb - 1);
}

TedsReport teds(const TableTree& pred, const TableTree& gt, bool struct_only) {
    TedsReport report;
    report.struct_only = struct_only;
    report.size_pred = node_count(pred);
    report.size_gt = node_count(gt);
    report.edit_distance = tree_edit_distance(pred, gt, CostModel{struct_only});
    double denom = static_cast<double>(std::max(report.size_pred, report.size_gt));
    report.score = std::clamp(1.0 - report.edit_distance / denom, 0.0, 1.0);
    return report;
}

TedsReport teds(std::string_view pred_html, std::string_view gt_html, bool struct_only) {
    TableTree pred;
    try {
        pred = parse_table_html(pred_html);
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, std::string("pred: ") + e.what(), e.offset());
    }
    TableTree gt;
    try {
        gt = parse_table_html(gt_html);
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, std::string("gt: ") + e.what(), e.offset());
    }
    return teds(pred, gt, struct_only);
}

double round_score(double value) {
    return std::nearbyint(value * 10000.0) / 10000.0;
}

BatchResult batch_evaluate(const std::filesystem::path& pred_file,
                           const std::filesystem::path& gt_file, int parallelism,
                           bool struct_only) {
    std::map<std::string, std::string> pred = read_html_by_filename(pred_file);
    std::map<std::string, std::string> gt = read_html_by_filename(gt_file);

    BatchResult result;
    result.per_sample.reserve(gt.size());
    for (const auto& [filename, html] : gt) {
        SampleScore s;
        s.filename = filename;
        result.per_sample.push_back(std::move(s));
    }
    for (const auto& [filename, html] : pred) {
        if (!gt.contains(filename)) ++result.pred_extra;
    }

    int n = static_cast<int>(result.per_sample.size());
    if (parallelism < 1) parallelism = 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(parallelism)
#endif
    for (int i = 0; i < n; ++i) {
        SampleScore& s = result.per_sample[static_cast<std::size_t>(i)];
        auto p = pred.find(s.filename);
        if (p == pred.end()) {
            s.score = 0.0;
            s.note = "missing prediction";
            continue;
        }
        try {
            s.score = teds(p->second, gt.at(s.filename), struct_only).score;
        } catch (const Error& e) {
            s.score = 0.0;
            s.note = e.what();
        }
    }

    double sum = 0.0;
    for (const auto& s : result.per_sample) sum += s.score;
    result.n = n;
    result.mean = n > 0 ? sum / n : 0.0;
    return result;
}

} // namespace tabrec
