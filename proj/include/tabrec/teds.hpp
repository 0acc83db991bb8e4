#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tabrec/table_tree.hpp"

namespace tabrec {

// Character-level Levenshtein distance over code points.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

// edit_distance / max(len); 0 when both strings are empty.
double normalized_edit_distance(std::string_view a, std::string_view b);

// Node relabel costs; insertions and deletions always cost 1.
//   different tags                      -> 1
//   td with different colspan/rowspan   -> 1
//   td, same spans, different content   -> normalized content edit distance
//   otherwise                           -> 0
// struct_only forces the td content term to 0.
struct CostModel {
    bool struct_only = false;
    double relabel(const TableTree& a, const TableTree& b) const;
};

// Ordered-tree edit distance (keyroots dynamic program) under CostModel.
double tree_edit_distance(const TableTree& a, const TableTree& b, const CostModel& costs = {});

struct TedsReport {
    double score = 0.0;
    double edit_distance = 0.0;
    int size_pred = 0;
    int size_gt = 0;
    bool struct_only = false;
};

// Tree-edit-distance similarity: 1 - distance / max(node counts).
TedsReport teds(const TableTree& pred, const TableTree& gt, bool struct_only = false);
// Parses both HTML fragments first; Error{ParseError} messages name the side.
TedsReport teds(std::string_view pred_html, std::string_view gt_html, bool struct_only = false);

struct SampleScore {
    std::string filename;
    double score = 0.0;
    std::string note;  // empty when the sample scored normally
};

struct BatchResult {
    double mean = 0.0;
    int n = 0;
    std::vector<SampleScore> per_sample;  // ordered by filename
    int pred_extra = 0;                   // predictions with no ground-truth key
};

// Scores a prediction file against ground truth. Both files are line-delimited
// JSON keyed by filename: predictions are {"filename", "html"}; ground truth
// may be the same shape or full annotation records. Samples missing from the
// prediction file (or with unparseable HTML) score 0. Scoring runs on
// `parallelism` threads with bit-identical results at any thread count.
BatchResult batch_evaluate(const std::filesystem::path& pred_file,
                           const std::filesystem::path& gt_file, int parallelism = 1,
                           bool struct_only = false);

// Round-half-even to four decimals, the convention for reported scores.
double round_score(double value);

} // namespace tabrec
