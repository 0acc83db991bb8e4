#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabrec/geometry.hpp"
#include "tabrec/sequence.hpp"

namespace tabrec {

// A detected text line: box plus recognized content.
struct TextLine {
    int id = 0;
    Box box;
    std::string content;
    std::optional<double> confidence;
    bool operator==(const TextLine&) const = default;
};

enum class MatchRule { Center, Iou, Distance };

const char* to_string(MatchRule rule);

struct AssignConfig {
    // Stage 2 accepts the argmax-IOU cell only when the IOU is strictly above this.
    double iou_floor = 0.0;
    // Stage 3 (unmatched cells pull leftover lines) on/off.
    bool distance_enabled = true;
};

struct CellMatch {
    int line_id = 0;
    MatchRule rule = MatchRule::Center;
    bool operator==(const CellMatch&) const = default;
};

struct Assignment {
    // cell_ordinal -> matched lines in reading order (top-to-bottom, left-to-right)
    std::map<int, std::vector<CellMatch>> per_cell;
    std::vector<int> unassigned_lines;  // ascending line id
    bool no_candidates = false;         // no cell had a usable box
    bool operator==(const Assignment&) const = default;
};

// Three-stage matching:
//   1. Center rule: a line goes to a cell whose box contains its center
//      (nearest cell center on overlap, then lowest ordinal).
//   2. IOU rule: a leftover line goes to the argmax-IOU cell when the overlap
//      clears cfg.iou_floor (lowest ordinal on ties).
//   3. Distance rule: cells that got nothing pull leftover lines, greedily by
//      globally ascending center distance, one line per cell.
// Empty-form anchors and anchors without boxes are not candidates. Anchors and
// lines must share one coordinate form.
Assignment assign(std::span<const CellAnchor> cells, std::span<const TextLine> lines,
                  const AssignConfig& cfg = {});

// Deliberately plain quadratic restatement of the same three stages, kept as
// the comparison reference for assign() in tests.
Assignment assign_oracle(std::span<const CellAnchor> cells, std::span<const TextLine> lines,
                         const AssignConfig& cfg = {});

// Joins one cell's lines in reading order (center-y, then center-x, then id)
// with single spaces.
std::string merge_cell_text(std::span<const TextLine> lines);

} // namespace tabrec
