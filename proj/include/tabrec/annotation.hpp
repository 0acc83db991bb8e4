#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabrec/geometry.hpp"

namespace tabrec {

struct CellRecord {
    std::vector<std::string> tokens;  // per-character content plus inline markup tags
    std::optional<Box> bbox;          // pixel corners; present iff the cell has visible content
    bool operator==(const CellRecord&) const = default;
};

// One ground-truth sample: raw HTML structure fragments plus the per-cell
// content streams, in document reading order.
struct AnnotationRecord {
    std::string filename;
    std::string split;
    std::vector<std::string> structure_tokens;
    std::vector<CellRecord> cells;
    std::optional<ImageSize> image_size;
    bool operator==(const AnnotationRecord&) const = default;
};

// Number of cell slots the structure fragments imply ("<td>" and "<td" openers).
int count_cell_slots(std::span<const std::string> structure_tokens);

} // namespace tabrec
