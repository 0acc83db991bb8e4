#pragma once

#include <span>
#include <string>

#include "tabrec/assignment.hpp"
#include "tabrec/table_tree.hpp"
#include "tabrec/vocab.hpp"

namespace tabrec {

struct AssembleOptions {
    bool format_correction = true;
};

// Wraps the content of every visibly non-empty thead cell in <b>..</b> unless
// it is already wrapped. Idempotent; tbody is never touched.
TableTree format_correct_thead(TableTree tree);

// Fills a decoded skeleton: merged line text into non-empty/span cells, the
// literal configured markup into empty-form cells; then optional thead format
// correction. Returns the filled tree.
TableTree assemble_tree(const TableTree& skeleton, std::span<const CellAnchor> anchors,
                        const Assignment& assignment, std::span<const TextLine> lines,
                        const EmptyFormTable& forms, const AssembleOptions& opts = {});

// assemble_tree followed by canonical serialization.
std::string assemble(const TableTree& skeleton, std::span<const CellAnchor> anchors,
                     const Assignment& assignment, std::span<const TextLine> lines,
                     const EmptyFormTable& forms, const AssembleOptions& opts = {});

} // namespace tabrec
