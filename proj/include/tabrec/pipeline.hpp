#pragma once

#include "tabrec/assembler.hpp"
#include "tabrec/dataset_io.hpp"

namespace tabrec {

struct PipelineOptions {
    AssignConfig assign;
    AssembleOptions assemble;
};

struct PipelineResult {
    std::string html;
    Assignment assignment;
    int anchors = 0;
    int candidate_cells = 0;
};

// Full post-processing for one model-output sample: decode the token sequence
// to a skeleton, attach the per-anchor boxes, match text lines to cells, merge
// and assemble the final HTML. Needs record.image_size when text lines are
// present (their pixel boxes are normalized for matching).
// Throws Error{MalformedSequence} for sequences with fatal grammar violations.
PipelineResult run_pipeline(const ModelOutputRecord& record, const EmptyFormTable& forms,
                            const PipelineOptions& opts = {});

} // namespace tabrec
