#include "tabrec/pipeline.hpp"

#include "tabrec/sequence.hpp"

namespace tabrec {

PipelineResult run_pipeline(const ModelOutputRecord& record, const EmptyFormTable& forms,
                            const PipelineOptions& opts) {
    StructureSequence seq;
    seq.tokens = record.structure.tokens;
    Skeleton skeleton = decode_to_skeleton(seq);

    if (skeleton.anchors.size() != record.structure.boxes.size()) {
        throw Error(ErrorKind::BoxCountMismatch,
                    std::to_string(skeleton.anchors.size()) + " anchors vs " +
                        std::to_string(record.structure.boxes.size()) + " boxes");
    }
    for (std::size_t i = 0; i < skeleton.anchors.size(); ++i) {
        skeleton.anchors[i].box = record.structure.boxes[i];
        if (skeleton.anchors[i].kind == CellKind::SpanCell) skeleton.anchors[i].span_empty = false;
    }

    PipelineResult result;
    result.anchors = static_cast<int>(skeleton.anchors.size());
    for (const auto& anchor : skeleton.anchors) {
        if (anchor.kind != CellKind::EmptyForm && anchor.box) ++result.candidate_cells;
    }

    std::vector<TextLine> lines = record.text_lines;
    if (!lines.empty()) {
        if (!record.image_size) {
            throw Error(ErrorKind::MissingImageSize,
                        "text lines carry pixel boxes; image_size is required to match them "
                        "against normalized structure boxes");
        }
        for (auto& line : lines) {
            line.box = convert(line.box, *record.image_size, BoxForm::Normalized);
        }
    }

    result.assignment = assign(skeleton.anchors, lines, opts.assign);
    result.html = assemble(skeleton.tree, skeleton.anchors, result.assignment, lines, forms,
                           opts.assemble);
    return result;
}

} // namespace tabrec
