#include "tabrec/assembler.hpp"

#include <map>

namespace tabrec {

TableTree format_correct_thead(TableTree tree) {
    if (tree.children.empty()) return tree;
    for_each_td(tree.thead(), [](TableTree& td) {
        if (!has_visible_text(td.content)) return;
        if (td.content.starts_with("<b>") && td.content.ends_with("</b>")) return;
        td.content = "<b>" + td.content + "</b>";
    });
    return tree;
}

TableTree assemble_tree(const TableTree& skeleton, std::span<const CellAnchor> anchors,
                        const Assignment& assignment, std::span<const TextLine> lines,
                        const EmptyFormTable& forms, const AssembleOptions& opts) {
    std::map<int, const TextLine*> lines_by_id;
    for (const auto& line : lines) lines_by_id.emplace(line.id, &line);

    TableTree tree = skeleton;
    std::size_t ordinal = 0;
    for_each_td(tree, [&](TableTree& td) {
        if (ordinal >= anchors.size()) {
            ++ordinal;
            return;
        }
        const CellAnchor& anchor = anchors[ordinal];
        if (anchor.kind == CellKind::EmptyForm) {
            td.content = forms.inner(anchor.empty_form);
        } else {
            auto it = assignment.per_cell.find(anchor.cell_ordinal);
            if (it != assignment.per_cell.end()) {
                std::vector<TextLine> cell_lines;
                cell_lines.reserve(it->second.size());
                for (const auto& match : it->second) {
                    auto line = lines_by_id.find(match.line_id);
                    if (line != lines_by_id.end()) cell_lines.push_back(*line->second);
                }
                td.content = merge_cell_text(cell_lines);
            }
        }
        ++ordinal;
    });
    if (ordinal != anchors.size()) {
        throw Error(ErrorKind::AnchorMismatch,
                    "skeleton has " + std::to_string(ordinal) + " cells, anchors " +
                        std::to_string(anchors.size()));
    }
    if (opts.format_correction) tree = format_correct_thead(std::move(tree));
    return tree;
}

std::string assemble(const TableTree& skeleton, std::span<const CellAnchor> anchors,
                     const Assignment& assignment, std::span<const TextLine> lines,
                     const EmptyFormTable& forms, const AssembleOptions& opts) {
    return to_html(assemble_tree(skeleton, anchors, assignment, lines, forms, opts));
}

} // namespace tabrec
