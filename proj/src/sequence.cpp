#include "tabrec/sequence.hpp"

#include <algorithm>

namespace tabrec {

int count_cell_slots(std::span<const std::string> structure_tokens) {
    int n = 0;
    for (const auto& f : structure_tokens) {
        if (f == "<td>" || f == "<td") ++n;
    }
    return n;
}

namespace {

struct SpanAttr {
    bool is_colspan = false;
    int value = 0;
};

// Matches ` colspan="N"` / ` rowspan="N"` fragments; nullopt for anything else.
std::optional<SpanAttr> parse_span_attr(std::string_view frag) {
    SpanAttr attr;
    std::string_view rest;
    if (frag.starts_with(" colspan=\"")) {
        attr.is_colspan = true;
        rest = frag.substr(10);
    } else if (frag.starts_with(" rowspan=\"")) {
        attr.is_colspan = false;
        rest = frag.substr(10);
    } else {
        return std::nullopt;
    }
    if (rest.size() < 2 || rest.back() != '"') return std::nullopt;
    rest.remove_suffix(1);
    int value = 0;
    for (char c : rest) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + (c - '0');
        if (value > 1000) break;
    }
    attr.value = value;
    return attr;
}

} // namespace

StructureSequence encode_annotation(const AnnotationRecord& record,
                                    std::optional<ImageSize> image_size,
                                    const EmptyFormTable& forms,
                                    const EncodeOptions& opts,
                                    EncodeStats* stats) {
    StructureSequence seq;
    seq.max_len = opts.max_len;

    auto emit = [&seq](int id, std::optional<Box> box = std::nullopt) {
        seq.tokens.push_back(id);
        seq.boxes.push_back(box);
    };

    auto normalized_box = [&](const CellRecord& cell) -> std::optional<Box> {
        if (!image_size || !cell.bbox) return std::nullopt;
        Box b = *cell.bbox;
        b.x0 = std::clamp(b.x0, 0.0, static_cast<double>(image_size->width));
        b.x1 = std::clamp(b.x1, b.x0, static_cast<double>(image_size->width));
        b.y0 = std::clamp(b.y0, 0.0, static_cast<double>(image_size->height));
        b.y1 = std::clamp(b.y1, b.y0, static_cast<double>(image_size->height));
        return convert(b, *image_size, BoxForm::Normalized);
    };

    auto classify = [&](const CellRecord& cell) -> std::optional<int> {
        if (has_visible_text(cell.tokens)) return std::nullopt;
        std::string markup = "<td>";
        for (const auto& tok : cell.tokens) markup += tok;
        markup += "</td>";
        if (auto form = forms.find(markup)) return form;
        if (opts.lenient_empty_forms) {
            if (stats) ++stats->unknown_empty_forms;
            return 0;
        }
        throw Error(ErrorKind::UnknownEmptyForm, "empty-cell markup not in form table: " + markup);
    };

    const auto& frags = record.structure_tokens;
    std::size_t cell_idx = 0;

    auto next_cell = [&]() -> const CellRecord& {
        if (cell_idx >= record.cells.size()) {
            throw Error(ErrorKind::StructureCellMismatch,
                        "structure implies more cells than the record carries");
        }
        return record.cells[cell_idx++];
    };

    for (std::size_t i = 0; i < frags.size(); ++i) {
        const std::string& f = frags[i];
        if (f == "<thead>") {
            emit(Vocabulary::kThead);
        } else if (f == "</thead>") {
            emit(Vocabulary::kTheadClose);
        } else if (f == "<tbody>") {
            emit(Vocabulary::kTbody);
        } else if (f == "</tbody>") {
            emit(Vocabulary::kTbodyClose);
        } else if (f == "<tr>") {
            emit(Vocabulary::kTr);
        } else if (f == "</tr>") {
            emit(Vocabulary::kTrClose);
        } else if (f == "<td>") {
            if (i + 1 >= frags.size() || frags[i + 1] != "</td>") {
                throw Error(ErrorKind::MalformedSequence,
                            "<td> not immediately closed by </td> at fragment " + std::to_string(i));
            }
            const CellRecord& cell = next_cell();
            if (auto form = classify(cell)) {
                emit(Vocabulary::empty_form_id(*form));
            } else {
                emit(Vocabulary::kCell, normalized_box(cell));
            }
            ++i;  // consume "</td>"
        } else if (f == "<td") {
            const CellRecord& cell = next_cell();
            emit(Vocabulary::kCellOpen, normalized_box(cell));
            ++i;
            for (; i < frags.size() && frags[i] != ">"; ++i) {
                auto attr = parse_span_attr(frags[i]);
                if (!attr) {
                    throw Error(ErrorKind::UnknownFragment,
                                "unexpected fragment inside <td: \"" + frags[i] + "\"");
                }
                if (attr->value < 1 || attr->value > Vocabulary::kMaxSpan) {
                    throw Error(ErrorKind::SpanOutOfRange,
                                (attr->is_colspan ? std::string("colspan=") : std::string("rowspan=")) +
                                    std::to_string(attr->value));
                }
                if (attr->value >= 2) {
                    emit(attr->is_colspan ? Vocabulary::colspan_id(attr->value)
                                          : Vocabulary::rowspan_id(attr->value));
                }
            }
            if (i >= frags.size()) {
                throw Error(ErrorKind::MalformedSequence, "unclosed <td fragment");
            }
            emit(Vocabulary::kCellGt);
            if (i + 1 >= frags.size() || frags[i + 1] != "</td>") {
                throw Error(ErrorKind::MalformedSequence, "span cell not closed by </td>");
            }
            emit(Vocabulary::kCellClose);
            ++i;  // consume "</td>"
        } else if (f == "</td>" || f == ">" || parse_span_attr(f)) {
            throw Error(ErrorKind::MalformedSequence,
                        "fragment \"" + f + "\" outside a cell at position " + std::to_string(i));
        } else {
            throw Error(ErrorKind::UnknownFragment, "\"" + f + "\"");
        }
    }
    if (cell_idx != record.cells.size()) {
        throw Error(ErrorKind::StructureCellMismatch,
                    "structure implies " + std::to_string(cell_idx) + " cells, record has " +
                        std::to_string(record.cells.size()));
    }
    if (static_cast<int>(seq.tokens.size()) > opts.max_len) {
        throw Error(ErrorKind::LengthExceeded,
                    std::to_string(seq.tokens.size()) + " tokens > max " + std::to_string(opts.max_len));
    }
    return seq;
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::UnknownSymbol: return "UnknownSymbol";
        case ViolationKind::UnbalancedPair: return "UnbalancedPair";
        case ViolationKind::DanglingAttribute: return "DanglingAttribute";
        case ViolationKind::MalformedCellFragment: return "MalformedCellFragment";
        case ViolationKind::CellOutsideRow: return "CellOutsideRow";
        case ViolationKind::RowOutsideSection: return "RowOutsideSection";
        case ViolationKind::SectionOrder: return "SectionOrder";
        case ViolationKind::DuplicateSection: return "DuplicateSection";
        case ViolationKind::DuplicateAttribute: return "DuplicateAttribute";
        case ViolationKind::BareFragment: return "BareFragment";
        case ViolationKind::ControlSymbol: return "ControlSymbol";
    }
    return "Violation";
}

namespace {

enum class Section { None, Thead, Tbody };
enum class FragState { Outside, AfterOpen, AfterGt };

struct GrammarWalker {
    std::vector<Violation> violations;
    Section section = Section::None;
    bool saw_thead = false;
    bool saw_tbody = false;
    bool in_row = false;
    FragState frag = FragState::Outside;
    bool frag_has_colspan = false;
    bool frag_has_rowspan = false;

    void report(int pos, Severity sev, ViolationKind kind, std::string message) {
        violations.push_back({pos, sev, kind, std::move(message)});
    }

    void step(int pos, int id) {
        if (id < 0 || id >= Vocabulary::kTotalCount) {
            report(pos, Severity::Fatal, ViolationKind::UnknownSymbol,
                   "token id " + std::to_string(id) + " outside the vocabulary");
            return;
        }
        if (Vocabulary::is_control(id)) {
            report(pos, Severity::Warning, ViolationKind::ControlSymbol,
                   "control symbol in sequence body");
            return;
        }
        // An open cell fragment only admits attributes, ">" and "</td>".
        if (frag == FragState::AfterOpen) {
            bool ok = id == Vocabulary::kCellGt || Vocabulary::colspan_value(id) ||
                      Vocabulary::rowspan_value(id);
            if (!ok) {
                report(pos, Severity::Fatal, ViolationKind::MalformedCellFragment,
                       "<td fragment interrupted before '>'");
                frag = FragState::Outside;
            }
        } else if (frag == FragState::AfterGt) {
            if (id != Vocabulary::kCellClose) {
                report(pos, Severity::Fatal, ViolationKind::MalformedCellFragment,
                       "span cell missing </td>");
                frag = FragState::Outside;
            }
        }

        switch (id) {
            case Vocabulary::kThead:
            case Vocabulary::kTbody: {
                bool is_thead = id == Vocabulary::kThead;
                if (in_row || section != Section::None) {
                    report(pos, Severity::Fatal, ViolationKind::UnbalancedPair,
                           "section opened inside an open scope");
                } else if (is_thead && saw_tbody) {
                    report(pos, Severity::Fatal, ViolationKind::SectionOrder,
                           "<thead> after <tbody>");
                } else if ((is_thead && saw_thead) || (!is_thead && saw_tbody)) {
                    report(pos, Severity::Fatal, ViolationKind::DuplicateSection,
                           is_thead ? "duplicate <thead>" : "duplicate <tbody>");
                }
                section = is_thead ? Section::Thead : Section::Tbody;
                (is_thead ? saw_thead : saw_tbody) = true;
                break;
            }
            case Vocabulary::kTheadClose:
            case Vocabulary::kTbodyClose: {
                bool is_thead = id == Vocabulary::kTheadClose;
                Section expected = is_thead ? Section::Thead : Section::Tbody;
                if (in_row) {
                    report(pos, Severity::Fatal, ViolationKind::UnbalancedPair,
                           "section closed with an open <tr>");
                    in_row = false;
                }
                if (section != expected) {
                    report(pos, Severity::Fatal, ViolationKind::UnbalancedPair,
                           std::string("unmatched ") + (is_thead ? "</thead>" : "</tbody>"));
                } else {
                    section = Section::None;
                }
                break;
            }
            case Vocabulary::kTr:
                if (in_row) {
                    report(pos, Severity::Fatal, ViolationKind::UnbalancedPair, "<tr> inside <tr>");
                } else if (section == Section::None) {
                    report(pos, Severity::Fatal, ViolationKind::RowOutsideSection,
                           "<tr> outside <thead>/<tbody>");
                }
                in_row = true;
                break;
            case Vocabulary::kTrClose:
                if (!in_row) {
                    report(pos, Severity::Fatal, ViolationKind::UnbalancedPair,
                           "</tr> with no open <tr>");
                }
                in_row = false;
                break;
            case Vocabulary::kCellOpen:
                if (!in_row) {
                    report(pos, Severity::Fatal, ViolationKind::CellOutsideRow,
                           "cell fragment outside <tr>");
                }
                frag = FragState::AfterOpen;
                frag_has_colspan = frag_has_rowspan = false;
                break;
            case Vocabulary::kCellGt:
                if (frag == FragState::AfterOpen) {
                    if (!frag_has_colspan && !frag_has_rowspan) {
                        report(pos, Severity::Warning, ViolationKind::BareFragment,
                               "cell fragment without span attributes");
                    }
                    frag = FragState::AfterGt;
                } else {
                    report(pos, Severity::Fatal, ViolationKind::MalformedCellFragment,
                           "'>' without an open <td fragment");
                }
                break;
            case Vocabulary::kCellClose:
                if (frag == FragState::AfterGt) {
                    frag = FragState::Outside;
                } else {
                    report(pos, Severity::Fatal, ViolationKind::MalformedCellFragment,
                           "</td> without an open cell fragment");
                }
                break;
            default:
                if (Vocabulary::colspan_value(id)) {
                    attr_token(pos, frag_has_colspan, "colspan");
                } else if (Vocabulary::rowspan_value(id)) {
                    attr_token(pos, frag_has_rowspan, "rowspan");
                } else {
                    // non-empty anchor or empty form
                    if (!in_row) {
                        report(pos, Severity::Fatal, ViolationKind::CellOutsideRow,
                               "cell anchor outside <tr>");
                    }
                }
                break;
        }
    }

    void attr_token(int pos, bool& seen, const char* name) {
        if (frag != FragState::AfterOpen) {
            report(pos, Severity::Fatal, ViolationKind::DanglingAttribute,
                   std::string(name) + " attribute outside a <td fragment");
            return;
        }
        if (seen) {
            report(pos, Severity::Warning, ViolationKind::DuplicateAttribute,
                   std::string("repeated ") + name + " (last wins)");
        }
        seen = true;
    }

    void finish(int end_pos) {
        if (frag != FragState::Outside) {
            report(end_pos, Severity::Fatal, ViolationKind::MalformedCellFragment,
                   "unclosed <td fragment at end of sequence");
        }
        if (in_row) {
            report(end_pos, Severity::Fatal, ViolationKind::UnbalancedPair, "unclosed <tr>");
        }
        if (section != Section::None) {
            report(end_pos, Severity::Fatal, ViolationKind::UnbalancedPair, "unclosed section");
        }
    }
};

} // namespace

std::vector<Violation> validate_sequence(std::span<const int> tokens) {
    GrammarWalker walker;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        walker.step(static_cast<int>(i), tokens[i]);
    }
    walker.finish(static_cast<int>(tokens.size()));
    return std::move(walker.violations);
}

bool has_fatal(std::span<const Violation> violations) {
    return std::any_of(violations.begin(), violations.end(),
                       [](const Violation& v) { return v.severity == Severity::Fatal; });
}

Skeleton decode_to_skeleton(const StructureSequence& seq) {
    auto violations = validate_sequence(seq.tokens);
    for (const auto& v : violations) {
        if (v.severity == Severity::Fatal) {
            throw Error(ErrorKind::MalformedSequence,
                        std::string(to_string(v.kind)) + " at position " + std::to_string(v.position) +
                            ": " + v.message);
        }
    }

    auto box_at = [&seq](std::size_t pos) -> std::optional<Box> {
        return pos < seq.boxes.size() ? seq.boxes[pos] : std::nullopt;
    };

    Skeleton out;
    out.tree = TableTree::table();
    TableTree* section = nullptr;
    TableTree* row = nullptr;

    int frag_colspan = 1;
    int frag_rowspan = 1;
    int frag_start = -1;

    auto add_anchor = [&](CellAnchor anchor, TableTree cell) {
        anchor.cell_ordinal = static_cast<int>(out.anchors.size());
        out.anchors.push_back(anchor);
        row->children.push_back(std::move(cell));
    };

    const auto& tokens = seq.tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        int id = tokens[i];
        if (Vocabulary::is_control(id)) continue;
        switch (id) {
            case Vocabulary::kThead:
                section = &out.tree.thead();
                break;
            case Vocabulary::kTbody:
                section = &out.tree.tbody();
                break;
            case Vocabulary::kTheadClose:
            case Vocabulary::kTbodyClose:
                section = nullptr;
                break;
            case Vocabulary::kTr:
                section->children.push_back(TableTree::row());
                row = &section->children.back();
                break;
            case Vocabulary::kTrClose:
                row = nullptr;
                break;
            case Vocabulary::kCell: {
                CellAnchor anchor;
                anchor.seq_index = static_cast<int>(i);
                anchor.kind = CellKind::NonEmpty;
                anchor.box = box_at(i);
                add_anchor(anchor, TableTree::cell());
                break;
            }
            case Vocabulary::kCellOpen:
                frag_colspan = 1;
                frag_rowspan = 1;
                frag_start = static_cast<int>(i);
                break;
            case Vocabulary::kCellGt:
                break;
            case Vocabulary::kCellClose: {
                CellAnchor anchor;
                anchor.seq_index = frag_start;
                anchor.box = box_at(static_cast<std::size_t>(frag_start));
                if (frag_colspan == 1 && frag_rowspan == 1) {
                    // attribute-less fragment degrades to a plain cell
                    anchor.kind = CellKind::NonEmpty;
                } else {
                    anchor.kind = CellKind::SpanCell;
                    anchor.colspan = frag_colspan;
                    anchor.rowspan = frag_rowspan;
                    anchor.span_empty = !anchor.box.has_value();
                }
                add_anchor(anchor, TableTree::cell("", frag_colspan, frag_rowspan));
                break;
            }
            default:
                if (auto v = Vocabulary::colspan_value(id)) {
                    frag_colspan = *v;
                } else if (auto w = Vocabulary::rowspan_value(id)) {
                    frag_rowspan = *w;
                } else {
                    CellAnchor anchor;
                    anchor.seq_index = static_cast<int>(i);
                    anchor.kind = CellKind::EmptyForm;
                    anchor.empty_form = Vocabulary::empty_form(id);
                    anchor.box = box_at(i);
                    add_anchor(anchor, TableTree::cell());
                }
                break;
        }
    }
    return out;
}

} // namespace tabrec
