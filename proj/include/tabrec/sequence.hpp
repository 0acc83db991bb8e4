#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabrec/annotation.hpp"
#include "tabrec/table_tree.hpp"
#include "tabrec/vocab.hpp"

namespace tabrec {

inline constexpr int kDefaultMaxSequenceLen = 500;

// An encoded or predicted structure-token sequence with per-position boxes.
// Boxes are normalized [x,y,w,h] rectangles and appear only at cell-anchor
// positions; ground-truth encoding attaches them at non-empty cells only.
struct StructureSequence {
    std::vector<int> tokens;                // vocabulary ids
    std::vector<std::optional<Box>> boxes;  // parallel to tokens
    int max_len = kDefaultMaxSequenceLen;
    bool operator==(const StructureSequence&) const = default;
};

enum class CellKind { NonEmpty, EmptyForm, SpanCell };

// One td cell as seen from the token sequence: its anchor position, what kind
// of cell the tokens describe, and the regressed box if present.
struct CellAnchor {
    int seq_index = 0;
    int cell_ordinal = 0;
    CellKind kind = CellKind::NonEmpty;
    int empty_form = -1;      // kind == EmptyForm
    int colspan = 1;          // kind == SpanCell
    int rowspan = 1;
    bool span_empty = false;  // span cell with no box attached (ground-truth encodings)
    std::optional<Box> box;
    bool operator==(const CellAnchor&) const = default;
};

struct EncodeOptions {
    int max_len = kDefaultMaxSequenceLen;
    // Map empty cells with unrecognized markup to form 0 instead of failing.
    bool lenient_empty_forms = false;
};

struct EncodeStats {
    int unknown_empty_forms = 0;
};

// Folds raw structure fragments into alphabet tokens and attaches normalized
// boxes at non-empty cell anchors. Without an image size the boxes are
// omitted (token-only encoding, e.g. for statistics).
StructureSequence encode_annotation(const AnnotationRecord& record,
                                    std::optional<ImageSize> image_size,
                                    const EmptyFormTable& forms,
                                    const EncodeOptions& opts = {},
                                    EncodeStats* stats = nullptr);

enum class Severity { Warning, Fatal };

enum class ViolationKind {
    UnknownSymbol,         // fatal: token outside the alphabet
    UnbalancedPair,        // fatal: mismatched <thead>/<tbody>/<tr> pairing
    DanglingAttribute,     // fatal: span attribute outside a <td fragment
    MalformedCellFragment, // fatal: ">" or "</td>" out of place, unclosed "<td"
    CellOutsideRow,        // fatal: cell anchor not inside <tr>
    RowOutsideSection,     // fatal: <tr> not inside <thead>/<tbody>
    SectionOrder,          // fatal: <tbody> before <thead>
    DuplicateSection,      // fatal: second <thead> or <tbody>
    DuplicateAttribute,    // warning: attribute repeated in one fragment (last wins)
    BareFragment,          // warning: "<td" ">" fragment with no span attribute
    ControlSymbol,         // warning: control token in the body (ignored by decode)
};

const char* to_string(ViolationKind kind);

struct Violation {
    int position = 0;
    Severity severity = Severity::Fatal;
    ViolationKind kind = ViolationKind::UnknownSymbol;
    std::string message;
};

// Full grammar check; returns every violation with position and severity.
// Never throws, regardless of input.
std::vector<Violation> validate_sequence(std::span<const int> tokens);

bool has_fatal(std::span<const Violation> violations);

struct Skeleton {
    TableTree tree;                  // td nodes carry spans but no content yet
    std::vector<CellAnchor> anchors; // one per td node, reading order
};

// Builds the content-less table tree plus the anchor list. The sequence must
// be free of fatal grammar violations; throws Error{MalformedSequence} otherwise.
Skeleton decode_to_skeleton(const StructureSequence& seq);

} // namespace tabrec
