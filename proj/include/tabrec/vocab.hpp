#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tabrec/error.hpp"

namespace tabrec {

// The fixed structure-token alphabet: 39 content symbols plus 4 control
// symbols kept outside the content range so exports stay compatible with a
// 39-way classifier head.
//
// Content layout (ids 0..38):
//   0..5   paired section/row tags
//   6      non-empty cell, one symbol for the whole <td>content</td>
//   7..9   span-cell fragments: "<td", ">", "</td>"
//   10..18 colspan="2".."10"
//   19..27 rowspan="2".."10"
//   28..38 the 11 empty-cell forms
class Vocabulary {
public:
    static constexpr int kThead = 0;
    static constexpr int kTheadClose = 1;
    static constexpr int kTbody = 2;
    static constexpr int kTbodyClose = 3;
    static constexpr int kTr = 4;
    static constexpr int kTrClose = 5;
    static constexpr int kCell = 6;       // non-empty <td>content</td> anchor
    static constexpr int kCellOpen = 7;   // "<td"
    static constexpr int kCellGt = 8;     // ">"
    static constexpr int kCellClose = 9;  // "</td>"
    static constexpr int kColspanFirst = 10;
    static constexpr int kRowspanFirst = 19;
    static constexpr int kEmptyFormFirst = 28;
    static constexpr int kContentCount = 39;
    static constexpr int kStart = 39;
    static constexpr int kEnd = 40;
    static constexpr int kPad = 41;
    static constexpr int kUnknown = 42;
    static constexpr int kTotalCount = 43;

    static constexpr int kEmptyFormCount = 11;
    static constexpr int kMaxSpan = 10;

    Vocabulary();

    int size() const { return static_cast<int>(symbols_.size()); }
    int content_size() const { return kContentCount; }

    const std::string& symbol(int id) const;
    std::optional<int> find(std::string_view symbol) const;
    int id_or_unknown(std::string_view symbol) const;

    static bool is_control(int id) { return id >= kContentCount; }
    static bool is_empty_form(int id) {
        return id >= kEmptyFormFirst && id < kEmptyFormFirst + kEmptyFormCount;
    }
    // Empty-form index 0..10, or -1 for other symbols.
    static int empty_form(int id) { return is_empty_form(id) ? id - kEmptyFormFirst : -1; }

    static std::optional<int> colspan_value(int id);
    static std::optional<int> rowspan_value(int id);
    static int colspan_id(int value);
    static int rowspan_id(int value);
    static int empty_form_id(int form) { return kEmptyFormFirst + form; }

    // A position that can carry a regressed box: the non-empty anchor, an
    // empty-cell form, or the "<td" opening a span-cell fragment.
    static bool is_cell_anchor(int id) {
        return id == kCell || id == kCellOpen || is_empty_form(id);
    }

    // One symbol per line, line index == id.
    void export_plaintext(const std::filesystem::path& path) const;

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, int> ids_;
};

// Shared immutable instance; the table is fixed, so everything can use this.
const Vocabulary& vocabulary();

// Fresh copy of the fixed table.
Vocabulary build_vocabulary();

// The 11 recognized markups for visually-empty cells, densest first. Form 0 is
// always "<td></td>" and form 1 "<td> </td>"; the remaining nine are
// configurable and can be re-derived from annotation data (`stats empty-forms`).
class EmptyFormTable {
public:
    static constexpr int kFormCount = 11;

    static EmptyFormTable defaults();
    static EmptyFormTable from_markups(std::vector<std::string> markups);
    static EmptyFormTable load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const std::string& markup(int form) const;
    // Markup minus the <td></td> wrapper, i.e. what goes into the cell node.
    const std::string& inner(int form) const;
    std::optional<int> find(std::string_view markup) const;

private:
    EmptyFormTable() = default;
    std::vector<std::string> markups_;
    std::vector<std::string> inners_;
};

// Shared immutable instance of EmptyFormTable::defaults().
const EmptyFormTable& default_empty_forms();

// --- cell-content token helpers shared by encoding, stats and synthesis ---

// Inline markup token like "<b>" or "</sup>" (as opposed to a character).
bool is_markup_token(std::string_view token);

// True iff the tokens contain at least one visible character outside markup.
bool has_visible_text(std::span<const std::string> cell_tokens);
// Same test on flat content with inline markup embedded.
bool has_visible_text(std::string_view content);

// Splits cell markup into per-character / per-tag tokens, the granularity the
// annotation files use.
std::vector<std::string> tokenize_cell_markup(std::string_view inner);

// Empty-form id for a visually-empty cell, or nullopt for a non-empty cell.
// Throws Error{UnknownEmptyForm} for an empty cell whose markup is not in the
// form table.
std::optional<int> classify_empty_cell(std::span<const std::string> cell_tokens,
                                       const EmptyFormTable& forms);

} // namespace tabrec
