#include "tabrec/vocab.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "tabrec/utf8.hpp"

namespace tabrec {

Vocabulary::Vocabulary() {
    symbols_ = {"<thead>", "</thead>", "<tbody>", "</tbody>", "<tr>", "</tr>",
                "<td></td>", "<td", ">", "</td>"};
    for (int k = 2; k <= kMaxSpan; ++k) {
        symbols_.push_back(" colspan=\"" + std::to_string(k) + "\"");
    }
    for (int k = 2; k <= kMaxSpan; ++k) {
        symbols_.push_back(" rowspan=\"" + std::to_string(k) + "\"");
    }
    symbols_.push_back("<eb></eb>");
    for (int k = 1; k < kEmptyFormCount; ++k) {
        symbols_.push_back("<eb" + std::to_string(k) + "></eb" + std::to_string(k) + ">");
    }
    symbols_.push_back("<SOS>");
    symbols_.push_back("<EOS>");
    symbols_.push_back("<PAD>");
    symbols_.push_back("<UKN>");
    for (int i = 0; i < static_cast<int>(symbols_.size()); ++i) {
        ids_.emplace(symbols_[i], i);
    }
}

const std::string& Vocabulary::symbol(int id) const {
    if (id < 0 || id >= size()) {
        throw Error(ErrorKind::UnknownToken, "symbol id out of range: " + std::to_string(id));
    }
    return symbols_[static_cast<std::size_t>(id)];
}

std::optional<int> Vocabulary::find(std::string_view symbol) const {
    auto it = ids_.find(std::string(symbol));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

int Vocabulary::id_or_unknown(std::string_view symbol) const {
    auto id = find(symbol);
    return id ? *id : kUnknown;
}

std::optional<int> Vocabulary::colspan_value(int id) {
    if (id >= kColspanFirst && id < kColspanFirst + kMaxSpan - 1) {
        return id - kColspanFirst + 2;
    }
    return std::nullopt;
}

std::optional<int> Vocabulary::rowspan_value(int id) {
    if (id >= kRowspanFirst && id < kRowspanFirst + kMaxSpan - 1) {
        return id - kRowspanFirst + 2;
    }
    return std::nullopt;
}

int Vocabulary::colspan_id(int value) {
    if (value < 2 || value > kMaxSpan) {
        throw Error(ErrorKind::SpanOutOfRange, "colspan value " + std::to_string(value));
    }
    return kColspanFirst + value - 2;
}

int Vocabulary::rowspan_id(int value) {
    if (value < 2 || value > kMaxSpan) {
        throw Error(ErrorKind::SpanOutOfRange, "rowspan value " + std::to_string(value));
    }
    return kRowspanFirst + value - 2;
}

void Vocabulary::export_plaintext(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    for (const auto& s : symbols_) out << s << '\n';
}

const Vocabulary& vocabulary() {
    static const Vocabulary vocab;
    return vocab;
}

Vocabulary build_vocabulary() { return Vocabulary(); }

namespace {

// U+2028 line separator, the invisible filler some annotations use.
constexpr const char* kLineSep = "\xE2\x80\xA8";

std::vector<std::string> default_markups() {
    return {
        "<td></td>",
        "<td> </td>",
        "<td><b> </b></td>",
        std::string("<td>") + kLineSep + kLineSep + "</td>",
        "<td><sup> </sup></td>",
        "<td><b></b></td>",
        "<td><i> </i></td>",
        "<td><b><i></i></b></td>",
        "<td><b><i> </i></b></td>",
        "<td><i></i></td>",
        "<td><b> </b><b></b></td>",
    };
}

} // namespace

EmptyFormTable EmptyFormTable::defaults() { return from_markups(default_markups()); }

const EmptyFormTable& default_empty_forms() {
    static const EmptyFormTable table = EmptyFormTable::defaults();
    return table;
}

EmptyFormTable EmptyFormTable::from_markups(std::vector<std::string> markups) {
    if (static_cast<int>(markups.size()) != kFormCount) {
        throw Error(ErrorKind::ConfigError,
                    "empty-form table needs exactly " + std::to_string(kFormCount) +
                        " entries, got " + std::to_string(markups.size()));
    }
    if (markups[0] != "<td></td>" || markups[1] != "<td> </td>") {
        throw Error(ErrorKind::ConfigError,
                    "forms 0 and 1 must be \"<td></td>\" and \"<td> </td>\"");
    }
    EmptyFormTable table;
    for (const auto& m : markups) {
        if (!m.starts_with("<td>") || !m.ends_with("</td>")) {
            throw Error(ErrorKind::ConfigError, "empty-form markup must be a <td>...</td> literal: " + m);
        }
        if (std::find(table.markups_.begin(), table.markups_.end(), m) != table.markups_.end()) {
            throw Error(ErrorKind::ConfigError, "duplicate empty-form markup: " + m);
        }
        table.inners_.push_back(m.substr(4, m.size() - 9));
        table.markups_.push_back(m);
    }
    return table;
}

EmptyFormTable EmptyFormTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigError, "bad empty-form table " + path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("forms") || !doc["forms"].is_array()) {
        throw Error(ErrorKind::ConfigError, "empty-form table must be {\"forms\": [..]}");
    }
    std::vector<std::string> markups;
    for (const auto& f : doc["forms"]) {
        if (!f.is_string()) throw Error(ErrorKind::ConfigError, "form entries must be strings");
        markups.push_back(f.get<std::string>());
    }
    return from_markups(std::move(markups));
}

void EmptyFormTable::save(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["forms"] = markups_;
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

const std::string& EmptyFormTable::markup(int form) const {
    if (form < 0 || form >= kFormCount) {
        throw Error(ErrorKind::UnknownEmptyForm, "form id out of range: " + std::to_string(form));
    }
    return markups_[static_cast<std::size_t>(form)];
}

const std::string& EmptyFormTable::inner(int form) const {
    markup(form);  // range check
    return inners_[static_cast<std::size_t>(form)];
}

std::optional<int> EmptyFormTable::find(std::string_view markup) const {
    for (int i = 0; i < kFormCount; ++i) {
        if (markups_[static_cast<std::size_t>(i)] == markup) return i;
    }
    return std::nullopt;
}

bool is_markup_token(std::string_view token) {
    return token.size() >= 2 && token.front() == '<' && token.back() == '>';
}

bool has_visible_text(std::string_view content) {
    std::size_t i = 0;
    while (i < content.size()) {
        if (content[i] == '<') {
            auto close = content.find('>', i);
            if (close != std::string_view::npos) {
                i = close + 1;
                continue;
            }
        }
        if (!utf8::is_invisible(utf8::decode_next(content, i))) return true;
    }
    return false;
}

bool has_visible_text(std::span<const std::string> cell_tokens) {
    for (const auto& tok : cell_tokens) {
        if (is_markup_token(tok)) continue;
        std::size_t i = 0;
        while (i < tok.size()) {
            if (!utf8::is_invisible(utf8::decode_next(tok, i))) return true;
        }
    }
    return false;
}

std::vector<std::string> tokenize_cell_markup(std::string_view inner) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < inner.size()) {
        if (inner[i] == '<') {
            auto close = inner.find('>', i);
            if (close != std::string_view::npos) {
                out.emplace_back(inner.substr(i, close - i + 1));
                i = close + 1;
                continue;
            }
        }
        std::size_t start = i;
        utf8::decode_next(inner, i);
        out.emplace_back(inner.substr(start, i - start));
    }
    return out;
}

std::optional<int> classify_empty_cell(std::span<const std::string> cell_tokens,
                                       const EmptyFormTable& forms) {
    if (has_visible_text(cell_tokens)) return std::nullopt;
    std::string markup = "<td>";
    for (const auto& tok : cell_tokens) markup += tok;
    markup += "</td>";
    if (auto form = forms.find(markup)) return form;
    throw Error(ErrorKind::UnknownEmptyForm, "empty-cell markup not in form table: " + markup);
}

} // namespace tabrec
