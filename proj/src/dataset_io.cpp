#include "tabrec/dataset_io.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tabrec/sequence.hpp"
#include "tabrec/utf8.hpp"

namespace tabrec {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxReportedIssues = 50;

json parse_line(const std::string& line, long line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::RecordError, std::string("line is not valid JSON: ") + e.what(),
                    line_no);
    }
}

const json& require_field(const json& obj, const char* name, long line_no) {
    auto it = obj.find(name);
    if (it == obj.end()) {
        throw Error(ErrorKind::RecordError, std::string("missing field \"") + name + "\"", line_no);
    }
    return *it;
}

std::string require_string(const json& obj, const char* name, long line_no) {
    const json& f = require_field(obj, name, line_no);
    if (!f.is_string()) {
        throw Error(ErrorKind::RecordError, std::string("field \"") + name + "\" must be a string",
                    line_no);
    }
    return f.get<std::string>();
}

double require_number(const json& value, const char* what, long line_no) {
    if (!value.is_number() || !std::isfinite(value.get<double>())) {
        throw Error(ErrorKind::RecordError, std::string(what) + " must be a finite number", line_no);
    }
    return value.get<double>();
}

std::array<double, 4> require_quad(const json& value, const char* what, long line_no) {
    if (!value.is_array() || value.size() != 4) {
        throw Error(ErrorKind::RecordError, std::string(what) + " must be an array of 4 numbers",
                    line_no);
    }
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = require_number(value[i], what, line_no);
    return out;
}

std::optional<ImageSize> optional_image_size(const json& obj, long line_no) {
    auto it = obj.find("image_size");
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        throw Error(ErrorKind::RecordError, "image_size must be [width, height]", line_no);
    }
    ImageSize size{(*it)[0].get<int>(), (*it)[1].get<int>()};
    if (size.width <= 0 || size.height <= 0) {
        throw Error(ErrorKind::RecordError, "image_size must be positive", line_no);
    }
    return size;
}

AnnotationRecord annotation_from_json(const json& doc, long line_no) {
    if (!doc.is_object()) throw Error(ErrorKind::RecordError, "record must be a JSON object", line_no);
    AnnotationRecord record;
    record.filename = require_string(doc, "filename", line_no);
    if (doc.contains("split")) record.split = require_string(doc, "split", line_no);
    record.image_size = optional_image_size(doc, line_no);

    const json& html = require_field(doc, "html", line_no);
    if (!html.is_object()) throw Error(ErrorKind::RecordError, "\"html\" must be an object", line_no);
    const json& structure = require_field(html, "structure", line_no);
    const json& tokens = require_field(structure, "tokens", line_no);
    if (!tokens.is_array()) {
        throw Error(ErrorKind::RecordError, "structure.tokens must be an array", line_no);
    }
    for (const auto& t : tokens) {
        if (!t.is_string()) {
            throw Error(ErrorKind::RecordError, "structure tokens must be strings", line_no);
        }
        record.structure_tokens.push_back(t.get<std::string>());
    }

    const json& cells = require_field(html, "cells", line_no);
    if (!cells.is_array()) throw Error(ErrorKind::RecordError, "cells must be an array", line_no);
    for (const auto& c : cells) {
        CellRecord cell;
        const json& ctokens = require_field(c, "tokens", line_no);
        if (!ctokens.is_array()) {
            throw Error(ErrorKind::RecordError, "cell tokens must be an array", line_no);
        }
        for (const auto& t : ctokens) {
            if (!t.is_string()) {
                throw Error(ErrorKind::RecordError, "cell tokens must be strings", line_no);
            }
            cell.tokens.push_back(t.get<std::string>());
        }
        if (c.contains("bbox") && !c["bbox"].is_null()) {
            auto q = require_quad(c["bbox"], "cell bbox", line_no);
            if (q[2] < q[0] || q[3] < q[1]) {
                throw Error(ErrorKind::RecordError, "cell bbox must satisfy x1>=x0, y1>=y0", line_no);
            }
            cell.bbox = Box::pixel(q[0], q[1], q[2], q[3]);
        }
        record.cells.push_back(std::move(cell));
    }

    int slots = count_cell_slots(record.structure_tokens);
    if (slots != static_cast<int>(record.cells.size())) {
        throw Error(ErrorKind::RecordError,
                    "structure implies " + std::to_string(slots) + " cells, record carries " +
                        std::to_string(record.cells.size()),
                    line_no);
    }
    for (std::size_t i = 0; i < record.cells.size(); ++i) {
        bool visible = has_visible_text(record.cells[i].tokens);
        if (visible && !record.cells[i].bbox) {
            throw Error(ErrorKind::RecordError,
                        "non-empty cell " + std::to_string(i) + " has no bbox", line_no);
        }
        if (!visible && record.cells[i].bbox) {
            throw Error(ErrorKind::RecordError, "empty cell " + std::to_string(i) + " has a bbox",
                        line_no);
        }
    }
    return record;
}

int anchor_count(const std::vector<int>& tokens) {
    int n = 0;
    for (int id : tokens) {
        if (Vocabulary::is_cell_anchor(id)) ++n;
    }
    return n;
}

ModelOutputRecord model_output_from_json(const json& doc, long line_no,
                                         long& long_lines_dropped) {
    if (!doc.is_object()) throw Error(ErrorKind::RecordError, "record must be a JSON object", line_no);
    ModelOutputRecord record;
    record.filename = require_string(doc, "filename", line_no);
    record.image_size = optional_image_size(doc, line_no);

    const json& structure = require_field(doc, "structure", line_no);
    const json& tokens = require_field(structure, "tokens", line_no);
    if (!tokens.is_array()) {
        throw Error(ErrorKind::RecordError, "structure.tokens must be an array", line_no);
    }
    const Vocabulary& vocab = vocabulary();
    for (const auto& t : tokens) {
        if (!t.is_string()) {
            throw Error(ErrorKind::RecordError, "structure tokens must be strings", line_no);
        }
        auto id = vocab.find(t.get<std::string>());
        if (!id) {
            throw Error(ErrorKind::UnknownToken,
                        "symbol \"" + t.get<std::string>() + "\" not in vocabulary", line_no);
        }
        record.structure.tokens.push_back(*id);
    }

    const json& boxes = require_field(structure, "boxes", line_no);
    if (!boxes.is_array()) {
        throw Error(ErrorKind::RecordError, "structure.boxes must be an array", line_no);
    }
    for (const auto& b : boxes) {
        auto q = require_quad(b, "structure box", line_no);
        if (q[2] < 0.0 || q[3] < 0.0 || q[0] < -1e-9 || q[1] < -1e-9 ||
            q[0] + q[2] > 1.0 + 1e-9 || q[1] + q[3] > 1.0 + 1e-9) {
            throw Error(ErrorKind::RecordError,
                        "structure box [x,y,w,h] must lie in the unit square", line_no);
        }
        record.structure.boxes.push_back(Box::normalized(q[0], q[1], q[2], q[3]));
    }
    int anchors = anchor_count(record.structure.tokens);
    if (anchors != static_cast<int>(record.structure.boxes.size())) {
        throw Error(ErrorKind::BoxCountMismatch,
                    std::to_string(anchors) + " anchors vs " +
                        std::to_string(record.structure.boxes.size()) + " boxes",
                    line_no);
    }

    if (doc.contains("text_lines")) {
        const json& lines = doc["text_lines"];
        if (!lines.is_array()) {
            throw Error(ErrorKind::RecordError, "text_lines must be an array", line_no);
        }
        int next_id = 0;
        for (const auto& l : lines) {
            auto q = require_quad(require_field(l, "bbox", line_no), "text line bbox", line_no);
            if (q[2] < q[0] || q[3] < q[1]) {
                throw Error(ErrorKind::RecordError, "text line bbox must satisfy x1>=x0, y1>=y0",
                            line_no);
            }
            TextLine line;
            line.box = Box::pixel(q[0], q[1], q[2], q[3]);
            line.content = require_string(l, "content", line_no);
            if (l.contains("confidence") && !l["confidence"].is_null()) {
                line.confidence = require_number(l["confidence"], "confidence", line_no);
            }
            if (utf8::length(line.content) > kMaxTextLineChars) {
                ++long_lines_dropped;
                continue;
            }
            line.id = next_id++;
            record.text_lines.push_back(std::move(line));
        }
    }
    return record;
}

} // namespace

AnnotationReader::AnnotationReader(const std::filesystem::path& path, ReadMode mode)
    : in_(path), path_(path), mode_(mode) {
    if (!in_) throw Error(ErrorKind::IoError, "cannot read " + path.string());
}

std::optional<AnnotationRecord> AnnotationReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++lines_read_;
        if (line.empty()) continue;
        try {
            return annotation_from_json(parse_line(line, lines_read_), lines_read_);
        } catch (const Error& e) {
            if (mode_ == ReadMode::Strict) {
                throw Error(ErrorKind::FileFormatError,
                            path_.string() + ":" + std::to_string(lines_read_) + ": " + e.what(),
                            lines_read_);
            }
            ++skipped_;
            if (issues_.size() < kMaxReportedIssues) issues_.push_back({lines_read_, e.what()});
        }
    }
    return std::nullopt;
}

ModelOutputReader::ModelOutputReader(const std::filesystem::path& path, ReadMode mode)
    : in_(path), path_(path), mode_(mode) {
    if (!in_) throw Error(ErrorKind::IoError, "cannot read " + path.string());
}

std::optional<ModelOutputRecord> ModelOutputReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++lines_read_;
        if (line.empty()) continue;
        try {
            return model_output_from_json(parse_line(line, lines_read_), lines_read_,
                                          long_lines_dropped_);
        } catch (const Error& e) {
            if (mode_ == ReadMode::Strict) {
                if (e.kind() == ErrorKind::UnknownToken || e.kind() == ErrorKind::BoxCountMismatch) {
                    throw;
                }
                throw Error(ErrorKind::FileFormatError,
                            path_.string() + ":" + std::to_string(lines_read_) + ": " + e.what(),
                            lines_read_);
            }
            ++skipped_;
            if (issues_.size() < kMaxReportedIssues) issues_.push_back({lines_read_, e.what()});
        }
    }
    return std::nullopt;
}

std::string record_to_html(const AnnotationRecord& record) {
    std::string out = "<table>";
    std::size_t cell_idx = 0;
    auto cell_content = [&]() -> std::string {
        if (cell_idx >= record.cells.size()) {
            throw Error(ErrorKind::StructureCellMismatch,
                        "structure implies more cells than the record carries");
        }
        std::string content;
        for (const auto& tok : record.cells[cell_idx].tokens) content += tok;
        ++cell_idx;
        return content;
    };
    for (const auto& frag : record.structure_tokens) {
        if (frag == "<td>") {
            out += "<td>";
            out += cell_content();
        } else if (frag == ">") {
            out += '>';
            out += cell_content();
        } else {
            out += frag;
        }
    }
    out += "</table>";
    if (cell_idx != record.cells.size()) {
        throw Error(ErrorKind::StructureCellMismatch,
                    "record carries " + std::to_string(record.cells.size()) + " cells, structure uses " +
                        std::to_string(cell_idx));
    }
    return out;
}

void write_annotation(std::ostream& out, const AnnotationRecord& record) {
    json cells = json::array();
    for (const auto& cell : record.cells) {
        json c;
        c["tokens"] = cell.tokens;
        if (cell.bbox) c["bbox"] = {cell.bbox->x0, cell.bbox->y0, cell.bbox->x1, cell.bbox->y1};
        cells.push_back(std::move(c));
    }
    json doc;
    doc["filename"] = record.filename;
    doc["split"] = record.split;
    doc["html"] = {{"structure", {{"tokens", record.structure_tokens}}}, {"cells", std::move(cells)}};
    if (record.image_size) doc["image_size"] = {record.image_size->width, record.image_size->height};
    out << doc.dump() << '\n';
}

void write_model_output(std::ostream& out, const ModelOutputRecord& record) {
    const Vocabulary& vocab = vocabulary();
    json tokens = json::array();
    for (int id : record.structure.tokens) tokens.push_back(vocab.symbol(id));
    json boxes = json::array();
    for (const Box& b : record.structure.boxes) {
        auto q = b.xywh();
        boxes.push_back({q[0], q[1], q[2], q[3]});
    }
    json lines = json::array();
    for (const TextLine& line : record.text_lines) {
        json l;
        l["bbox"] = {line.box.x0, line.box.y0, line.box.x1, line.box.y1};
        l["content"] = line.content;
        if (line.confidence) l["confidence"] = *line.confidence;
        lines.push_back(std::move(l));
    }
    json doc;
    doc["filename"] = record.filename;
    doc["structure"] = {{"tokens", std::move(tokens)}, {"boxes", std::move(boxes)}};
    doc["text_lines"] = std::move(lines);
    if (record.image_size) doc["image_size"] = {record.image_size->width, record.image_size->height};
    out << doc.dump() << '\n';
}

void write_prediction(std::ostream& out, std::string_view filename, std::string_view html) {
    json doc;
    doc["filename"] = std::string(filename);
    doc["html"] = std::string(html);
    out << doc.dump() << '\n';
}

std::map<std::string, std::string> read_html_by_filename(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        std::string filename, html;
        try {
            doc = parse_line(line, line_no);
            filename = require_string(doc, "filename", line_no);
            const json& h = require_field(doc, "html", line_no);
            if (h.is_string()) {
                html = h.get<std::string>();
            } else if (h.is_object()) {
                html = record_to_html(annotation_from_json(doc, line_no));
            } else {
                throw Error(ErrorKind::RecordError, "\"html\" must be a string or an object", line_no);
            }
        } catch (const Error& e) {
            throw Error(ErrorKind::FileFormatError,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        }
        if (!out.emplace(filename, std::move(html)).second) {
            throw Error(ErrorKind::DuplicateKey, "duplicate filename \"" + filename + "\" in " +
                                                     path.string(), line_no);
        }
    }
    return out;
}

std::map<std::string, ImageSize> read_size_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    std::map<std::string, ImageSize> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json doc = parse_line(line, line_no);
            std::string filename = require_string(doc, "filename", line_no);
            ImageSize size{static_cast<int>(require_number(require_field(doc, "width", line_no),
                                                           "width", line_no)),
                           static_cast<int>(require_number(require_field(doc, "height", line_no),
                                                           "height", line_no))};
            if (size.width <= 0 || size.height <= 0) {
                throw Error(ErrorKind::RecordError, "size must be positive", line_no);
            }
            if (!out.emplace(filename, size).second) {
                throw Error(ErrorKind::DuplicateKey, "duplicate filename \"" + filename + "\"",
                            line_no);
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::DuplicateKey) throw;
            throw Error(ErrorKind::FileFormatError,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    return out;
}

void SplitStats::merge(const SplitStats& other) {
    records += other.records;
    encode_failures += other.encode_failures;
    for (const auto& [bucket, count] : other.length_histogram) length_histogram[bucket] += count;
    max_length = std::max(max_length, other.max_length);
    len_lt_500 += other.len_lt_500;
    for (std::size_t i = 0; i < empty_form_counts.size(); ++i) {
        empty_form_counts[i] += other.empty_form_counts[i];
    }
    unknown_empty_forms += other.unknown_empty_forms;
    cells_total += other.cells_total;
    cells_empty += other.cells_empty;
    cells_over_100_chars += other.cells_over_100_chars;
    for (const auto& [markup, count] : other.empty_markup_counts) {
        empty_markup_counts[markup] += count;
    }
}

namespace {

std::size_t visible_text_length(const CellRecord& cell) {
    std::size_t n = 0;
    for (const auto& tok : cell.tokens) {
        if (!is_markup_token(tok)) n += utf8::length(tok);
    }
    return n;
}

void accumulate(SplitStats& stats, const AnnotationRecord& record, const EmptyFormTable& forms) {
    ++stats.records;
    try {
        EncodeOptions opts;
        opts.max_len = INT_MAX;
        opts.lenient_empty_forms = true;
        StructureSequence seq = encode_annotation(record, std::nullopt, forms, opts);
        long long len = static_cast<long long>(seq.tokens.size());
        ++stats.length_histogram[static_cast<int>(len / 50 * 50)];
        stats.max_length = std::max(stats.max_length, len);
        if (len < kDefaultMaxSequenceLen) ++stats.len_lt_500;
    } catch (const Error&) {
        ++stats.encode_failures;
    }
    for (const auto& cell : record.cells) {
        ++stats.cells_total;
        if (has_visible_text(cell.tokens)) {
            if (visible_text_length(cell) > static_cast<std::size_t>(kMaxTextLineChars)) {
                ++stats.cells_over_100_chars;
            }
            continue;
        }
        ++stats.cells_empty;
        std::string markup = "<td>";
        for (const auto& tok : cell.tokens) markup += tok;
        markup += "</td>";
        ++stats.empty_markup_counts[markup];
        if (auto form = forms.find(markup)) {
            ++stats.empty_form_counts[static_cast<std::size_t>(*form)];
        } else {
            ++stats.unknown_empty_forms;
        }
    }
}

} // namespace

StatsReport dataset_stats(const std::filesystem::path& path, const EmptyFormTable& forms,
                          const StatsOptions& opts) {
    AnnotationReader reader(path, opts.mode);
    StatsReport report;
    while (auto record = reader.next()) {
        accumulate(report.by_split[record->split], *record, forms);
    }
    report.skipped_lines = reader.skipped();
    for (const auto& [split, stats] : report.by_split) report.total.merge(stats);
    return report;
}

std::vector<std::pair<std::string, long long>> top_empty_markups(const SplitStats& stats, int k) {
    std::vector<std::pair<std::string, long long>> all(stats.empty_markup_counts.begin(),
                                                       stats.empty_markup_counts.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (static_cast<int>(all.size()) > k) all.resize(static_cast<std::size_t>(k));
    return all;
}

EmptyFormTable derive_empty_form_table(const SplitStats& stats) {
    std::vector<std::string> markups = {"<td></td>", "<td> </td>"};
    auto top = top_empty_markups(stats, EmptyFormTable::kFormCount + 2);
    for (const auto& [markup, count] : top) {
        if (static_cast<int>(markups.size()) >= EmptyFormTable::kFormCount) break;
        if (std::find(markups.begin(), markups.end(), markup) == markups.end()) {
            markups.push_back(markup);
        }
    }
    EmptyFormTable defaults = EmptyFormTable::defaults();
    for (int i = 0; static_cast<int>(markups.size()) < EmptyFormTable::kFormCount; ++i) {
        const std::string& m = defaults.markup(i);
        if (std::find(markups.begin(), markups.end(), m) == markups.end()) {
            markups.push_back(m);
        }
    }
    return EmptyFormTable::from_markups(std::move(markups));
}

namespace {

json split_to_json(const SplitStats& s, int top_k) {
    json histogram = json::object();
    for (const auto& [bucket, count] : s.length_histogram) {
        histogram[std::to_string(bucket)] = count;
    }
    json top = json::array();
    for (const auto& [markup, count] : top_empty_markups(s, top_k)) {
        top.push_back({markup, count});
    }
    double over_100_fraction =
        s.cells_total > 0 ? static_cast<double>(s.cells_over_100_chars) /
                                static_cast<double>(s.cells_total)
                          : 0.0;
    return json{{"records", s.records},
                {"encode_failures", s.encode_failures},
                {"length_histogram", std::move(histogram)},
                {"max_length", s.max_length},
                {"len_lt_500", s.len_lt_500},
                {"fraction_len_lt_500", s.fraction_len_lt_500()},
                {"empty_form_counts", s.empty_form_counts},
                {"unknown_empty_forms", s.unknown_empty_forms},
                {"form0_form1_ratio", s.form0_form1_ratio()},
                {"cells_total", s.cells_total},
                {"cells_empty", s.cells_empty},
                {"cells_over_100_chars", s.cells_over_100_chars},
                {"fraction_cells_over_100_chars", over_100_fraction},
                {"top_empty_markups", std::move(top)}};
}

} // namespace

std::string stats_report_json(const StatsReport& report, int top_k) {
    json splits = json::object();
    for (const auto& [split, stats] : report.by_split) {
        splits[split.empty() ? "(none)" : split] = split_to_json(stats, top_k);
    }
    json doc{{"total", split_to_json(report.total, top_k)},
             {"splits", std::move(splits)},
             {"skipped_lines", report.skipped_lines}};
    return doc.dump(2);
}

void print_stats_table(std::ostream& out, const StatsReport& report) {
    auto row = [&out](const std::string& split, const SplitStats& s) {
        out << std::left << std::setw(12) << (split.empty() ? "(none)" : split) << std::right
            << std::setw(10) << s.records << std::setw(12) << s.cells_total << std::setw(10)
            << s.cells_empty << std::setw(14) << std::fixed << std::setprecision(4)
            << s.fraction_len_lt_500() << std::setw(12) << std::setprecision(2)
            << s.form0_form1_ratio() << std::setw(12) << s.cells_over_100_chars << '\n';
    };
    out << std::left << std::setw(12) << "split" << std::right << std::setw(10) << "records"
        << std::setw(12) << "cells" << std::setw(10) << "empty" << std::setw(14) << "frac_len<500"
        << std::setw(12) << "form0:1" << std::setw(12) << "cells>100ch" << '\n';
    for (const auto& [split, stats] : report.by_split) row(split, stats);
    row("total", report.total);
    if (report.skipped_lines > 0) {
        out << "skipped lines: " << report.skipped_lines << '\n';
    }
}

} // namespace tabrec
