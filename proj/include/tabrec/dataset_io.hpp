#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabrec/annotation.hpp"
#include "tabrec/assignment.hpp"
#include "tabrec/vocab.hpp"

namespace tabrec {

enum class ReadMode { Lenient, Strict };

struct ReaderIssue {
    long line_no = 0;
    std::string message;
};

// Streaming reader for line-delimited annotation records:
//   {"filename", "split", "html": {"structure": {"tokens": [..]},
//    "cells": [{"tokens": [..], "bbox": [x0,y0,x1,y1]?}]}, "image_size": [w,h]?}
// Lenient mode skips malformed lines and records the issue; strict mode throws
// Error{FileFormatError} with the line number.
class AnnotationReader {
public:
    explicit AnnotationReader(const std::filesystem::path& path, ReadMode mode = ReadMode::Lenient);
    std::optional<AnnotationRecord> next();

    long lines_read() const { return lines_read_; }
    long skipped() const { return skipped_; }
    const std::vector<ReaderIssue>& issues() const { return issues_; }

private:
    std::ifstream in_;
    std::filesystem::path path_;
    ReadMode mode_;
    long lines_read_ = 0;
    long skipped_ = 0;
    std::vector<ReaderIssue> issues_;
};

struct StructurePrediction {
    std::vector<int> tokens;  // vocabulary ids
    std::vector<Box> boxes;   // normalized, one per cell anchor
    bool operator==(const StructurePrediction&) const = default;
};

// One model-output sample: predicted structure tokens with per-anchor boxes
// plus detected text lines.
struct ModelOutputRecord {
    std::string filename;
    StructurePrediction structure;
    std::vector<TextLine> text_lines;  // pixel boxes; ids are input order
    std::optional<ImageSize> image_size;
    bool operator==(const ModelOutputRecord&) const = default;
};

// Streaming reader for line-delimited model outputs:
//   {"filename", "structure": {"tokens": [..], "boxes": [[x,y,w,h]..]},
//    "text_lines": [{"bbox": [x0,y0,x1,y1], "content", "confidence"?}],
//    "image_size": [w,h]?}
// Tokens are checked against the vocabulary and box counts against the anchor
// count. Text lines longer than 100 characters are dropped and counted.
class ModelOutputReader {
public:
    explicit ModelOutputReader(const std::filesystem::path& path, ReadMode mode = ReadMode::Lenient);
    std::optional<ModelOutputRecord> next();

    long lines_read() const { return lines_read_; }
    long skipped() const { return skipped_; }
    long long_lines_dropped() const { return long_lines_dropped_; }
    const std::vector<ReaderIssue>& issues() const { return issues_; }

private:
    std::ifstream in_;
    std::filesystem::path path_;
    ReadMode mode_;
    long lines_read_ = 0;
    long skipped_ = 0;
    long long_lines_dropped_ = 0;
    std::vector<ReaderIssue> issues_;
};

inline constexpr int kMaxTextLineChars = 100;

// Ground-truth HTML by fragment concatenation: each cell's tokens are inserted
// into its td slot, wrapped in <table>..</table>.
std::string record_to_html(const AnnotationRecord& record);

void write_annotation(std::ostream& out, const AnnotationRecord& record);
void write_model_output(std::ostream& out, const ModelOutputRecord& record);
void write_prediction(std::ostream& out, std::string_view filename, std::string_view html);

// filename -> html for scoring; accepts prediction-shaped lines ("html" is a
// string) and annotation-shaped lines ("html" is an object, reconstructed via
// record_to_html). Always strict; duplicate filenames raise Error{DuplicateKey}.
std::map<std::string, std::string> read_html_by_filename(const std::filesystem::path& path);

// Sidecar image sizes: {"filename", "width", "height"} per line.
std::map<std::string, ImageSize> read_size_file(const std::filesystem::path& path);

// --- dataset statistics ---

struct SplitStats {
    long long records = 0;
    long long encode_failures = 0;
    std::map<int, long long> length_histogram;  // bucket start (width 50) -> count
    long long max_length = 0;
    long long len_lt_500 = 0;
    std::vector<long long> empty_form_counts = std::vector<long long>(EmptyFormTable::kFormCount, 0);
    long long unknown_empty_forms = 0;
    long long cells_total = 0;
    long long cells_empty = 0;
    long long cells_over_100_chars = 0;
    std::map<std::string, long long> empty_markup_counts;

    void merge(const SplitStats& other);
    double fraction_len_lt_500() const {
        long long counted = records - encode_failures;
        return counted > 0 ? static_cast<double>(len_lt_500) / static_cast<double>(counted) : 0.0;
    }
    // form0-to-form1 frequency ratio; 0 when form1 never occurs.
    double form0_form1_ratio() const {
        return empty_form_counts[1] > 0
                   ? static_cast<double>(empty_form_counts[0]) / static_cast<double>(empty_form_counts[1])
                   : 0.0;
    }
};

struct StatsReport {
    SplitStats total;
    std::map<std::string, SplitStats> by_split;
    long skipped_lines = 0;
};

struct StatsOptions {
    ReadMode mode = ReadMode::Lenient;
    int top_k = EmptyFormTable::kFormCount;
};

StatsReport dataset_stats(const std::filesystem::path& path, const EmptyFormTable& forms,
                          const StatsOptions& opts = {});

// Most frequent empty-cell markups, count-descending (markup ascending on ties).
std::vector<std::pair<std::string, long long>> top_empty_markups(const SplitStats& stats, int k);

// Builds a form table from observed markups: forms 0/1 pinned, the rest by
// frequency, padded from the defaults when the data has too few variants.
EmptyFormTable derive_empty_form_table(const SplitStats& stats);

std::string stats_report_json(const StatsReport& report, int top_k);
void print_stats_table(std::ostream& out, const StatsReport& report);

} // namespace tabrec
