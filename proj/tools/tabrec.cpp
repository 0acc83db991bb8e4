// tabrec: command-line front end for the table-recognition post-processing
// toolkit. One binary, eight subcommands:
//   encode     annotations -> structure token/box file
//   decode     token file -> skeleton HTML
//   validate   grammar check on a token file (exit 1 on fatal violations)
//   assemble   model outputs -> final HTML predictions
//   evaluate   predictions vs ground truth -> TEDS report
//   stats      dataset statistics and empty-form discovery
//   synth      generate a synthetic corpus (annotations + simulated outputs)
//   sweep      degradation grid over jitter/drop, TSV output
// Machine-readable output goes to --out (default stdout); logs go to stderr.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabrec/dataset_io.hpp"
#include "tabrec/pipeline.hpp"
#include "tabrec/sequence.hpp"
#include "tabrec/synth.hpp"
#include "tabrec/teds.hpp"

using namespace tabrec;
using nlohmann::json;

namespace {

bool g_quiet = false;

void log_info(const std::string& message) {
    if (!g_quiet) std::cerr << "[tabrec] " << message << '\n';
}

void log_warn(const std::string& message) { std::cerr << "[tabrec] warning: " << message << '\n'; }

// "-" selects stdout.
struct Output {
    explicit Output(const std::string& path) {
        if (path != "-") {
            file.emplace(path);
            if (!*file) throw Error(ErrorKind::IoError, "cannot write " + path);
        }
    }
    std::ostream& stream() { return file ? *file : std::cout; }
    std::optional<std::ofstream> file;
};

struct RangeFlag {
    IntRange value;
};

// "LO:HI" or a single integer
IntRange parse_range(const std::string& text) {
    auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            int v = std::stoi(text);
            return {v, v};
        }
        return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("expected INT or LO:HI, got \"" + text + "\"");
    }
}

EmptyFormTable load_forms(const std::string& path) {
    if (path.empty()) return EmptyFormTable::defaults();
    return EmptyFormTable::load(path);
}

void apply_sizes(ModelOutputRecord& record, const std::map<std::string, ImageSize>& sizes) {
    if (record.image_size || sizes.empty()) return;
    auto it = sizes.find(record.filename);
    if (it != sizes.end()) record.image_size = it->second;
}

std::string fallback_html() { return "<table><thead></thead><tbody></tbody></table>"; }

// --- subcommand options ---

struct SynthFlags {
    std::string rows = "1:6";
    std::string cols = "1:6";
    double span_prob = 0.10;
    double empty_prob = 0.15;
    double multiline_prob = 0.20;
    std::string cell_width = "60:160";
    std::string cell_height = "28:64";
    int padding = 6;
    double jitter = 0.0;
    double drop = 0.0;
    std::uint64_t seed = 0;

    SynthParams params() const {
        SynthParams p;
        p.seed = seed;
        p.rows = parse_range(rows);
        p.cols = parse_range(cols);
        p.span_prob = span_prob;
        p.empty_prob = empty_prob;
        p.multiline_prob = multiline_prob;
        p.cell_width = parse_range(cell_width);
        p.cell_height = parse_range(cell_height);
        p.padding = padding;
        p.jitter_sigma = jitter;
        p.drop_prob = drop;
        return p;
    }
};

void add_synth_flags(CLI::App* cmd, SynthFlags& flags) {
    cmd->add_option("--rows", flags.rows, "row count range LO:HI")->capture_default_str();
    cmd->add_option("--cols", flags.cols, "column count range LO:HI")->capture_default_str();
    cmd->add_option("--span-prob", flags.span_prob, "probability a cell becomes a span cell")
        ->capture_default_str();
    cmd->add_option("--empty-prob", flags.empty_prob, "probability a cell is empty")
        ->capture_default_str();
    cmd->add_option("--multiline-prob", flags.multiline_prob,
                    "probability a cell gets multiple text lines")
        ->capture_default_str();
    cmd->add_option("--cell-width", flags.cell_width, "column width range in px")
        ->capture_default_str();
    cmd->add_option("--cell-height", flags.cell_height, "row height range in px")
        ->capture_default_str();
    cmd->add_option("--padding", flags.padding, "cell padding in px")->capture_default_str();
    cmd->add_option("--jitter", flags.jitter, "box jitter sigma in px")->capture_default_str();
    cmd->add_option("--drop", flags.drop, "text line drop probability")->capture_default_str();
    cmd->add_option("--seed", flags.seed, "base seed")->capture_default_str();
}

int run_encode(const std::string& annotations, const std::string& out_path,
               const std::string& sizes_path, const std::string& forms_path, bool strict,
               int max_len) {
    EmptyFormTable forms = load_forms(forms_path);
    std::map<std::string, ImageSize> sizes;
    if (!sizes_path.empty()) sizes = read_size_file(sizes_path);

    AnnotationReader reader(annotations, strict ? ReadMode::Strict : ReadMode::Lenient);
    Output out(out_path);
    long written = 0, failed = 0;
    EncodeStats encode_stats;
    while (auto record = reader.next()) {
        if (!record->image_size) {
            auto it = sizes.find(record->filename);
            if (it != sizes.end()) record->image_size = it->second;
        }
        EncodeOptions opts;
        opts.max_len = max_len;
        opts.lenient_empty_forms = !strict;
        ModelOutputRecord encoded;
        try {
            StructureSequence seq =
                encode_annotation(*record, record->image_size, forms, opts, &encode_stats);
            encoded.filename = record->filename;
            encoded.image_size = record->image_size;
            encoded.structure.tokens = seq.tokens;
            for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
                if (!Vocabulary::is_cell_anchor(seq.tokens[i])) continue;
                encoded.structure.boxes.push_back(
                    seq.boxes[i].value_or(Box::normalized(0, 0, 0, 0)));
            }
        } catch (const Error& e) {
            if (strict) throw;
            ++failed;
            log_warn(record->filename + ": " + e.what());
            continue;
        }
        write_model_output(out.stream(), encoded);
        ++written;
    }
    if (reader.skipped() > 0) log_warn(std::to_string(reader.skipped()) + " malformed lines skipped");
    if (encode_stats.unknown_empty_forms > 0) {
        log_warn(std::to_string(encode_stats.unknown_empty_forms) +
                 " unknown empty-cell markups mapped to form 0");
    }
    log_info(std::to_string(written) + " records encoded, " + std::to_string(failed) + " failed");
    return 0;
}

int run_decode(const std::string& inputs, const std::string& out_path,
               const std::string& forms_path, bool strict) {
    EmptyFormTable forms = load_forms(forms_path);
    ModelOutputReader reader(inputs, strict ? ReadMode::Strict : ReadMode::Lenient);
    Output out(out_path);
    long written = 0;
    while (auto record = reader.next()) {
        try {
            StructureSequence seq;
            seq.tokens = record->structure.tokens;
            Skeleton skeleton = decode_to_skeleton(seq);
            AssembleOptions opts;
            opts.format_correction = false;
            std::string html =
                assemble(skeleton.tree, skeleton.anchors, Assignment{}, {}, forms, opts);
            write_prediction(out.stream(), record->filename, html);
            ++written;
        } catch (const Error& e) {
            if (strict) throw;
            log_warn(record->filename + ": " + e.what());
        }
    }
    if (reader.skipped() > 0) log_warn(std::to_string(reader.skipped()) + " malformed lines skipped");
    log_info(std::to_string(written) + " skeletons decoded");
    return 0;
}

int run_validate(const std::string& inputs, const std::string& out_path) {
    ModelOutputReader reader(inputs, ReadMode::Lenient);
    Output out(out_path);
    long fatal = 0, with_violations = 0, records = 0;
    while (auto record = reader.next()) {
        ++records;
        auto violations = validate_sequence(record->structure.tokens);
        if (!violations.empty()) ++with_violations;
        for (const auto& v : violations) {
            if (v.severity == Severity::Fatal) ++fatal;
            json line{{"filename", record->filename},
                      {"position", v.position},
                      {"severity", v.severity == Severity::Fatal ? "fatal" : "warning"},
                      {"kind", to_string(v.kind)},
                      {"message", v.message}};
            out.stream() << line.dump() << '\n';
        }
    }
    if (reader.skipped() > 0) {
        log_warn(std::to_string(reader.skipped()) + " malformed lines skipped");
        fatal += reader.skipped();
    }
    log_info(std::to_string(records) + " records checked, " + std::to_string(with_violations) +
             " with violations, " + std::to_string(fatal) + " fatal");
    return fatal > 0 ? 1 : 0;
}

int run_assemble(const std::string& outputs, const std::string& out_path,
                 const std::string& forms_path, const std::string& sizes_path, bool strict,
                 const PipelineOptions& pipeline_opts) {
    EmptyFormTable forms = load_forms(forms_path);
    std::map<std::string, ImageSize> sizes;
    if (!sizes_path.empty()) sizes = read_size_file(sizes_path);

    ModelOutputReader reader(outputs, strict ? ReadMode::Strict : ReadMode::Lenient);
    Output out(out_path);
    long written = 0, failed = 0;
    while (auto record = reader.next()) {
        apply_sizes(*record, sizes);
        try {
            PipelineResult result = run_pipeline(*record, forms, pipeline_opts);
            write_prediction(out.stream(), record->filename, result.html);
        } catch (const Error& e) {
            if (strict) throw;
            ++failed;
            log_warn(record->filename + ": " + e.what() + " (emitting empty table)");
            write_prediction(out.stream(), record->filename, fallback_html());
        }
        ++written;
    }
    if (reader.skipped() > 0) log_warn(std::to_string(reader.skipped()) + " malformed lines skipped");
    if (reader.long_lines_dropped() > 0) {
        log_warn(std::to_string(reader.long_lines_dropped()) + " over-long text lines dropped");
    }
    log_info(std::to_string(written) + " tables assembled, " + std::to_string(failed) +
             " fell back to an empty table");
    return 0;
}

int run_evaluate(const std::string& pred, const std::string& gt, const std::string& out_path,
                 bool struct_only, int jobs) {
    BatchResult result = batch_evaluate(pred, gt, jobs, struct_only);
    json per_sample = json::array();
    for (const auto& s : result.per_sample) {
        json entry{{"filename", s.filename}, {"score", round_score(s.score)}};
        if (!s.note.empty()) entry["note"] = s.note;
        per_sample.push_back(std::move(entry));
    }
    json report{{"mean", round_score(result.mean)},
                {"n", result.n},
                {"struct_only", struct_only},
                {"per_sample", std::move(per_sample)}};
    if (result.pred_extra > 0) report["pred_extra"] = result.pred_extra;
    Output out(out_path);
    out.stream() << report.dump(2) << '\n';
    log_info("mean TEDS " + std::to_string(result.mean) + " over " + std::to_string(result.n) +
             " samples");
    return 0;
}

int run_stats(const std::string& mode, const std::string& annotations, const std::string& forms_path,
              const std::string& report_path, const std::string& out_path,
              const std::string& vocab_path, bool strict, int top_k) {
    EmptyFormTable forms = load_forms(forms_path);
    if (!vocab_path.empty()) {
        vocabulary().export_plaintext(vocab_path);
        log_info("vocabulary written to " + vocab_path);
        if (annotations.empty()) return 0;
    }
    if (annotations.empty()) throw CLI::ValidationError("--annotations is required");

    StatsOptions opts;
    opts.mode = strict ? ReadMode::Strict : ReadMode::Lenient;
    opts.top_k = top_k;
    StatsReport report = dataset_stats(annotations, forms, opts);

    if (mode == "empty-forms") {
        if (out_path.empty() || out_path == "-") {
            throw CLI::ValidationError("stats empty-forms needs --out FILE");
        }
        EmptyFormTable derived = derive_empty_form_table(report.total);
        derived.save(out_path);
        log_info("empty-form table written to " + out_path);
        return 0;
    }

    print_stats_table(std::cout, report);
    if (!report_path.empty()) {
        Output out(report_path);
        out.stream() << stats_report_json(report, top_k) << '\n';
        log_info("JSON report written to " + report_path);
    }
    return 0;
}

int run_synth(const SynthFlags& flags, int count, const std::string& annotations_out,
              const std::string& outputs_out, const std::string& forms_path) {
    if (annotations_out == "-" && outputs_out == "-") {
        throw CLI::ValidationError("annotations and outputs cannot both go to stdout");
    }
    EmptyFormTable forms = load_forms(forms_path);
    SynthParams base = flags.params();
    Output annotations(annotations_out);
    Output outputs(outputs_out);
    for (int i = 0; i < count; ++i) {
        SynthParams params = base;
        params.seed = base.seed + static_cast<std::uint64_t>(i);
        auto [record, layout] = generate_table(params, forms);
        ModelOutputRecord simulated = simulate_outputs(record, layout, params, forms);
        write_annotation(annotations.stream(), record);
        write_model_output(outputs.stream(), simulated);
    }
    log_info(std::to_string(count) + " samples generated (seed base " + std::to_string(base.seed) +
             ")");
    return 0;
}

int run_sweep(const SynthFlags& flags, const std::vector<double>& jitters,
              const std::vector<double>& drops, int seeds, int jobs, const std::string& out_path,
              const std::string& forms_path) {
    EmptyFormTable forms = load_forms(forms_path);
    auto points = degradation_sweep(flags.params(), jitters, drops, seeds, jobs, forms);
    Output out(out_path);
    write_sweep_tsv(out.stream(), points);
    log_info(std::to_string(points.size()) + " grid points, " + std::to_string(seeds) +
             " seeds each");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"table recognition post-processing toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "config file with long-option defaults")->envname("TABREC_CONFIG");
    app.add_flag("--quiet,-q", g_quiet, "suppress informational logs");
    app.set_version_flag("--version", "tabrec 1.0.0");

    std::string forms_path;
    app.add_option("--empty-form-table", forms_path, "empty-form table JSON (defaults built in)")
        ->envname("TABREC_EMPTY_FORMS");

    // encode
    auto* encode_cmd = app.add_subcommand("encode", "annotations -> structure token/box file");
    std::string enc_annotations, enc_out = "-", enc_sizes;
    bool enc_strict = false;
    int enc_max_len = kDefaultMaxSequenceLen;
    encode_cmd->add_option("--annotations", enc_annotations, "annotation JSONL")->required();
    encode_cmd->add_option("--out", enc_out, "output path or -")->capture_default_str();
    encode_cmd->add_option("--sizes", enc_sizes, "sidecar image-size JSONL");
    encode_cmd->add_option("--max-len", enc_max_len, "maximum sequence length")
        ->capture_default_str();
    encode_cmd->add_flag("--strict", enc_strict, "abort on the first malformed record");

    // decode
    auto* decode_cmd = app.add_subcommand("decode", "token file -> skeleton HTML");
    std::string dec_inputs, dec_out = "-";
    bool dec_strict = false;
    decode_cmd->add_option("--inputs", dec_inputs, "token/box JSONL")->required();
    decode_cmd->add_option("--out", dec_out, "output path or -")->capture_default_str();
    decode_cmd->add_flag("--strict", dec_strict, "abort on the first malformed record");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "grammar check on a token file");
    std::string val_inputs, val_out = "-";
    validate_cmd->add_option("--inputs", val_inputs, "token/box JSONL")->required();
    validate_cmd->add_option("--out", val_out, "violation listing path or -")->capture_default_str();

    // assemble
    auto* assemble_cmd = app.add_subcommand("assemble", "model outputs -> HTML predictions");
    std::string asm_outputs, asm_out = "-", asm_sizes;
    bool asm_strict = false;
    PipelineOptions asm_opts;
    bool asm_no_distance = false;
    assemble_cmd->add_option("--outputs", asm_outputs, "model output JSONL")->required();
    assemble_cmd->add_option("--out", asm_out, "prediction path or -")->capture_default_str();
    assemble_cmd->add_option("--sizes", asm_sizes, "sidecar image-size JSONL");
    assemble_cmd->add_option("--iou-floor", asm_opts.assign.iou_floor,
                             "IOU matches must be strictly above this")
        ->capture_default_str();
    assemble_cmd->add_flag("--no-distance-rule", asm_no_distance, "disable the distance stage");
    assemble_cmd->add_flag("--format-correction,!--no-format-correction",
                           asm_opts.assemble.format_correction,
                           "bold-wrap visible thead content (default on)");
    assemble_cmd->add_flag("--strict", asm_strict, "abort on the first malformed record");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against ground truth");
    std::string eval_pred, eval_gt, eval_out = "-";
    bool eval_struct_only = false;
    int eval_jobs = 1;
    evaluate_cmd->add_option("--pred", eval_pred, "prediction JSONL {filename, html}")->required();
    evaluate_cmd->add_option("--gt", eval_gt, "ground truth JSONL (predictions or annotations)")
        ->required();
    evaluate_cmd->add_option("--out", eval_out, "report path or -")->capture_default_str();
    evaluate_cmd->add_flag("--struct-only", eval_struct_only, "ignore cell content in the score");
    evaluate_cmd->add_option("--jobs", eval_jobs, "scoring threads")->capture_default_str();

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "dataset statistics and empty-form discovery");
    std::string stats_mode = "report", stats_annotations, stats_report_path, stats_out,
                stats_vocab;
    bool stats_strict = false;
    int stats_top_k = EmptyFormTable::kFormCount;
    stats_cmd->add_option("mode", stats_mode, "report | empty-forms")
        ->check(CLI::IsMember({"report", "empty-forms"}))
        ->capture_default_str();
    stats_cmd->add_option("--annotations", stats_annotations, "annotation JSONL");
    stats_cmd->add_option("--report", stats_report_path, "write the JSON report here");
    stats_cmd->add_option("--out", stats_out, "output file for empty-forms mode");
    stats_cmd->add_option("--top-k", stats_top_k, "markup variants to report")
        ->capture_default_str();
    stats_cmd->add_option("--export-vocab", stats_vocab, "write the token alphabet, one per line");
    stats_cmd->add_flag("--strict", stats_strict, "abort on the first malformed record");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    SynthFlags synth_flags;
    int synth_n = 100;
    std::string synth_annotations = "-", synth_outputs;
    add_synth_flags(synth_cmd, synth_flags);
    synth_cmd->add_option("--n", synth_n, "number of samples")->capture_default_str();
    synth_cmd->add_option("--annotations-out", synth_annotations, "annotation JSONL path or -")
        ->capture_default_str();
    synth_cmd->add_option("--outputs-out", synth_outputs, "simulated model output JSONL path")
        ->required();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "degradation grid over jitter and drop");
    SynthFlags sweep_flags;
    std::vector<double> sweep_jitters = {0.0, 2.0, 4.0, 8.0};
    std::vector<double> sweep_drops = {0.0, 0.1, 0.25, 0.5};
    int sweep_seeds = 100, sweep_jobs = 1;
    std::string sweep_out = "-";
    add_synth_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--jitter-grid", sweep_jitters, "jitter sigmas")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--drop-grid", sweep_drops, "drop probabilities")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per grid point")->capture_default_str();
    sweep_cmd->add_option("--jobs", sweep_jobs, "worker threads")->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "TSV path or -")->capture_default_str();

    // global flags (--quiet, --empty-form-table, --config) are accepted after
    // the subcommand name too
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (*encode_cmd) {
            return run_encode(enc_annotations, enc_out, enc_sizes, forms_path, enc_strict,
                              enc_max_len);
        }
        if (*decode_cmd) return run_decode(dec_inputs, dec_out, forms_path, dec_strict);
        if (*validate_cmd) return run_validate(val_inputs, val_out);
        if (*assemble_cmd) {
            asm_opts.assign.distance_enabled = !asm_no_distance;
            return run_assemble(asm_outputs, asm_out, forms_path, asm_sizes, asm_strict, asm_opts);
        }
        if (*evaluate_cmd) {
            return run_evaluate(eval_pred, eval_gt, eval_out, eval_struct_only, eval_jobs);
        }
        if (*stats_cmd) {
            return run_stats(stats_mode, stats_annotations, forms_path, stats_report_path,
                             stats_out, stats_vocab, stats_strict, stats_top_k);
        }
        if (*synth_cmd) {
            return run_synth(synth_flags, synth_n, synth_annotations, synth_outputs, forms_path);
        }
        if (*sweep_cmd) {
            return run_sweep(sweep_flags, sweep_jitters, sweep_drops, sweep_seeds, sweep_jobs,
                             sweep_out, forms_path);
        }
    } catch (const CLI::Error& e) {
        std::cerr << "[tabrec] " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "[tabrec] error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "[tabrec] error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
