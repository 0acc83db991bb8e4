// Benchmark harness: batch TEDS scoring at several thread counts against the
// serial run (results must match bit for bit), and the production assignment
// against its quadratic reference implementation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tabrec/assignment.hpp"
#include "tabrec/dataset_io.hpp"
#include "tabrec/synth.hpp"
#include "tabrec/teds.hpp"

using namespace tabrec;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

int main(int argc, char** argv) {
    int n_samples = argc > 1 ? std::atoi(argv[1]) : 400;
    std::printf("corpus: %d synthetic samples\n", n_samples);

    SynthParams params;
    params.rows = {4, 10};
    params.cols = {4, 8};
    params.span_prob = 0.15;
    params.empty_prob = 0.15;
    params.multiline_prob = 0.3;
    params.jitter_sigma = 3.0;
    params.drop_prob = 0.1;

    fs::path dir = fs::temp_directory_path() / "tabrec_bench";
    fs::create_directories(dir);
    fs::path gt_path = dir / "gt.jsonl";
    fs::path pred_path = dir / "pred.jsonl";

    std::vector<ModelOutputRecord> outputs;
    {
        std::ofstream gt_out(gt_path), pred_out(pred_path);
        for (int i = 0; i < n_samples; ++i) {
            params.seed = static_cast<std::uint64_t>(i);
            auto [record, layout] = generate_table(params);
            ModelOutputRecord out = simulate_outputs(record, layout, params);
            outputs.push_back(out);
            write_annotation(gt_out, record);
            PipelineResult piped = run_pipeline(out, default_empty_forms());
            write_prediction(pred_out, record.filename, piped.html);
        }
    }

    std::printf("\nbatch TEDS scoring (%d samples)\n", n_samples);
    auto start = std::chrono::steady_clock::now();
    BatchResult serial = batch_evaluate(pred_path, gt_path, 1);
    double serial_time = seconds_since(start);
    std::printf("  jobs=1   %7.3fs   mean=%.6f   (reference)\n", serial_time, serial.mean);

#ifdef _OPENMP
    int max_threads = omp_get_max_threads();
#else
    int max_threads = 1;
#endif
    for (int jobs : {2, 4, max_threads}) {
        if (jobs <= 1 || (jobs == max_threads && (max_threads == 2 || max_threads == 4))) continue;
        start = std::chrono::steady_clock::now();
        BatchResult parallel = batch_evaluate(pred_path, gt_path, jobs);
        double elapsed = seconds_since(start);
        bool identical = parallel.mean == serial.mean && parallel.n == serial.n;
        for (std::size_t i = 0; identical && i < parallel.per_sample.size(); ++i) {
            identical = parallel.per_sample[i].score == serial.per_sample[i].score;
        }
        std::printf("  jobs=%-3d %7.3fs   mean=%.6f   speedup=%.2fx   bit-identical=%s\n", jobs,
                    elapsed, parallel.mean, serial_time / elapsed, identical ? "yes" : "NO");
        if (!identical) {
            std::fprintf(stderr, "parallel run diverged from the serial reference\n");
            return 1;
        }
    }

    std::printf("\nassignment vs quadratic reference (%zu instances)\n", outputs.size());
    std::vector<Skeleton> skeletons;
    std::vector<std::vector<TextLine>> line_sets;
    for (const auto& out : outputs) {
        StructureSequence seq;
        seq.tokens = out.structure.tokens;
        Skeleton skeleton = decode_to_skeleton(seq);
        for (std::size_t i = 0; i < skeleton.anchors.size(); ++i) {
            skeleton.anchors[i].box = out.structure.boxes[i];
        }
        std::vector<TextLine> lines = out.text_lines;
        for (auto& line : lines) line.box = convert(line.box, *out.image_size, BoxForm::Normalized);
        skeletons.push_back(std::move(skeleton));
        line_sets.push_back(std::move(lines));
    }

    start = std::chrono::steady_clock::now();
    long long matched_fast = 0;
    for (std::size_t i = 0; i < skeletons.size(); ++i) {
        Assignment a = assign(skeletons[i].anchors, line_sets[i]);
        for (const auto& [ordinal, matches] : a.per_cell) matched_fast += matches.size();
    }
    double fast_time = seconds_since(start);

    start = std::chrono::steady_clock::now();
    long long matched_ref = 0;
    for (std::size_t i = 0; i < skeletons.size(); ++i) {
        Assignment a = assign_oracle(skeletons[i].anchors, line_sets[i]);
        for (const auto& [ordinal, matches] : a.per_cell) matched_ref += matches.size();
    }
    double ref_time = seconds_since(start);

    std::printf("  assign          %7.3fs   (%lld matches)\n", fast_time, matched_fast);
    std::printf("  assign_oracle   %7.3fs   (%lld matches)   ratio=%.2fx\n", ref_time, matched_ref,
                ref_time / fast_time);
    if (matched_fast != matched_ref) {
        std::fprintf(stderr, "assignment diverged from the reference\n");
        return 1;
    }

    fs::remove_all(dir);
    return 0;
}
