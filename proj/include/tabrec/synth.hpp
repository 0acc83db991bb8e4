#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "tabrec/annotation.hpp"
#include "tabrec/dataset_io.hpp"
#include "tabrec/pipeline.hpp"

namespace tabrec {

struct IntRange {
    int lo = 0;
    int hi = 0;
    bool operator==(const IntRange&) const = default;
};

// All probabilities in [0,1]; sizes in pixels. Everything downstream of `seed`
// is deterministic.
struct SynthParams {
    std::uint64_t seed = 0;
    IntRange rows{1, 6};
    IntRange cols{1, 6};
    double span_prob = 0.10;
    double empty_prob = 0.15;
    double multiline_prob = 0.20;
    IntRange cell_width{60, 160};
    IntRange cell_height{28, 64};
    int padding = 6;          // grid line to content, so adjacent content boxes are >= 2*padding apart
    double jitter_sigma = 0;  // box translation noise, truncated at 3 sigma
    double drop_prob = 0;     // per-line detector miss probability
};

struct LineLayout {
    Box box;  // pixel
    std::string content;
};

struct CellLayout {
    Box cell_box;  // pixel; text extent for non-empty cells, padded grid rect for empty ones
    std::vector<LineLayout> lines;
};

// Pixel ground truth behind a generated record, indexed by cell ordinal.
struct Layout {
    ImageSize image;
    std::vector<CellLayout> cells;
};

// Deterministic synthetic table with known pixel layout. The record satisfies
// every annotation invariant and its encoded sequence is grammar-clean.
// Throws Error{InfeasibleParams} for out-of-range parameters.
std::pair<AnnotationRecord, Layout> generate_table(const SynthParams& params,
                                                   const EmptyFormTable& forms = default_empty_forms());

// Emulates model outputs for a generated table: ground-truth tokens, anchor
// boxes and text lines with truncated-gaussian translation jitter, lines
// dropped independently with drop_prob, contents copied verbatim.
ModelOutputRecord simulate_outputs(const AnnotationRecord& record, const Layout& layout,
                                   const SynthParams& params,
                                   const EmptyFormTable& forms = default_empty_forms());

struct SweepPoint {
    double jitter_sigma = 0;
    double drop_prob = 0;
    int seeds = 0;
    double mean_teds = 0;
    long long matches_center = 0;
    long long matches_iou = 0;
    long long matches_distance = 0;
    long long unassigned = 0;
    double center_share() const;
    double iou_share() const;
    double distance_share() const;
};

// Full pipeline per grid point over `seeds_per_point` consecutive seeds,
// scoring assembled HTML against the record's own ground truth. Seeds are
// shared across grid points, and per-seed results are reduced in seed order,
// so the output is identical at any `jobs` count.
std::vector<SweepPoint> degradation_sweep(const SynthParams& base, std::span<const double> jitters,
                                          std::span<const double> drops, int seeds_per_point,
                                          int jobs = 1,
                                          const EmptyFormTable& forms = default_empty_forms());

// One grid point per line, tab-separated, with a header row.
void write_sweep_tsv(std::ostream& out, std::span<const SweepPoint> points);

// Small deterministic generator used by the harness (splitmix64 core with
// explicit uniform/normal transforms, so streams are stable across platforms).
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double uniform();                  // [0, 1)
    int uniform_int(int lo, int hi);   // inclusive
    bool bernoulli(double p) { return uniform() < p; }
    double normal(double sigma);       // Box-Muller
    double truncated_normal(double sigma, double max_abs);

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0;
};

} // namespace tabrec
