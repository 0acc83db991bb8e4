#include "tabrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tabrec/sequence.hpp"
#include "tabrec/teds.hpp"

namespace tabrec {

std::uint64_t SynthRng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double SynthRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int SynthRng::uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    int span = hi - lo + 1;
    int v = lo + static_cast<int>(uniform() * span);
    return std::min(v, hi);
}

double SynthRng::normal(double sigma) {
    if (has_cached_) {
        has_cached_ = false;
        return cached_ * sigma;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle) * sigma;
}

double SynthRng::truncated_normal(double sigma, double max_abs) {
    return std::clamp(normal(sigma), -max_abs, max_abs);
}

namespace {

constexpr std::uint64_t kSimulateSalt = 0x5344'4C52'0BAD'C0DEull;
constexpr int kMarginPx = 10;
constexpr int kLineGapPx = 4;
constexpr int kMinLineHeightPx = 8;
constexpr int kMaxLineHeightPx = 16;
constexpr int kCharWidthPx = 8;

const std::vector<std::string>& word_list() {
    static const std::vector<std::string> words = {
        "group",   "control", "baseline", "mean",    "median",  "total",    "ratio",   "rate",
        "score",   "value",   "range",    "error",   "count",   "subjects", "patients", "dose",
        "weight",  "age",     "male",     "female",  "yes",     "no",       "n.s.",    "0.05",
        "0.001",   "12.5",    "3.14",     "127",     "95%",     "48.2",     "1.08",    "2.4",
        "7.1",     "0.92",    "study",    "trial",   "phase",   "method",   "result",  "sample",
        "average", "maximum", "minimum",  "overall", "subset",  "cohort",   "index",   "level",
    };
    return words;
}

void validate(const SynthParams& p) {
    auto fail = [](const std::string& what) {
        throw Error(ErrorKind::InfeasibleParams, what);
    };
    auto check_range = [&](IntRange r, int min_lo, const char* name) {
        if (r.lo < min_lo || r.hi < r.lo) {
            fail(std::string(name) + " range [" + std::to_string(r.lo) + "," + std::to_string(r.hi) +
                 "] is infeasible");
        }
    };
    check_range(p.rows, 1, "rows");
    check_range(p.cols, 1, "cols");
    if (p.rows.hi > 1024 || p.cols.hi > 1024) fail("grids beyond 1024x1024 are not supported");
    if (p.padding < 1) fail("padding must be >= 1");
    check_range(p.cell_width, 2 * p.padding + kCharWidthPx * 2 + 6, "cell_width");
    check_range(p.cell_height, 2 * p.padding + kMinLineHeightPx, "cell_height");
    for (double prob : {p.span_prob, p.empty_prob, p.multiline_prob, p.drop_prob}) {
        if (prob < 0.0 || prob > 1.0) fail("probabilities must lie in [0,1]");
    }
    if (p.jitter_sigma < 0.0) fail("jitter_sigma must be >= 0");
}

// Empty-form draw: form0 and form1 kept at a 4:1 frequency ratio, the
// remaining mass spread over the other nine forms.
int pick_empty_form(SynthRng& rng) {
    double u = rng.uniform();
    if (u < 0.64) return 0;
    if (u < 0.80) return 1;
    int other = static_cast<int>((u - 0.80) / 0.20 * 9.0);
    return 2 + std::min(other, 8);
}

struct GridCell {
    int row = 0;
    int col = 0;
    int colspan = 1;
    int rowspan = 1;
};

std::string span_attr(const char* name, int value) {
    return std::string(" ") + name + "=\"" + std::to_string(value) + "\"";
}

} // namespace

std::pair<AnnotationRecord, Layout> generate_table(const SynthParams& params,
                                                   const EmptyFormTable& forms) {
    validate(params);
    SynthRng rng(params.seed);

    int rows = rng.uniform_int(params.rows.lo, params.rows.hi);
    int cols = rng.uniform_int(params.cols.lo, params.cols.hi);
    int header_rows = rows >= 2 ? 1 : 0;

    std::vector<int> col_w(static_cast<std::size_t>(cols));
    std::vector<int> row_h(static_cast<std::size_t>(rows));
    for (int& w : col_w) w = rng.uniform_int(params.cell_width.lo, params.cell_width.hi);
    for (int& h : row_h) h = rng.uniform_int(params.cell_height.lo, params.cell_height.hi);

    std::vector<double> x_edge(static_cast<std::size_t>(cols) + 1, kMarginPx);
    std::vector<double> y_edge(static_cast<std::size_t>(rows) + 1, kMarginPx);
    for (int c = 0; c < cols; ++c) x_edge[c + 1] = x_edge[c] + col_w[c];
    for (int r = 0; r < rows; ++r) y_edge[r + 1] = y_edge[r] + row_h[r];

    Layout layout;
    layout.image = {static_cast<int>(x_edge[cols]) + kMarginPx,
                    static_cast<int>(y_edge[rows]) + kMarginPx};

    // occupancy walk, row-major; spans mark the cells they cover
    std::vector<int> owner(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), -1);
    auto owned = [&](int r, int c) -> int& {
        return owner[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                     static_cast<std::size_t>(c)];
    };
    std::vector<GridCell> grid_cells;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (owned(r, c) >= 0) continue;
            GridCell cell{r, c, 1, 1};
            if (rng.bernoulli(params.span_prob)) {
                int max_cs = 0;
                while (c + max_cs < cols && max_cs < Vocabulary::kMaxSpan &&
                       owned(r, c + max_cs) < 0) {
                    ++max_cs;
                }
                int section_end = r < header_rows ? header_rows : rows;
                int max_rs = std::min(Vocabulary::kMaxSpan, section_end - r);
                double u = rng.uniform();
                bool want_col = u < 0.50 || u >= 0.85;
                bool want_row = u >= 0.50;
                if (want_col && max_cs >= 2) cell.colspan = rng.uniform_int(2, max_cs);
                if (want_row && max_rs >= 2) cell.rowspan = rng.uniform_int(2, max_rs);
            }
            int ordinal = static_cast<int>(grid_cells.size());
            for (int rr = r; rr < r + cell.rowspan; ++rr) {
                for (int cc = c; cc < c + cell.colspan; ++cc) owned(rr, cc) = ordinal;
            }
            grid_cells.push_back(cell);
        }
    }

    AnnotationRecord record;
    {
        std::ostringstream name;
        name << "synth_" << params.seed << ".png";
        record.filename = name.str();
    }
    record.split = "synth";
    record.image_size = layout.image;

    auto& frags = record.structure_tokens;
    layout.cells.resize(grid_cells.size());
    record.cells.resize(grid_cells.size());

    auto emit_cell = [&](const GridCell& cell, int ordinal) {
        bool in_thead = cell.row < header_rows;
        if (cell.colspan > 1 || cell.rowspan > 1) {
            frags.push_back("<td");
            if (cell.colspan > 1) frags.push_back(span_attr("colspan", cell.colspan));
            if (cell.rowspan > 1) frags.push_back(span_attr("rowspan", cell.rowspan));
            frags.push_back(">");
            frags.push_back("</td>");
        } else {
            frags.push_back("<td>");
            frags.push_back("</td>");
        }

        CellRecord& rec_cell = record.cells[static_cast<std::size_t>(ordinal)];
        CellLayout& cell_layout = layout.cells[static_cast<std::size_t>(ordinal)];

        double inner_x0 = x_edge[cell.col] + params.padding;
        double inner_y0 = y_edge[cell.row] + params.padding;
        double inner_x1 = x_edge[cell.col + cell.colspan] - params.padding;
        double inner_y1 = y_edge[cell.row + cell.rowspan] - params.padding;
        double inner_w = inner_x1 - inner_x0;
        double inner_h = inner_y1 - inner_y0;

        if (rng.bernoulli(params.empty_prob)) {
            // Plain empty cells carry one of the configured markup forms. Span
            // cells stay token-less: they keep the fragment encoding, so their
            // reconstructed td has no content to round-trip.
            bool is_span = cell.colspan > 1 || cell.rowspan > 1;
            if (!is_span) {
                int form = pick_empty_form(rng);
                rec_cell.tokens = tokenize_cell_markup(forms.inner(form));
            }
            cell_layout.cell_box = Box::pixel(inner_x0, inner_y0, inner_x1, inner_y1);
            return;
        }

        int n_lines = 1;
        if (rng.bernoulli(params.multiline_prob)) n_lines = rng.uniform_int(2, 3);
        int max_lines = std::max(
            1, static_cast<int>((inner_h + kLineGapPx) / (kMinLineHeightPx + kLineGapPx)));
        n_lines = std::min(n_lines, max_lines);
        double line_h = std::min<double>(kMaxLineHeightPx,
                                         (inner_h - (n_lines - 1) * kLineGapPx) / n_lines);

        const auto& words = word_list();
        std::vector<std::string> line_texts(static_cast<std::size_t>(n_lines));
        for (auto& text : line_texts) {
            int n_words = rng.uniform_int(1, 2);
            for (int w = 0; w < n_words; ++w) {
                const std::string& word = words[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<int>(words.size()) - 1))];
                if (!text.empty()) text += ' ';
                if (text.size() + word.size() > 40) break;  // keeps content far below 100 chars
                text += word;
            }
            if (text.empty()) text = words[0];
        }

        std::string content;
        for (int li = 0; li < n_lines; ++li) {
            const std::string& text = line_texts[static_cast<std::size_t>(li)];
            double width = std::min(inner_w, kCharWidthPx * static_cast<double>(text.size()) + 6.0);
            double y0 = inner_y0 + li * (line_h + kLineGapPx);
            cell_layout.lines.push_back(
                {Box::pixel(inner_x0, y0, inner_x0 + width, y0 + line_h), text});
            if (!content.empty()) content += ' ';
            content += text;
        }

        Box extent = cell_layout.lines.front().box;
        for (const auto& line : cell_layout.lines) {
            extent.x0 = std::min(extent.x0, line.box.x0);
            extent.y0 = std::min(extent.y0, line.box.y0);
            extent.x1 = std::max(extent.x1, line.box.x1);
            extent.y1 = std::max(extent.y1, line.box.y1);
        }
        cell_layout.cell_box = extent;
        rec_cell.bbox = extent;

        if (in_thead) rec_cell.tokens.push_back("<b>");
        for (char ch : content) rec_cell.tokens.push_back(std::string(1, ch));
        if (in_thead) rec_cell.tokens.push_back("</b>");
    };

    frags.push_back("<thead>");
    for (int r = 0; r < rows; ++r) {
        if (r == header_rows) {
            frags.push_back("</thead>");
            frags.push_back("<tbody>");
        }
        frags.push_back("<tr>");
        for (int c = 0; c < cols; ++c) {
            int ordinal = owned(r, c);
            const GridCell& cell = grid_cells[static_cast<std::size_t>(ordinal)];
            if (cell.row != r || cell.col != c) continue;  // covered by a span
            emit_cell(cell, ordinal);
        }
        frags.push_back("</tr>");
    }
    frags.push_back("</tbody>");

    return {std::move(record), std::move(layout)};
}

ModelOutputRecord simulate_outputs(const AnnotationRecord& record, const Layout& layout,
                                   const SynthParams& params, const EmptyFormTable& forms) {
    SynthRng rng(params.seed ^ kSimulateSalt);
    if (!record.image_size) {
        throw Error(ErrorKind::MissingImageSize, "generated records always carry image_size");
    }
    ImageSize image = *record.image_size;

    StructureSequence seq = encode_annotation(record, image, forms);

    ModelOutputRecord out;
    out.filename = record.filename;
    out.image_size = image;
    out.structure.tokens = seq.tokens;

    double max_shift = 3.0 * params.jitter_sigma;
    auto jittered = [&](const Box& box) {
        double dx = rng.truncated_normal(params.jitter_sigma, max_shift);
        double dy = rng.truncated_normal(params.jitter_sigma, max_shift);
        Box moved = box.translated(dx, dy);
        double fix_x = std::min(0.0, image.width - moved.x1) - std::min(0.0, moved.x0);
        double fix_y = std::min(0.0, image.height - moved.y1) - std::min(0.0, moved.y0);
        return moved.translated(fix_x, fix_y);
    };

    out.structure.boxes.reserve(layout.cells.size());
    for (const CellLayout& cell : layout.cells) {
        out.structure.boxes.push_back(convert(jittered(cell.cell_box), image, BoxForm::Normalized));
    }

    int next_id = 0;
    for (const CellLayout& cell : layout.cells) {
        for (const LineLayout& line : cell.lines) {
            double u = rng.uniform();
            Box box = jittered(line.box);  // drawn unconditionally to keep streams aligned
            if (u < params.drop_prob) continue;
            TextLine text_line;
            text_line.id = next_id++;
            text_line.box = box;
            text_line.content = line.content;
            out.text_lines.push_back(std::move(text_line));
        }
    }
    return out;
}

double SweepPoint::center_share() const {
    long long total = matches_center + matches_iou + matches_distance;
    return total > 0 ? static_cast<double>(matches_center) / static_cast<double>(total) : 0.0;
}

double SweepPoint::iou_share() const {
    long long total = matches_center + matches_iou + matches_distance;
    return total > 0 ? static_cast<double>(matches_iou) / static_cast<double>(total) : 0.0;
}

double SweepPoint::distance_share() const {
    long long total = matches_center + matches_iou + matches_distance;
    return total > 0 ? static_cast<double>(matches_distance) / static_cast<double>(total) : 0.0;
}

std::vector<SweepPoint> degradation_sweep(const SynthParams& base, std::span<const double> jitters,
                                          std::span<const double> drops, int seeds_per_point,
                                          int jobs, const EmptyFormTable& forms) {
    if (seeds_per_point < 1) {
        throw Error(ErrorKind::InfeasibleParams, "seeds_per_point must be >= 1");
    }
    struct Task {
        std::size_t point = 0;
        SynthParams params;
    };
    std::vector<SweepPoint> points;
    std::vector<Task> tasks;
    for (double jitter : jitters) {
        for (double drop : drops) {
            SweepPoint point;
            point.jitter_sigma = jitter;
            point.drop_prob = drop;
            point.seeds = seeds_per_point;
            for (int i = 0; i < seeds_per_point; ++i) {
                SynthParams params = base;
                params.jitter_sigma = jitter;
                params.drop_prob = drop;
                params.seed = base.seed + static_cast<std::uint64_t>(i);
                tasks.push_back({points.size(), params});
            }
            points.push_back(point);
        }
    }

    struct TaskResult {
        double teds_score = 0;
        long long center = 0, iou_rule = 0, distance = 0, unassigned = 0;
    };
    std::vector<TaskResult> results(tasks.size());

    if (jobs < 1) jobs = 1;
    int n_tasks = static_cast<int>(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) num_threads(jobs)
#endif
    for (int t = 0; t < n_tasks; ++t) {
        const Task& task = tasks[static_cast<std::size_t>(t)];
        auto [record, layout] = generate_table(task.params);
        ModelOutputRecord output = simulate_outputs(record, layout, task.params, forms);
        PipelineResult piped = run_pipeline(output, forms);
        std::string gt = record_to_html(record);
        TaskResult& r = results[static_cast<std::size_t>(t)];
        r.teds_score = teds(piped.html, gt).score;
        for (const auto& [ordinal, matches] : piped.assignment.per_cell) {
            for (const CellMatch& match : matches) {
                switch (match.rule) {
                    case MatchRule::Center: ++r.center; break;
                    case MatchRule::Iou: ++r.iou_rule; break;
                    case MatchRule::Distance: ++r.distance; break;
                }
            }
        }
        r.unassigned += static_cast<long long>(piped.assignment.unassigned_lines.size());
    }

    // seed-order reduction keeps results identical at any thread count
    std::vector<double> sums(points.size(), 0.0);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const TaskResult& r = results[t];
        SweepPoint& point = points[tasks[t].point];
        sums[tasks[t].point] += r.teds_score;
        point.matches_center += r.center;
        point.matches_iou += r.iou_rule;
        point.matches_distance += r.distance;
        point.unassigned += r.unassigned;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i].mean_teds = sums[i] / points[i].seeds;
    }
    return points;
}

void write_sweep_tsv(std::ostream& out, std::span<const SweepPoint> points) {
    out << "jitter_sigma\tdrop_prob\tseeds\tmean_teds\tcenter_share\tiou_share\tdistance_share"
           "\tunassigned\n";
    for (const SweepPoint& p : points) {
        out << p.jitter_sigma << '\t' << p.drop_prob << '\t' << p.seeds << '\t' << p.mean_teds
            << '\t' << p.center_share() << '\t' << p.iou_share() << '\t' << p.distance_share()
            << '\t' << p.unassigned << '\n';
    }
}

} // namespace tabrec
