#include "tabrec/assignment.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace tabrec {

const char* to_string(MatchRule rule) {
    switch (rule) {
        case MatchRule::Center: return "center";
        case MatchRule::Iou: return "iou";
        case MatchRule::Distance: return "distance";
    }
    return "?";
}

namespace {

bool is_candidate(const CellAnchor& anchor) {
    return anchor.kind != CellKind::EmptyForm && anchor.box.has_value();
}

// Reading order within a cell, then finalize unassigned list.
void finalize(Assignment& out, std::span<const TextLine> lines) {
    std::map<int, const TextLine*> by_id;
    for (const auto& line : lines) by_id.emplace(line.id, &line);
    for (auto& [ordinal, matches] : out.per_cell) {
        std::sort(matches.begin(), matches.end(), [&](const CellMatch& a, const CellMatch& b) {
            const TextLine* la = by_id.at(a.line_id);
            const TextLine* lb = by_id.at(b.line_id);
            return std::tuple(la->box.center_y(), la->box.center_x(), a.line_id) <
                   std::tuple(lb->box.center_y(), lb->box.center_x(), b.line_id);
        });
    }
    std::sort(out.unassigned_lines.begin(), out.unassigned_lines.end());
}

} // namespace

Assignment assign(std::span<const CellAnchor> cells, std::span<const TextLine> lines,
                  const AssignConfig& cfg) {
    struct Candidate {
        int ordinal;
        Box box;
    };
    std::vector<Candidate> cand;
    cand.reserve(cells.size());
    for (const auto& anchor : cells) {
        if (is_candidate(anchor)) cand.push_back({anchor.cell_ordinal, *anchor.box});
    }

    Assignment out;
    if (cand.empty()) {
        out.no_candidates = true;
        for (const auto& line : lines) out.unassigned_lines.push_back(line.id);
        finalize(out, lines);
        return out;
    }

    std::vector<const TextLine*> leftover;

    // Stage 1: center point rule.
    for (const auto& line : lines) {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (const auto& c : cand) {
            if (!contains_center(c.box, line.box)) continue;
            double d = center_distance(c.box, line.box);
            if (d < best_dist || (d == best_dist && (best == -1 || c.ordinal < best))) {
                best = c.ordinal;
                best_dist = d;
            }
        }
        if (best >= 0) {
            out.per_cell[best].push_back({line.id, MatchRule::Center});
        } else {
            leftover.push_back(&line);
        }
    }

    // Stage 2: maximum-IOU rule for lines the center rule missed.
    std::vector<const TextLine*> still_left;
    for (const TextLine* line : leftover) {
        int best = -1;
        double best_iou = cfg.iou_floor;
        for (const auto& c : cand) {
            double v = iou(c.box, line->box);
            if (v > best_iou || (v == best_iou && best >= 0 && v > cfg.iou_floor && c.ordinal < best)) {
                best = c.ordinal;
                best_iou = v;
            }
        }
        if (best >= 0) {
            out.per_cell[best].push_back({line->id, MatchRule::Iou});
        } else {
            still_left.push_back(line);
        }
    }

    // Stage 3: cells that received nothing pull remaining lines, nearest first.
    if (cfg.distance_enabled && !still_left.empty()) {
        struct Pull {
            double dist;
            int ordinal;
            int line_id;
            const TextLine* line;
        };
        std::vector<Pull> pulls;
        for (const auto& c : cand) {
            if (out.per_cell.contains(c.ordinal)) continue;
            for (const TextLine* line : still_left) {
                pulls.push_back({center_distance(c.box, line->box), c.ordinal, line->id, line});
            }
        }
        std::sort(pulls.begin(), pulls.end(), [](const Pull& a, const Pull& b) {
            return std::tuple(a.dist, a.ordinal, a.line_id) < std::tuple(b.dist, b.ordinal, b.line_id);
        });
        std::vector<int> used_lines;
        std::vector<int> filled_cells;
        for (const auto& p : pulls) {
            if (std::find(used_lines.begin(), used_lines.end(), p.line_id) != used_lines.end()) continue;
            if (std::find(filled_cells.begin(), filled_cells.end(), p.ordinal) != filled_cells.end()) continue;
            out.per_cell[p.ordinal].push_back({p.line_id, MatchRule::Distance});
            used_lines.push_back(p.line_id);
            filled_cells.push_back(p.ordinal);
        }
        for (const TextLine* line : still_left) {
            if (std::find(used_lines.begin(), used_lines.end(), line->id) == used_lines.end()) {
                out.unassigned_lines.push_back(line->id);
            }
        }
    } else {
        for (const TextLine* line : still_left) out.unassigned_lines.push_back(line->id);
    }

    finalize(out, lines);
    return out;
}

Assignment assign_oracle(std::span<const CellAnchor> cells, std::span<const TextLine> lines,
                         const AssignConfig& cfg) {
    // Literal restatement: quadratic scans over (cell, line) pairs per stage,
    // no precomputation. Must stay independent of assign() above.
    std::vector<CellAnchor> candidates;
    for (const auto& anchor : cells) {
        if (anchor.kind != CellKind::EmptyForm && anchor.box.has_value()) {
            candidates.push_back(anchor);
        }
    }

    Assignment out;
    if (candidates.empty()) {
        out.no_candidates = true;
        for (const auto& line : lines) out.unassigned_lines.push_back(line.id);
        finalize(out, lines);
        return out;
    }

    std::vector<bool> assigned(lines.size(), false);

    // Stage 1: center point rule.
    for (std::size_t li = 0; li < lines.size(); ++li) {
        bool found = false;
        int best_ordinal = 0;
        double best_dist = 0.0;
        for (const auto& cell : candidates) {
            if (!contains_center(*cell.box, lines[li].box)) continue;
            double d = center_distance(*cell.box, lines[li].box);
            if (!found || d < best_dist || (d == best_dist && cell.cell_ordinal < best_ordinal)) {
                found = true;
                best_dist = d;
                best_ordinal = cell.cell_ordinal;
            }
        }
        if (found) {
            assigned[li] = true;
            out.per_cell[best_ordinal].push_back({lines[li].id, MatchRule::Center});
        }
    }

    // Stage 2: IOU rule.
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (assigned[li]) continue;
        bool found = false;
        int best_ordinal = 0;
        double best_iou = 0.0;
        for (const auto& cell : candidates) {
            double v = iou(*cell.box, lines[li].box);
            if (v <= cfg.iou_floor) continue;
            if (!found || v > best_iou || (v == best_iou && cell.cell_ordinal < best_ordinal)) {
                found = true;
                best_iou = v;
                best_ordinal = cell.cell_ordinal;
            }
        }
        if (found) {
            assigned[li] = true;
            out.per_cell[best_ordinal].push_back({lines[li].id, MatchRule::Iou});
        }
    }

    // Stage 3: every cell with no match pulls the nearest remaining line,
    // globally nearest pair first.
    if (cfg.distance_enabled) {
        for (;;) {
            bool found = false;
            double best_dist = 0.0;
            int best_ordinal = 0;
            std::size_t best_line = 0;
            for (const auto& cell : candidates) {
                if (out.per_cell.contains(cell.cell_ordinal)) continue;
                for (std::size_t li = 0; li < lines.size(); ++li) {
                    if (assigned[li]) continue;
                    double d = center_distance(*cell.box, lines[li].box);
                    bool better = !found || d < best_dist ||
                                  (d == best_dist && (cell.cell_ordinal < best_ordinal ||
                                                      (cell.cell_ordinal == best_ordinal &&
                                                       lines[li].id < lines[best_line].id)));
                    if (better) {
                        found = true;
                        best_dist = d;
                        best_ordinal = cell.cell_ordinal;
                        best_line = li;
                    }
                }
            }
            if (!found) break;
            assigned[best_line] = true;
            out.per_cell[best_ordinal].push_back({lines[best_line].id, MatchRule::Distance});
        }
    }

    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (!assigned[li]) out.unassigned_lines.push_back(lines[li].id);
    }
    finalize(out, lines);
    return out;
}

std::string merge_cell_text(std::span<const TextLine> lines) {
    std::vector<const TextLine*> order;
    order.reserve(lines.size());
    for (const auto& line : lines) order.push_back(&line);
    std::sort(order.begin(), order.end(), [](const TextLine* a, const TextLine* b) {
        return std::tuple(a->box.center_y(), a->box.center_x(), a->id) <
               std::tuple(b->box.center_y(), b->box.center_x(), b->id);
    });
    std::string out;
    for (const TextLine* line : order) {
        if (!out.empty()) out += ' ';
        out += line->content;
    }
    return out;
}

} // namespace tabrec
