#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tabrec/dataset_io.hpp"
#include "tabrec/synth.hpp"
#include "tabrec/teds.hpp"
#include "tabrec/utf8.hpp"
#include "ted_oracle.hpp"
#include "tree_gen.hpp"

using namespace tabrec;
using tabrec::testing::oracle_tree_edit_distance;
using tabrec::testing::random_ordered_tree;

TEST_CASE("levenshtein distance") {
    CHECK(edit_distance(U"", U"") == 0);
    CHECK(edit_distance(U"abc", U"abc") == 0);
    CHECK(edit_distance(U"kitten", U"sitting") == 3);
    CHECK(normalized_edit_distance("", "") == 0.0);
    CHECK(normalized_edit_distance("ab", "") == 1.0);
    CHECK(normalized_edit_distance("abcd", "bbcd") == 0.25);
    // multi-byte characters count as single symbols
    CHECK(normalized_edit_distance("\xC3\xA9", "e") == 1.0);
    CHECK(edit_distance(utf8::decode("caf\xC3\xA9"), utf8::decode("cafe")) == 1);
}

TEST_CASE("tree edit distance basics") {
    TableTree a = TableTree::table();
    CHECK(tree_edit_distance(a, a) == 0.0);

    TableTree lone_td = TableTree::cell("x");
    TableTree lone_tr = TableTree::row();
    CHECK(tree_edit_distance(lone_td, lone_tr) == 1.0);  // one relabel

    TableTree td2 = TableTree::cell("x", 2, 1);
    CHECK(tree_edit_distance(lone_td, td2) == 1.0);  // span mismatch costs a full relabel

    TableTree td_other = TableTree::cell("xy");
    CHECK(tree_edit_distance(lone_td, td_other) == 0.5);  // content lev 1 / max len 2
}

TEST_CASE("tree edit distance equals the script-search oracle on random tiny trees") {
    SynthRng rng(61);
    for (int trial = 0; trial < 250; ++trial) {
        TableTree a = random_ordered_tree(rng, 8);
        TableTree b = random_ordered_tree(rng, 8);
        CostModel costs{trial % 4 == 0};
        double fast = tree_edit_distance(a, b, costs);
        double slow = oracle_tree_edit_distance(a, b, costs);
        CHECK(fast == slow);
    }
}

TEST_CASE("teds on a hand-computed case") {
    // four rows of one cell each: 11 nodes total
    std::string gt = "<table><thead></thead><tbody>"
                     "<tr><td>alpha</td></tr><tr><td>beta</td></tr>"
                     "<tr><td>gamma</td></tr><tr><td>delta</td></tr>"
                     "</tbody></table>";
    std::string pred = "<table><thead></thead><tbody>"
                       "<tr><td></td></tr><tr><td></td></tr>"
                       "<tr><td></td></tr><tr><td></td></tr>"
                       "</tbody></table>";
    TedsReport report = teds(pred, gt);
    CHECK(report.size_pred == 11);
    CHECK(report.size_gt == 11);
    // each emptied cell relabels at cost 1 (lev n / max n)
    CHECK(report.edit_distance == doctest::Approx(4.0));
    CHECK(report.score == doctest::Approx(1.0 - 4.0 / 11.0));

    TedsReport structural = teds(pred, gt, true);
    CHECK(structural.score == 1.0);
    CHECK(structural.struct_only);
}

TEST_CASE("teds identity, symmetry and range") {
    SynthParams params;
    params.span_prob = 0.2;
    params.empty_prob = 0.2;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        params.seed = seed;
        auto [record_a, layout_a] = generate_table(params);
        params.seed = seed + 1000;
        auto [record_b, layout_b] = generate_table(params);
        std::string html_a = record_to_html(record_a);
        std::string html_b = record_to_html(record_b);

        CHECK(teds(html_a, html_a).score == 1.0);
        TedsReport ab = teds(html_a, html_b);
        TedsReport ba = teds(html_b, html_a);
        CHECK(ab.score == ba.score);
        CHECK(ab.edit_distance == ba.edit_distance);
        CHECK(ab.score >= 0.0);
        CHECK(ab.score <= 1.0);
    }
}

TEST_CASE("progressive cell deletion never raises the score") {
    SynthParams params;
    params.seed = 77;
    params.rows = {4, 4};
    params.cols = {4, 4};
    params.empty_prob = 0.0;
    auto [record, layout] = generate_table(params);
    TableTree gt = parse_table_html(record_to_html(record));

    TableTree damaged = gt;
    double prev = 1.0;
    for (int step = 0; step < 6; ++step) {
        // drop the last td of the last non-empty row
        TableTree* section = damaged.tbody().children.empty() ? &damaged.thead() : &damaged.tbody();
        if (section->children.empty()) break;
        TableTree& last_row = section->children.back();
        if (!last_row.children.empty()) {
            last_row.children.pop_back();
        } else {
            section->children.pop_back();
        }
        double score = teds(damaged, gt).score;
        CHECK(score <= prev);
        prev = score;
    }
}

TEST_CASE("teds parse errors name the failing side") {
    CHECK_THROWS_WITH_AS(teds("<table>", "<table></table>"), doctest::Contains("pred"), Error);
    CHECK_THROWS_WITH_AS(teds("<table></table>", "nope"), doctest::Contains("gt"), Error);
}

TEST_CASE("batch evaluation") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "tabrec_batch_test";
    fs::create_directories(dir);
    fs::path gt_path = dir / "gt.jsonl";
    fs::path pred_path = dir / "pred.jsonl";
    fs::path partial_path = dir / "partial.jsonl";

    SynthParams params;
    std::vector<std::pair<std::string, std::string>> samples;
    {
        std::ofstream gt_out(gt_path), pred_out(pred_path), partial_out(partial_path);
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            params.seed = seed;
            auto [record, layout] = generate_table(params);
            std::string html = record_to_html(record);
            samples.emplace_back(record.filename, html);
            write_annotation(gt_out, record);  // gt as full annotation records
            write_prediction(pred_out, record.filename, html);
            if (seed != 3) write_prediction(partial_out, record.filename, html);
        }
    }

    BatchResult perfect = batch_evaluate(pred_path, gt_path, 1);
    CHECK(perfect.n == 8);
    CHECK(perfect.mean == 1.0);
    for (const auto& s : perfect.per_sample) CHECK(s.score == 1.0);

    BatchResult partial = batch_evaluate(partial_path, gt_path, 1);
    CHECK(partial.n == 8);
    CHECK(partial.mean == doctest::Approx(7.0 / 8.0));
    int missing = 0;
    for (const auto& s : partial.per_sample) {
        if (s.note == "missing prediction") {
            ++missing;
            CHECK(s.score == 0.0);
        }
    }
    CHECK(missing == 1);

    // parallel scoring is bit-identical to serial
    BatchResult parallel = batch_evaluate(partial_path, gt_path, 4);
    CHECK(parallel.mean == partial.mean);
    REQUIRE(parallel.per_sample.size() == partial.per_sample.size());
    for (std::size_t i = 0; i < parallel.per_sample.size(); ++i) {
        CHECK(parallel.per_sample[i].filename == partial.per_sample[i].filename);
        CHECK(parallel.per_sample[i].score == partial.per_sample[i].score);
    }

    // unparseable prediction scores zero instead of aborting the batch
    fs::path broken_path = dir / "broken.jsonl";
    {
        std::ofstream out(broken_path);
        for (const auto& [filename, html] : samples) {
            if (filename == samples[0].first) {
                write_prediction(out, filename, "<table><tr>");
            } else {
                write_prediction(out, filename, html);
            }
        }
    }
    BatchResult broken = batch_evaluate(broken_path, gt_path, 2);
    CHECK(broken.mean == doctest::Approx(7.0 / 8.0));

    // duplicate filenames are an input error
    fs::path dup_path = dir / "dup.jsonl";
    {
        std::ofstream out(dup_path);
        write_prediction(out, "x.png", "<table></table>");
        write_prediction(out, "x.png", "<table></table>");
    }
    CHECK_THROWS_AS(batch_evaluate(dup_path, gt_path, 1), Error);

    fs::remove_all(dir);
}

TEST_CASE("score rounding is half-even to four decimals") {
    CHECK(round_score(0.96841) == doctest::Approx(0.9684).epsilon(1e-12));
    CHECK(round_score(0.96849) == doctest::Approx(0.9685).epsilon(1e-12));
    CHECK(round_score(1.0) == 1.0);
    CHECK(round_score(0.0) == 0.0);
    // a .5 tie that survives the decimal scaling exactly goes to the even neighbor
    CHECK(round_score(0.00005) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(round_score(656.5 / 10000.0) == doctest::Approx(0.0656).epsilon(1e-12));
}
