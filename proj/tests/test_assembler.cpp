#include <doctest.h>

#include "tabrec/assembler.hpp"
#include "tabrec/sequence.hpp"

using namespace tabrec;

namespace {

Skeleton skeleton_from(std::vector<int> tokens) {
    StructureSequence seq;
    seq.tokens = std::move(tokens);
    return decode_to_skeleton(seq);
}

} // namespace

TEST_CASE("all-empty-form skeleton expands to the literal markups") {
    Skeleton s = skeleton_from({Vocabulary::kThead, Vocabulary::kTheadClose, Vocabulary::kTbody,
                                Vocabulary::kTr, Vocabulary::empty_form_id(0),
                                Vocabulary::empty_form_id(1), Vocabulary::empty_form_id(2),
                                Vocabulary::kTrClose, Vocabulary::kTbodyClose});
    std::string html = assemble(s.tree, s.anchors, Assignment{}, {}, default_empty_forms());
    CHECK(html ==
          "<table><thead></thead><tbody><tr><td></td><td> </td><td><b> </b></td></tr></tbody>"
          "</table>");
}

TEST_CASE("assigned lines are merged into their cells") {
    Skeleton s = skeleton_from({Vocabulary::kThead, Vocabulary::kTheadClose, Vocabulary::kTbody,
                                Vocabulary::kTr, Vocabulary::kCell, Vocabulary::kCell,
                                Vocabulary::kTrClose, Vocabulary::kTbodyClose});
    std::vector<TextLine> lines = {
        {0, Box::pixel(0, 20, 50, 30), "world", std::nullopt},
        {1, Box::pixel(0, 0, 50, 10), "hello", std::nullopt},
        {2, Box::pixel(60, 0, 90, 10), "solo", std::nullopt},
    };
    Assignment assignment;
    assignment.per_cell[0] = {{1, MatchRule::Center}, {0, MatchRule::Center}};
    assignment.per_cell[1] = {{2, MatchRule::Iou}};
    std::string html = assemble(s.tree, s.anchors, assignment, lines, default_empty_forms(),
                                {.format_correction = false});
    CHECK(html ==
          "<table><thead></thead><tbody><tr><td>hello world</td><td>solo</td></tr></tbody>"
          "</table>");
}

TEST_CASE("format correction bolds visible thead content only") {
    TableTree tree = TableTree::table();
    TableTree head_row = TableTree::row();
    head_row.children.push_back(TableTree::cell("Group"));
    head_row.children.push_back(TableTree::cell("<b>N</b>"));
    head_row.children.push_back(TableTree::cell(" "));   // expanded empty form
    head_row.children.push_back(TableTree::cell("<b> </b>"));
    tree.thead().children.push_back(head_row);
    TableTree body_row = TableTree::row();
    body_row.children.push_back(TableTree::cell("12.5"));
    tree.tbody().children.push_back(body_row);

    TableTree corrected = format_correct_thead(tree);
    CHECK(corrected.thead().children[0].children[0].content == "<b>Group</b>");
    CHECK(corrected.thead().children[0].children[1].content == "<b>N</b>");
    CHECK(corrected.thead().children[0].children[2].content == " ");
    CHECK(corrected.thead().children[0].children[3].content == "<b> </b>");
    CHECK(corrected.tbody().children[0].children[0].content == "12.5");

    // idempotent
    CHECK(format_correct_thead(corrected) == corrected);
}

TEST_CASE("assemble applies format correction by default") {
    Skeleton s = skeleton_from({Vocabulary::kThead, Vocabulary::kTr, Vocabulary::kCell,
                                Vocabulary::kTrClose, Vocabulary::kTheadClose, Vocabulary::kTbody,
                                Vocabulary::kTbodyClose});
    std::vector<TextLine> lines = {{0, Box::pixel(0, 0, 10, 10), "Group", std::nullopt}};
    Assignment assignment;
    assignment.per_cell[0] = {{0, MatchRule::Center}};
    CHECK(assemble(s.tree, s.anchors, assignment, lines, default_empty_forms()) ==
          "<table><thead><tr><td><b>Group</b></td></tr></thead><tbody></tbody></table>");
    CHECK(assemble(s.tree, s.anchors, assignment, lines, default_empty_forms(),
                   {.format_correction = false}) ==
          "<table><thead><tr><td>Group</td></tr></thead><tbody></tbody></table>");
}

TEST_CASE("anchor mismatch is rejected") {
    Skeleton s = skeleton_from({Vocabulary::kThead, Vocabulary::kTheadClose, Vocabulary::kTbody,
                                Vocabulary::kTr, Vocabulary::kCell, Vocabulary::kTrClose,
                                Vocabulary::kTbodyClose});
    std::vector<CellAnchor> extra = s.anchors;
    extra.push_back(extra.back());
    CHECK_THROWS_AS(assemble(s.tree, extra, Assignment{}, {}, default_empty_forms()), Error);
    CHECK_THROWS_AS(assemble(s.tree, {}, Assignment{}, {}, default_empty_forms()), Error);
}

TEST_CASE("every assigned line's content lands verbatim in exactly one cell") {
    Skeleton s = skeleton_from({Vocabulary::kThead, Vocabulary::kTheadClose, Vocabulary::kTbody,
                                Vocabulary::kTr, Vocabulary::kCell, Vocabulary::kCell,
                                Vocabulary::kCell, Vocabulary::kTrClose, Vocabulary::kTbodyClose});
    std::vector<TextLine> lines;
    Assignment assignment;
    for (int i = 0; i < 3; ++i) {
        lines.push_back({i, Box::pixel(0, i * 10.0, 40, i * 10.0 + 8), "tok" + std::to_string(i),
                         std::nullopt});
        assignment.per_cell[i] = {{i, MatchRule::Center}};
    }
    TableTree tree = assemble_tree(s.tree, s.anchors, assignment, lines, default_empty_forms());
    int hits = 0;
    for_each_td(tree, [&](TableTree& td) {
        for (int i = 0; i < 3; ++i) {
            if (td.content == "tok" + std::to_string(i)) ++hits;
        }
    });
    CHECK(hits == 3);
}
