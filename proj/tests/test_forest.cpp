#include "doctest.h"

#include "cellforest/forest.hpp"
#include "support.hpp"

using namespace cellforest;
using cftest::art;

namespace {

TrackingLink link(int f, Label a, Label b) { return TrackingLink{{f, a}, {f + 1, b}, 1, 1.0}; }

// One founder that divides between frames 1 and 2, plus a second founder
// that vanishes after frame 1.
Movie division_movie() {
  Movie m;
  m.frames.push_back(art(0, {"11..", "....", "..22"}));
  m.frames.push_back(art(1, {"111.", "....", "..22"}));
  m.frames.push_back(art(2, {"1.3.", "....", "...."}));
  return m;
}

std::vector<LinkSet> division_links() {
  return {{link(0, 1, 1), link(0, 2, 2)}, {link(1, 1, 1), link(1, 1, 3)}};
}

}  // namespace

TEST_CASE("forest nodes, parents and statuses") {
  const auto forest = build_forest(division_movie(), division_links());
  CHECK(forest.size() == 6);
  CHECK(forest.frame_count() == 3);
  CHECK(forest.roots().size() == 2);

  const NodeId mother = *forest.find({1, 1});
  CHECK(forest.node(mother).children.size() == 2);
  CHECK(is_division(forest, mother));
  CHECK(forest.node(*forest.find({2, 3})).parent == mother);
  CHECK(forest.node(*forest.find({1, 2})).status == NodeStatus::terminated_early);
  CHECK(forest.node(*forest.find({2, 1})).status == NodeStatus::leaf_final_frame);
  CHECK(forest.node(*forest.find({0, 1})).status == NodeStatus::root);
  CHECK(forest.node(*forest.find({2, 3})).clone_id == 1);
  CHECK(forest.node(*forest.find({1, 2})).clone_id == 2);
  CHECK(forest.clone_count_at(2) == 1);
  CHECK_FALSE(forest.find({2, 2}).has_value());
}

TEST_CASE("segments and validity") {
  const auto forest = build_forest(division_movie(), division_links());
  const auto segs = extract_segments(forest);
  REQUIRE(segs.size() == 4);
  int valid = 0;
  for (const auto& s : segs) valid += s.is_valid ? 1 : 0;
  CHECK(valid == 3);  // the founder chain and both daughters; founder 2 dies early

  CHECK(segment_is_valid(false, false, 0, 9, 9));
  CHECK(segment_is_valid(true, true, 3, 5, 9));
  CHECK_FALSE(segment_is_valid(false, true, 2, 5, 9));
  CHECK_FALSE(segment_is_valid(true, false, 2, 5, 9));
}

TEST_CASE("three-node chain is one valid segment") {
  Movie m;
  for (int f = 0; f < 3; ++f) m.frames.push_back(art(f, {"1."}));
  const auto forest = build_forest(m, std::vector<LinkSet>{{link(0, 1, 1)}, {link(1, 1, 1)}});
  const auto segs = extract_segments(forest);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].length() == 3);
  CHECK(segs[0].is_valid);
}

TEST_CASE("three children do not make a division") {
  Movie m;
  m.frames.push_back(art(0, {"111"}));
  m.frames.push_back(art(1, {"123"}));
  const auto forest =
      build_forest(m, std::vector<LinkSet>{{link(0, 1, 1), link(0, 1, 2), link(0, 1, 3)}});
  const NodeId mother = *forest.find({0, 1});
  CHECK(forest.node(mother).children.size() == 3);
  CHECK_FALSE(is_division(forest, mother));
  for (const auto& s : extract_segments(forest)) {
    if (s.start_frame == 1) CHECK_FALSE(s.is_valid);
  }
}

TEST_CASE("late roots are entrants") {
  Movie m;
  m.frames.push_back(art(0, {"1.."}));
  m.frames.push_back(art(1, {"1.2"}));
  const auto forest = build_forest(m, std::vector<LinkSet>{{link(0, 1, 1)}});
  CHECK(forest.node(*forest.find({1, 2})).entrant);
  CHECK_FALSE(forest.node(*forest.find({0, 1})).entrant);
  CHECK(forest.node(*forest.find({1, 2})).clone_id == 2);
}

TEST_CASE("malformed links are rejected") {
  const Movie m = division_movie();
  CHECK_THROWS_AS(build_forest(m, std::vector<LinkSet>{{link(0, 1, 1)}}), InputError);
  CHECK_THROWS_AS(build_forest(m, std::vector<LinkSet>{{link(0, 7, 1)}, {}}), InputError);
  CHECK_THROWS_AS(build_forest(m, std::vector<LinkSet>{{link(0, 1, 1), link(0, 2, 1)}, {}}),
                  InputError);
}

TEST_CASE("division tree contracts unary chains") {
  const auto forest = build_forest(division_movie(), division_links());
  const auto trees = condense_division_tree(forest, 5.0);
  REQUIRE(trees.size() == 2);
  const DivisionTree& t = trees[0];
  CHECK(t.clone_id == 1);
  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].children.size() == 2);
  CHECK(t.nodes[0].life_frames == 2);
  REQUIRE(t.nodes[0].division_time_min.has_value());
  CHECK(*t.nodes[0].division_time_min == doctest::Approx(5.0));
  CHECK(t.nodes[0].mean_area_px == doctest::Approx(2.5));
  CHECK_FALSE(t.nodes[1].division_time_min.has_value());
  CHECK(trees[1].nodes.size() == 1);
}

TEST_CASE("status names round-trip") {
  for (NodeStatus s : {NodeStatus::normal, NodeStatus::root, NodeStatus::leaf_final_frame,
                       NodeStatus::terminated_early, NodeStatus::unresolved}) {
    CHECK(node_status_from_string(to_string(s)) == s);
  }
  CHECK_FALSE(node_status_from_string("bogus").has_value());
}
