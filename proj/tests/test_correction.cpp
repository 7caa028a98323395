#include "doctest.h"

#include <algorithm>

#include "cellforest/correction.hpp"
#include "cellforest/geometry.hpp"
#include "support.hpp"

using namespace cellforest;
using cftest::paint_rect;

namespace {

struct Rect {
  Label label;
  int x0, y0, x1, y1;
};

Movie movie_of(const std::vector<std::vector<Rect>>& frames, int w = 40, int h = 16) {
  Movie m;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    LabeledFrame frame(static_cast<int>(f), w, h);
    for (const Rect& r : frames[f]) paint_rect(frame, r.label, r.x0, r.y0, r.x1, r.y1);
    m.frames.push_back(std::move(frame));
  }
  return m;
}

int count_kind(const CorrectionResult& r, EventKind k) {
  return static_cast<int>(std::count_if(r.events.begin(), r.events.end(),
                                        [k](const CorrectionEvent& e) { return e.kind == k; }));
}

// A mother rod that divides into two daughters at frame 2; the daughters lie
// end to end and persist to the last frame.
std::vector<std::vector<Rect>> dividing_rod(int frames) {
  std::vector<std::vector<Rect>> out;
  out.push_back({{1, 4, 6, 19, 9}});
  out.push_back({{1, 4, 6, 20, 9}});
  for (int f = 2; f < frames; ++f) out.push_back({{1, 4, 6, 12, 9}, {2, 13, 6, 21, 9}});
  return out;
}

// Two sisters side by side from frame 1; from `gone` on, sister 2 is removed.
std::vector<std::vector<Rect>> sisters(int frames, int gone, int merged_frame = -1) {
  std::vector<std::vector<Rect>> out;
  out.push_back({{1, 4, 5, 19, 10}});
  for (int f = 1; f < frames; ++f) {
    if (f == merged_frame) {
      out.push_back({{5, 4, 5, 19, 10}});
    } else if (f >= gone) {
      out.push_back({{1, 4, 5, 11, 10}});
    } else {
      out.push_back({{1, 4, 5, 11, 10}, {2, 12, 5, 19, 10}});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("clean movies need no correction") {
  const Movie m = movie_of(dividing_rod(6));
  const CorrectionResult r = run_correction_loop(m, AnalysisParams{});
  CHECK(r.events.empty());
  CHECK(r.sweeps == 1);
  CHECK(r.movie == m);
}

TEST_CASE("four touching fragments coalesce into one cell") {
  auto frames = std::vector<std::vector<Rect>>{};
  for (int f = 0; f < 4; ++f) frames.push_back({{1, 4, 6, 19, 9}});
  frames[2] = {{1, 4, 6, 7, 9}, {2, 8, 6, 11, 9}, {3, 12, 6, 15, 9}, {4, 16, 6, 19, 9}};
  const CorrectionResult r = run_correction_loop(movie_of(frames), AnalysisParams{});
  REQUIRE(count_kind(r, EventKind::coalesce_to_one) == 1);
  CHECK(r.events.size() == 1);
  CHECK(r.movie.frames[2].cell_labels().size() == 1);
  CHECK(pixels_of(r.movie.frames[2], r.movie.frames[2].cell_labels()[0]).area() == 64);
  CHECK(r.events[0].labels_before.size() == 4);
  CHECK(r.forest.size() == 4);
}

TEST_CASE("two separate fragment pairs become a division") {
  auto frames = dividing_rod(5);
  frames[2] = {{1, 4, 6, 7, 9}, {3, 8, 6, 12, 9}, {2, 14, 6, 17, 9}, {4, 18, 6, 21, 9}};
  const CorrectionResult r = run_correction_loop(movie_of(frames), AnalysisParams{});
  REQUIRE(count_kind(r, EventKind::coalesce_to_division) == 1);
  const NodeId mother = *r.forest.find({1, 1});
  CHECK(is_division(r.forest, mother));
  CHECK(r.movie.frames[2].cell_labels().size() == 2);
}

TEST_CASE("fragmented daughter in the division frame keeps the division") {
  auto frames = dividing_rod(5);
  // Daughter 2 loses a corner piece; all three pieces touch, the corner
  // borders its own daughter more than the sister.
  frames[2] = {{1, 4, 6, 12, 9}, {3, 13, 6, 21, 9}, {2, 13, 6, 16, 7}};
  const CorrectionResult r = run_correction_loop(movie_of(frames), AnalysisParams{});
  REQUIRE(count_kind(r, EventKind::coalesce_to_division) == 1);
  CHECK(is_division(r.forest, *r.forest.find({1, 1})));
}

TEST_CASE("fragments in three clusters coalesce with low confidence") {
  std::vector<std::vector<Rect>> frames;
  for (int f = 0; f < 3; ++f) frames.push_back({{1, 2, 6, 30, 9}});
  frames[1] = {{1, 2, 6, 8, 9}, {2, 12, 6, 18, 9}, {3, 22, 6, 30, 9}};
  const CorrectionResult r = run_correction_loop(movie_of(frames), AnalysisParams{});
  REQUIRE(count_kind(r, EventKind::coalesce_to_one) == 1);
  CHECK(r.events[0].note.find("low confidence") != std::string::npos);
  CHECK(r.forest.node(*r.forest.find({0, 1})).children.size() == 1);
}

TEST_CASE("one-frame under-segmentation is split back") {
  const CorrectionResult r = run_correction_loop(movie_of(sisters(9, 99, 5)), AnalysisParams{});
  REQUIRE(count_kind(r, EventKind::underseg_split) == 1);
  CHECK(count_kind(r, EventKind::retro_merge) == 0);
  CHECK(r.movie.frames[5].cell_labels().size() == 2);
  const CorrectionEvent& e = *std::find_if(r.events.begin(), r.events.end(), [](const auto& ev) {
    return ev.kind == EventKind::underseg_split;
  });
  REQUIRE(e.score_used.has_value());
  CHECK(*e.score_used >= 0.75);
  for (NodeId id : r.forest.nodes_at(8)) CHECK(r.forest.node(id).status == NodeStatus::leaf_final_frame);
}

TEST_CASE("an unreachable T forces the merge branch") {
  AnalysisParams p;
  p.T = 1.01;
  const CorrectionResult r = run_correction_loop(movie_of(sisters(9, 99, 5)), p);
  CHECK(count_kind(r, EventKind::underseg_split) == 0);
}

TEST_CASE("a false division is merged back to the mother") {
  // The mother is cut in two for frames 1..3 only: a persistent
  // over-segmentation that looks like a division ending in a death.
  std::vector<std::vector<Rect>> frames;
  for (int f = 0; f < 8; ++f) frames.push_back({{1, 4, 5, 19, 10}});
  for (int f = 1; f <= 3; ++f) frames[f] = {{1, 4, 5, 11, 10}, {2, 12, 5, 19, 10}};
  const CorrectionResult r = run_correction_loop(movie_of(frames), AnalysisParams{});
  REQUIRE(count_kind(r, EventKind::retro_merge) == 1);
  CHECK(r.forest.roots().size() == 1);
  const auto segs = extract_segments(r.forest);
  CHECK(segs.size() == 1);

  AnalysisParams strict;
  strict.M = 1.01;
  const CorrectionResult s = run_correction_loop(movie_of(frames), strict);
  CHECK(count_kind(s, EventKind::retro_merge) == 0);
  CHECK(count_kind(s, EventKind::unresolved) >= 1);
}

TEST_CASE("a real death is left alone") {
  const CorrectionResult r = run_correction_loop(movie_of(sisters(9, 5)), AnalysisParams{});
  CHECK(count_kind(r, EventKind::underseg_split) == 0);
  CHECK(count_kind(r, EventKind::retro_merge) == 0);
  REQUIRE(count_kind(r, EventKind::unresolved) == 1);
  const NodeId dead = *r.forest.find({4, 2});
  CHECK(r.forest.node(dead).status == NodeStatus::terminated_early);
  CHECK(is_division(r.forest, *r.forest.find({0, 1})));
}

TEST_CASE("retro-merge aborts when the successor reaches well outside the merged mask") {
  // Sister 2 dies at frame 4 and sister 1 doubles in place: the merged mask
  // covers only half of what follows, so no merge.
  auto frames = sisters(8, 4);
  for (int f = 4; f < 8; ++f) frames[f] = {{1, 4, 5, 11, 15}};
  const CorrectionResult r = run_correction_loop(movie_of(frames, 40, 24), AnalysisParams{});
  CHECK(count_kind(r, EventKind::retro_merge) == 0);
}

TEST_CASE("anomaly detection") {
  auto frames = dividing_rod(4);
  frames[2] = {{1, 4, 6, 9, 9}, {2, 10, 6, 14, 9}, {3, 15, 6, 21, 9}};
  Workspace ws(movie_of(frames));
  const auto found = detect_anomalies(ws.forest(), 2);
  REQUIRE(found.size() == 1);
  CHECK(found[0].kind == AnomalyKind::multi_overseg);
  CHECK(found[0].site == CellKey{1, 1});
  CHECK(found[0].children.size() == 3);
  CHECK(detect_anomalies(ws.forest(), 1).empty());
}

TEST_CASE("event kinds round-trip") {
  for (EventKind k : {EventKind::coalesce_to_one, EventKind::coalesce_to_division,
                      EventKind::underseg_split, EventKind::retro_merge, EventKind::unresolved}) {
    CHECK(event_kind_from_string(to_string(k)) == k);
  }
}
