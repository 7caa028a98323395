#include "doctest.h"

#include <algorithm>
#include <set>

#include "cellforest/geometry.hpp"
#include "cellforest/simulator.hpp"
#include "support.hpp"

using namespace cellforest;

namespace {

SimConfig small(std::uint64_t seed = 1) {
  SimConfig c;
  c.n_clones = 3;
  c.frames = 30;
  c.width = c.height = 96;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("growth rate 1.0 leaves a single cell static") {
  SimConfig c = small();
  c.n_clones = 1;
  c.growth_rate = 1.0;
  c.frames = 12;
  const SimResult r = simulate(c);
  const auto area0 = r.movie.frames[0].foreground_area();
  for (const LabeledFrame& f : r.movie.frames) {
    CHECK(f.cell_labels().size() == 1);
    CHECK(f.foreground_area() == area0);
  }
  CHECK(extract_segments(r.truth).size() == 1);
}

TEST_CASE("one founder without length noise divides once in 40 frames") {
  SimConfig c = small();
  c.n_clones = 1;
  c.frames = 40;
  c.division_length_cv = 0.0;
  const SimResult r = simulate(c);
  const auto segs = extract_segments(r.truth);
  CHECK(segs.size() == 3);
  for (const auto& s : segs) CHECK(s.is_valid);
  CHECK(r.movie.frames.back().cell_labels().size() == 2);
}

TEST_CASE("simulated frames are well formed and the truth is consistent") {
  const SimResult r = simulate(small(4));
  CHECK(r.movie.frame_count() == 30);
  CHECK(r.true_links.size() == 29);
  for (const LabeledFrame& f : r.movie.frames) CHECK(frame_problems(f).empty());
  CHECK(r.truth.nodes_at(0).size() == 3);
  std::set<int> clones;
  for (NodeId id : r.truth.nodes_at(29)) clones.insert(r.truth.node(id).clone_id);
  CHECK(clones == std::set<int>{1, 2, 3});
  // Without deaths every branch reaches the last frame and every segment is valid.
  for (const auto& s : extract_segments(r.truth)) CHECK(s.is_valid);
  CHECK(r.movie.frames.back().cell_labels().size() > 3);
}

TEST_CASE("simulation is a pure function of its config") {
  CHECK(simulate(small(9)).movie == simulate(small(9)).movie);
  CHECK_FALSE(simulate(small(9)).movie == simulate(small(10)).movie);
}

TEST_CASE("scripted death removes one cell for good") {
  SimConfig c = small(2);
  c.frames = 40;
  c.death = ScriptedDeath{30, 1};
  const SimResult r = simulate(c);
  REQUIRE(r.removed_cell.has_value());
  CHECK(r.removed_cell->frame == 29);
  const NodeId gone = *r.truth.find(*r.removed_cell);
  CHECK(r.truth.node(gone).status == NodeStatus::terminated_early);
  CHECK(r.truth.node(gone).clone_id == 1);
  int early = 0;
  for (const auto& n : r.truth.nodes()) early += n.status == NodeStatus::terminated_early ? 1 : 0;
  CHECK(early == 1);
}

TEST_CASE("explicit founders are honoured") {
  SimConfig c = small();
  c.n_clones = 2;
  c.frames = 2;
  c.founders = {{20, 20, 0}, {70, 60, 90}};
  const SimResult r = simulate(c);
  RegionTable t(r.movie.frames[0]);
  CHECK(t.at(1).centroid.x == doctest::Approx(20).epsilon(0.05));
  CHECK(t.at(2).centroid.y == doctest::Approx(60).epsilon(0.05));
  CHECK(t.at(2).bbox.y1 - t.at(2).bbox.y0 > t.at(2).bbox.x1 - t.at(2).bbox.x0);
}

TEST_CASE("config validation") {
  SimConfig c;
  c.n_clones = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = SimConfig{};
  c.growth_rate = 0.9;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = SimConfig{};
  c.founders = {{10, 10, 0}};
  CHECK_THROWS_AS(c.validate(), InputError);
  ErrorConfig e;
  e.p_under = 1.5;
  CHECK_THROWS_AS(e.validate(), InputError);
}

TEST_CASE("an overcrowded grid overflows") {
  SimConfig c;
  c.n_clones = 200;
  c.width = c.height = 32;
  CHECK_THROWS_AS(simulate(c), GrowthOverflow);
}

TEST_CASE("fragmenting conserves area") {
  LabeledFrame f(0, 30, 10);
  cftest::paint_rect(f, 3, 2, 3, 21, 6);
  const double cuts[] = {0.3, 0.7};
  const auto labels = fragment_cell(f, 3, cuts);
  REQUIRE(labels.has_value());
  REQUIRE(labels->size() == 3);
  CHECK((*labels)[0] == 3);
  std::int64_t total = 0;
  for (Label l : *labels) {
    const auto a = pixels_of(f, l).area();
    CHECK(a > 0);
    total += a;
  }
  CHECK(total == 80);
  CHECK(frame_problems(f).empty());
}

TEST_CASE("touching pairs") {
  const auto f = cftest::art(0, {"12.3", "....", "4..."});
  const auto pairs = touching_pairs(f);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<Label, Label>{1, 2});
}

TEST_CASE("zero error rates leave the movie untouched") {
  const SimResult r = simulate(small());
  const CorruptedMovie bad = inject_errors(r.movie, r.truth, ErrorConfig{});
  CHECK(bad.movie == r.movie);
  CHECK(bad.log.empty());
}

TEST_CASE("injected errors are logged, deterministic and spare frame 0") {
  const SimResult r = simulate(small(3));
  ErrorConfig e;
  e.p_over_transient = 0.1;
  e.p_over_persistent = 0.2;
  e.p_under = 0.1;
  e.seed = 5;
  const CorruptedMovie a = inject_errors(r.movie, r.truth, e);
  const CorruptedMovie b = inject_errors(r.movie, r.truth, e);
  CHECK(a.movie == b.movie);
  CHECK(a.movie.frames[0] == r.movie.frames[0]);
  std::set<ErrorKind> kinds;
  for (const auto& entry : a.log) {
    kinds.insert(entry.kind);
    CHECK(entry.frame > 0);
  }
  CHECK(kinds.contains(ErrorKind::over_transient));
  CHECK(kinds.contains(ErrorKind::over_persistent));
  CHECK(kinds.contains(ErrorKind::under));
  for (int f = 0; f < a.movie.frame_count(); ++f) {
    CHECK(a.movie.frames[f].foreground_area() == r.movie.frames[f].foreground_area());
  }
  e.seed = 6;
  CHECK_FALSE(inject_errors(r.movie, r.truth, e).movie == a.movie);
}
