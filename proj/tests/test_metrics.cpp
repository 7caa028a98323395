#include "doctest.h"

#include "cellforest/metrics.hpp"
#include "cellforest/simulator.hpp"
#include "cellforest/tracking.hpp"
#include "support.hpp"

using namespace cellforest;
using cftest::art;

namespace {

LineageForest forest_of(const Movie& m) { return build_forest(m, link_movie(m)); }

Movie two_chains(bool drop_last_b) {
  Movie m;
  for (int f = 0; f < 4; ++f) {
    m.frames.push_back(art(f, {"11...", "11.22", "...22"}));
  }
  if (drop_last_b) m.frames[3] = art(3, {"11...", "11...", "....."});
  return m;
}

}  // namespace

TEST_CASE("identity comparison scores one") {
  SimConfig c;
  c.n_clones = 2;
  c.frames = 20;
  c.width = c.height = 64;
  const SimResult r = simulate(c);
  const TruthComparison cmp = compare_to_truth(r.truth, r.movie, r.truth, r.movie);
  CHECK(cmp.f1 == 1.0);
  CHECK(cmp.mean_matched_iou == 1.0);
  CHECK(cmp.matched_divisions == cmp.true_divisions);
  CHECK(cmp.spurious_divisions == 0);
}

TEST_CASE("a shortened segment no longer matches") {
  const Movie truth = two_chains(false);
  const Movie pred = two_chains(true);
  const TruthComparison cmp = compare_to_truth(forest_of(pred), pred, forest_of(truth), truth);
  CHECK(cmp.pred_segments == 2);
  CHECK(cmp.true_segments == 2);
  CHECK(cmp.matched_segments == 1);
  CHECK(cmp.precision == doctest::Approx(0.5));
  CHECK(cmp.recall == doctest::Approx(0.5));
  CHECK(cmp.f1 == doctest::Approx(0.5));
}

TEST_CASE("an empty prediction scores zero") {
  const Movie truth = two_chains(false);
  Movie pred;
  for (int f = 0; f < 4; ++f) pred.frames.push_back(LabeledFrame(f, 5, 3));
  const TruthComparison cmp = compare_to_truth(forest_of(pred), pred, forest_of(truth), truth);
  CHECK(cmp.pred_segments == 0);
  CHECK(cmp.f1 == 0.0);
  CHECK(cmp.recall == 0.0);
}

TEST_CASE("mismatched movies are rejected") {
  const Movie truth = two_chains(false);
  Movie pred = truth;
  pred.frames.pop_back();
  CHECK_THROWS_AS(compare_to_truth(forest_of(pred), pred, forest_of(truth), truth), InputError);
}

TEST_CASE("validity report counts and excludes entrants") {
  Movie m = two_chains(true);
  m.frames[2] = art(2, {"11..3", "11...", "....."});
  // Chain 2 ends at frame 1 and label 3 appears from nowhere at frame 2.
  m.frames[3] = art(3, {"11..3", "11...", "....."});
  const LineageForest f = forest_of(m);
  const ValidityReport r = validity_report(f);
  CHECK(r.total_segments == 2);
  CHECK(r.valid_segments == 1);
  CHECK(r.valid_fraction == doctest::Approx(0.5));
  CHECK(r.excluded_entrant_segments == 1);
  CHECK(validity_report(f, true).total_segments == 3);
  CHECK(render_validity_tsv(r).find("all\t2\t1\t0.500000\n") != std::string::npos);
}

TEST_CASE("correction summary arithmetic") {
  ValidityReport before, after;
  before.valid_segments = 100;
  before.total_segments = 200;
  before.valid_fraction = 0.5;
  after.valid_segments = 125;
  after.total_segments = 150;
  after.valid_fraction = 125.0 / 150.0;
  std::vector<CorrectionEvent> events(3);
  events[0].kind = EventKind::retro_merge;
  events[1].kind = EventKind::retro_merge;
  events[2].kind = EventKind::unresolved;
  const CorrectionSummary s = correction_summary(events, before, after);
  CHECK(s.valid_change == 25);
  CHECK(s.relative_change == doctest::Approx(0.25));
  CHECK(s.fraction_change == doctest::Approx(125.0 / 150.0 - 0.5));
  CHECK(s.events_by_kind.size() == 5);
  CHECK(s.events_by_kind.at(EventKind::retro_merge) == 2);
  CHECK(s.events_by_kind.at(EventKind::underseg_split) == 0);
  CHECK(s.unresolved == 1);
  const std::string text = render_summary(s);
  CHECK(text.find("+25 (+25.0%)") != std::string::npos);

  before.valid_segments = 0;
  CHECK(correction_summary({}, before, after).relative_change == 0.0);
}
