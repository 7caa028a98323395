#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cellforest/correction.hpp"
#include "cellforest/forest.hpp"

namespace cellforest {

struct TreeValidity {
  int clone_id = 0;
  int total_segments = 0;
  int valid_segments = 0;
};

struct ValidityReport {
  int total_segments = 0;
  int valid_segments = 0;
  double valid_fraction = 0.0;  // 0 when there are no segments
  int excluded_entrant_segments = 0;
  std::vector<TreeValidity> per_tree;  // by clone id
};

/// Count valid segments. Segments of trees rooted by a mid-movie entrant are
/// left out unless `include_entrants` is set.
ValidityReport validity_report(const LineageForest& forest, bool include_entrants = false);

struct TruthComparison {
  int pred_segments = 0;
  int true_segments = 0;
  int matched_segments = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mean_matched_iou = 0.0;  // over every cell of every matched segment
  int pred_divisions = 0;
  int true_divisions = 0;
  int matched_divisions = 0;
  int spurious_divisions = 0;
  int missed_divisions = 0;
};

inline constexpr double kSegmentMatchIoU = 0.7;
inline constexpr double kDivisionMotherIoU = 0.5;

/// Score a predicted forest against the true one. Segments match when their
/// frame spans are identical and their mean per-frame mask IoU reaches 0.7.
/// Divisions match on frame and a mother whose masks overlap with IoU >= 0.5.
/// Throws InputError on a frame-count or dimension mismatch.
TruthComparison compare_to_truth(const LineageForest& pred, const Movie& pred_movie,
                                 const LineageForest& truth, const Movie& truth_movie);

struct CorrectionSummary {
  ValidityReport before;
  ValidityReport after;
  int valid_change = 0;
  double relative_change = 0.0;   // (after - before) / before; 0 when before is 0
  double fraction_change = 0.0;   // after.valid_fraction - before.valid_fraction
  std::map<EventKind, int> events_by_kind;  // every kind present, zero or not
  int unresolved = 0;
};

CorrectionSummary correction_summary(std::span<const CorrectionEvent> events,
                                     const ValidityReport& before, const ValidityReport& after);

/// Human-readable summary block.
std::string render_summary(const CorrectionSummary& summary);
/// Tab-separated per-tree validity table.
std::string render_validity_tsv(const ValidityReport& report);
std::string render_comparison(const TruthComparison& cmp);

}  // namespace cellforest
