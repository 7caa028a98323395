#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellforest/forest.hpp"
#include "cellforest/tracking.hpp"

namespace cellforest {

enum class AnomalyKind { multi_overseg, lonely_cell };

/// A lineage-tree irregularity detected at frame `detect_frame` (= t).
struct Anomaly {
  AnomalyKind kind = AnomalyKind::multi_overseg;
  int detect_frame = 0;
  /// multi_overseg: the mother at t-1. lonely_cell: the node at t-1 whose
  /// branch terminates there.
  CellKey site;
  std::vector<CellKey> children;  // multi_overseg only
  /// lonely_cell: start of the terminated branch's sister segment, if the
  /// branch began at a two-way division.
  std::optional<CellKey> sibling;
  /// lonely_cell: the sister lineage's single node at t (the "lonely" cell),
  /// when the sister chain stays unbranched up to t.
  std::optional<CellKey> lonely;
  int branch_start_frame = 0;  // first frame of the terminated segment
};

enum class EventKind { coalesce_to_one, coalesce_to_division, underseg_split, retro_merge, unresolved };

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view text);
std::string_view to_string(AnomalyKind kind);

struct CorrectionEvent {
  EventKind kind = EventKind::unresolved;
  int frame_from = 0;
  int frame_to = 0;
  std::vector<CellKey> labels_before;
  std::vector<CellKey> labels_after;
  std::optional<double> score_used;
  std::string note;

  friend bool operator==(const CorrectionEvent&, const CorrectionEvent&) = default;
};

/// Mutable state of one correction run: the movie, its frame-pair links and
/// the forest built from them. Corrections prepare new frames off to the
/// side and publish them through commit(), so the forest is never observed
/// half-updated.
class Workspace {
 public:
  explicit Workspace(Movie movie);

  const Movie& movie() const { return movie_; }
  const std::vector<LinkSet>& links() const { return links_; }
  const LineageForest& forest() const { return forest_; }
  const LabeledFrame& frame(int f) const { return movie_.frames.at(f); }
  int last_frame() const { return movie_.frame_count() - 1; }

  /// Replace the given frames, re-link every pair touching them and rebuild
  /// the forest.
  void commit(std::vector<LabeledFrame> frames);

  Movie release_movie() && { return std::move(movie_); }

 private:
  Movie movie_;
  std::vector<LinkSet> links_;
  std::vector<std::vector<CellSummary>> cells_;
  LineageForest forest_;
};

/// Anomalies visible at frame `frame` (the frame after the irregular level):
/// mothers at frame-1 with more than two children, and branches ending at
/// frame-1. Ordered multi_overseg first, then by site label.
std::vector<Anomaly> detect_anomalies(const LineageForest& forest, int frame);

/// Coalesce the fragments of a multi-child mother by contact clusters.
/// A single cluster that carries two mask-continuous lineages into the next
/// frame is kept as a division (fragments join the child they border most).
/// Always commits.
CorrectionEvent correct_multi_overseg(const Anomaly& anomaly, Workspace& ws,
                                      const AnalysisParams& params = {});

/// Treat a terminated branch as swallowed by an under-segmented cell at t and
/// split that cell by the anchor centroids when the reversed neighbourhood
/// correspondence passes T. Returns nullopt (and leaves `ws` untouched) when
/// the hypothesis is rejected.
std::optional<CorrectionEvent> try_underseg_split(const Anomaly& anomaly, Workspace& ws,
                                                  const AnalysisParams& params);

/// Merge the terminated branch into its sister frame by frame back to the
/// mother, collapsing a false division. All-or-nothing.
std::optional<CorrectionEvent> try_retro_merge(const Anomaly& anomaly, Workspace& ws,
                                               const AnalysisParams& params);

struct CorrectionResult {
  Movie movie;
  LineageForest forest;
  std::vector<LinkSet> links;
  std::vector<CorrectionEvent> events;  // commits in order, then unresolved sites
  int sweeps = 0;

  std::size_t committed_count() const;
};

/// The closed loop: sweep frames in order, repairing anomalies until a sweep
/// commits nothing or max_sweeps is reached. Sites still irregular at the end
/// are logged as unresolved and flagged in the returned forest.
CorrectionResult run_correction_loop(Movie movie, const AnalysisParams& params);

/// Tracking and forest assembly only, no correction.
CorrectionResult analyze_without_correction(Movie movie);

}  // namespace cellforest
