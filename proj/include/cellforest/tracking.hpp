#pragma once

#include <map>
#include <span>
#include <vector>

#include "cellforest/forest.hpp"
#include "cellforest/frame.hpp"

namespace cellforest {

/// Tunables of the correction loop.
struct AnalysisParams {
  double T = 0.75;               // under-segmentation acceptance threshold
  double M = 0.90;               // retro-merge overlap threshold
  int min_life_frames = 3;       // lifespan needed before trying an under-seg split
  int neighborhood_radius_px = 5;
  int max_sweeps = 5;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

/// Link each curr cell to the prev cell it overlaps most (ties: smaller prev
/// label). Cells overlapping nothing stay unlinked.
LinkSet match_frame_pair(const LabeledFrame& prev, const LabeledFrame& curr);

/// match_frame_pair over every consecutive pair: F-1 link sets.
std::vector<LinkSet> link_movie(const Movie& movie);

struct NeighborhoodPair {
  int anchor_frame = 0;
  int other_frame = 0;
  std::vector<Label> anchors;
  std::vector<Label> n_prev;  // anchors plus anchor-frame cells near their footprint
  std::vector<Label> n_curr;  // other-frame cells overlapping the dilated footprint
  /// Each n_prev cell mapped to its best-overlapping n_curr cell (absent when
  /// it overlaps none).
  std::map<Label, Label> matching;
  std::map<Label, std::int64_t> matched_overlap;
  double total_overlap_score = 0.0;
};

/// Match a set of anchor cells (and their spatial neighbourhood) against an
/// adjacent frame. The score is the fraction of anchor area explained by the
/// anchors' matched cells in `other`.
NeighborhoodPair neighborhood_correspondence(const LabeledFrame& anchor_frame,
                                             std::span<const Label> anchors,
                                             const LabeledFrame& other,
                                             const AnalysisParams& params);

}  // namespace cellforest
