#include "cellforest/tracking.hpp"

#include <algorithm>
#include <set>

#include "cellforest/geometry.hpp"

namespace cellforest {

void AnalysisParams::validate() const {
  if (!(T > 0.0)) throw InputError("T must be > 0");
  if (!(M > 0.0)) throw InputError("M must be > 0");
  if (min_life_frames < 1) throw InputError("min_life_frames must be >= 1");
  if (neighborhood_radius_px < 0) throw InputError("neighborhood_radius_px must be >= 0");
  if (max_sweeps < 1) throw InputError("max_sweeps must be >= 1");
}

LinkSet match_frame_pair(const LabeledFrame& prev, const LabeledFrame& curr) {
  require_same_shape(prev, curr, "match_frame_pair");
  std::map<std::pair<Label, Label>, std::int64_t> overlap;  // (curr, prev) -> pixels
  std::map<Label, std::int64_t> curr_area;
  for (std::size_t i = 0; i < curr.size(); ++i) {
    const Label c = curr[i];
    if (c == 0) continue;
    ++curr_area[c];
    const Label p = prev[i];
    if (p != 0) ++overlap[{c, p}];
  }
  LinkSet links;
  auto it = overlap.begin();
  while (it != overlap.end()) {
    const Label c = it->first.first;
    // Entries for one curr label are contiguous and ordered by prev label, so a
    // strict comparison keeps the smallest prev label on ties.
    Label best_prev = it->first.second;
    std::int64_t best = it->second;
    for (; it != overlap.end() && it->first.first == c; ++it) {
      if (it->second > best) {
        best = it->second;
        best_prev = it->first.second;
      }
    }
    links.push_back(TrackingLink{CellKey{prev.index(), best_prev}, CellKey{curr.index(), c}, best,
                                 static_cast<double>(best) / static_cast<double>(curr_area[c])});
  }
  return links;
}

std::vector<LinkSet> link_movie(const Movie& movie) {
  std::vector<LinkSet> out;
  for (int f = 0; f + 1 < movie.frame_count(); ++f) {
    out.push_back(match_frame_pair(movie.frames[f], movie.frames[f + 1]));
  }
  return out;
}

NeighborhoodPair neighborhood_correspondence(const LabeledFrame& anchor_frame,
                                             std::span<const Label> anchors,
                                             const LabeledFrame& other,
                                             const AnalysisParams& params) {
  if (anchors.empty()) throw InputError("neighborhood_correspondence: empty anchor set");
  require_same_shape(anchor_frame, other, "neighborhood_correspondence");
  RegionTable table(anchor_frame);

  NeighborhoodPair out;
  out.anchor_frame = anchor_frame.index();
  out.other_frame = other.index();
  out.anchors.assign(anchors.begin(), anchors.end());
  std::sort(out.anchors.begin(), out.anchors.end());
  out.anchors.erase(std::unique(out.anchors.begin(), out.anchors.end()), out.anchors.end());

  PixelSet footprint{anchor_frame.width(), anchor_frame.height(), {}};
  for (Label a : out.anchors) {
    footprint = set_union(footprint, pixels_of(table.at(a), anchor_frame.width(),
                                               anchor_frame.height()));
  }
  const PixelSet zone = dilate(footprint, params.neighborhood_radius_px);

  std::set<Label> prev_set(out.anchors.begin(), out.anchors.end());
  std::set<Label> curr_set;
  for (std::int32_t p : zone.pixels) {
    if (anchor_frame[p] != 0) prev_set.insert(anchor_frame[p]);
    if (other[p] != 0) curr_set.insert(other[p]);
  }
  out.n_prev.assign(prev_set.begin(), prev_set.end());
  out.n_curr.assign(curr_set.begin(), curr_set.end());

  std::int64_t anchor_area = 0;
  std::int64_t explained = 0;
  for (Label c : out.n_prev) {
    const CellRegion& region = table.at(c);
    std::map<Label, std::int64_t> counts;
    for (std::int32_t p : region.pixels) {
      const Label o = other[p];
      if (o != 0 && curr_set.contains(o)) ++counts[o];
    }
    Label best_label = 0;
    std::int64_t best = 0;
    for (const auto& [o, n] : counts) {
      if (n > best) {
        best = n;
        best_label = o;
      }
    }
    if (best > 0) {
      out.matching[c] = best_label;
      out.matched_overlap[c] = best;
    }
    if (std::binary_search(out.anchors.begin(), out.anchors.end(), c)) {
      anchor_area += region.area_px;
      explained += best;
    }
  }
  out.total_overlap_score =
      anchor_area > 0 ? static_cast<double>(explained) / static_cast<double>(anchor_area) : 0.0;
  return out;
}

}  // namespace cellforest
