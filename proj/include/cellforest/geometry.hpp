#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cellforest/frame.hpp"

namespace cellforest {

/// Split request that cannot be honoured (more parts than pixels, or two
/// seeds snapping to the same pixel). Callers treat it as a failed correction.
class SplitInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A set of pixels of one frame geometry, as sorted linear indices.
struct PixelSet {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> pixels;

  std::int64_t area() const { return static_cast<std::int64_t>(pixels.size()); }
  bool empty() const { return pixels.empty(); }
};

PixelSet pixels_of(const LabeledFrame& frame, Label label);
PixelSet pixels_of(const CellRegion& region, int width, int height);
PixelSet set_union(const PixelSet& a, const PixelSet& b);
Point centroid_of(const PixelSet& set);

std::int64_t pixel_overlap(const PixelSet& a, const PixelSet& b);
std::int64_t pixel_overlap(const LabeledFrame& fa, Label a, const LabeledFrame& fb, Label b);

/// True when some pixel of `a` is 8-adjacent to (or coincides with) some pixel of `b`.
bool regions_touch(const PixelSet& a, const PixelSet& b);
bool regions_touch(const LabeledFrame& frame, Label a, Label b);

struct MergeResult {
  LabeledFrame frame;
  Label label = 0;
};

/// Relabel the union of `labels` to one fresh label (max label + 1).
MergeResult merge_regions(const LabeledFrame& frame, std::span<const Label> labels);

struct SplitResult {
  LabeledFrame frame;
  std::vector<Label> labels;  // labels[i] holds the part grown from seeds[i]
};

/// Partition one region among k >= 2 seeds by geodesic (in-region)
/// nearest-seed distance. Each seed first snaps to its nearest region pixel;
/// ties go to the lower seed index. Parts left disconnected hand their stray
/// components to the neighbouring part with the longest shared boundary.
SplitResult split_region_by_seeds(const LabeledFrame& frame, Label label,
                                  std::span<const Point> seeds);

/// Equivalence classes of `labels` under the transitive closure of
/// regions_touch. Classes are sorted by their smallest label.
std::vector<std::vector<Label>> connected_clusters(const LabeledFrame& frame,
                                                   std::span<const Label> labels);

/// Chebyshev dilation of a pixel set by `radius`, clipped to the frame.
PixelSet dilate(const PixelSet& set, int radius);

}  // namespace cellforest
