#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cellforest {

using Label = std::uint32_t;

/// Raised when inputs violate a structural precondition (dangling labels,
/// mismatched dimensions, unknown labels).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Inclusive pixel rectangle.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// One movie frame: a row-major grid of cell labels, 0 is background.
class LabeledFrame {
 public:
  LabeledFrame() = default;
  LabeledFrame(int index, int width, int height);
  LabeledFrame(int index, int width, int height, std::vector<Label> labels);

  int index() const { return index_; }
  void set_index(int index) { index_ = index; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return labels_.size(); }

  Label at(int x, int y) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  Label& at(int x, int y) { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  Label operator[](std::size_t i) const { return labels_[i]; }
  Label& operator[](std::size_t i) { return labels_[i]; }

  std::span<const Label> labels() const { return labels_; }
  std::span<Label> labels() { return labels_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  Label max_label() const;
  /// Sorted distinct nonzero labels.
  std::vector<Label> cell_labels() const;
  std::int64_t foreground_area() const;

  bool same_shape(const LabeledFrame& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const LabeledFrame& a, const LabeledFrame& b) {
    return a.index_ == b.index_ && a.width_ == b.width_ && a.height_ == b.height_ &&
           a.labels_ == b.labels_;
  }

 private:
  int index_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<Label> labels_;
};

struct Movie {
  std::vector<LabeledFrame> frames;
  double interval_min = 5.0;

  int frame_count() const { return static_cast<int>(frames.size()); }
  int width() const { return frames.empty() ? 0 : frames.front().width(); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }
  double time_min(int frame_index) const { return frame_index * interval_min; }

  friend bool operator==(const Movie&, const Movie&) = default;
};

/// Cached view of one labeled region. `pixels` are sorted linear indices.
struct CellRegion {
  int frame_index = 0;
  Label label = 0;
  std::int64_t area_px = 0;
  Point centroid;
  BBox bbox;
  std::vector<std::int32_t> pixels;
};

/// All regions of one frame, collected in a single scan.
class RegionTable {
 public:
  explicit RegionTable(const LabeledFrame& frame);

  const CellRegion* find(Label label) const;
  const CellRegion& at(Label label) const;
  bool contains(Label label) const { return find(label) != nullptr; }
  const std::map<Label, CellRegion>& regions() const { return regions_; }
  std::size_t size() const { return regions_.size(); }

 private:
  std::map<Label, CellRegion> regions_;
};

/// Human-readable invariant violations of a frame (empty when the frame is
/// well formed). Checks dimensions and 8-connectivity of every label.
std::vector<std::string> frame_problems(const LabeledFrame& frame);

/// Number of 8-connected components among the given pixels.
int count_components(std::span<const std::int32_t> pixels, int width, int height);

void require_same_shape(const LabeledFrame& a, const LabeledFrame& b, const char* what);

}  // namespace cellforest
