#include "cellforest/frame.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace cellforest {

LabeledFrame::LabeledFrame(int index, int width, int height)
    : LabeledFrame(index, width, height,
                   std::vector<Label>(static_cast<std::size_t>(std::max(width, 0)) *
                                      static_cast<std::size_t>(std::max(height, 0)))) {}

LabeledFrame::LabeledFrame(int index, int width, int height, std::vector<Label> labels)
    : index_(index), width_(width), height_(height), labels_(std::move(labels)) {
  if (width < 1 || height < 1) {
    throw InputError("frame dimensions must be at least 1x1");
  }
  if (labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InputError("label grid size does not match frame dimensions");
  }
}

Label LabeledFrame::max_label() const {
  Label m = 0;
  for (Label l : labels_) m = std::max(m, l);
  return m;
}

std::vector<Label> LabeledFrame::cell_labels() const {
  std::vector<Label> out;
  std::vector<Label> sorted(labels_);
  std::sort(sorted.begin(), sorted.end());
  for (Label l : sorted) {
    if (l != 0 && (out.empty() || out.back() != l)) out.push_back(l);
  }
  return out;
}

std::int64_t LabeledFrame::foreground_area() const {
  return std::count_if(labels_.begin(), labels_.end(), [](Label l) { return l != 0; });
}

RegionTable::RegionTable(const LabeledFrame& frame) {
  const int w = frame.width();
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const Label l = frame.at(x, y);
      if (l == 0) continue;
      auto [it, inserted] = regions_.try_emplace(l);
      CellRegion& r = it->second;
      if (inserted) {
        r.frame_index = frame.index();
        r.label = l;
        r.bbox = BBox{x, y, x, y};
      }
      r.area_px += 1;
      r.centroid.x += x;
      r.centroid.y += y;
      r.bbox.x0 = std::min(r.bbox.x0, x);
      r.bbox.x1 = std::max(r.bbox.x1, x);
      r.bbox.y0 = std::min(r.bbox.y0, y);
      r.bbox.y1 = std::max(r.bbox.y1, y);
      r.pixels.push_back(y * w + x);
    }
  }
  for (auto& [label, r] : regions_) {
    r.centroid.x /= static_cast<double>(r.area_px);
    r.centroid.y /= static_cast<double>(r.area_px);
  }
}

const CellRegion* RegionTable::find(Label label) const {
  auto it = regions_.find(label);
  return it == regions_.end() ? nullptr : &it->second;
}

const CellRegion& RegionTable::at(Label label) const {
  const CellRegion* r = find(label);
  if (r == nullptr) {
    throw InputError("unknown label " + std::to_string(label));
  }
  return *r;
}

int count_components(std::span<const std::int32_t> pixels, int width, int height) {
  if (pixels.empty()) return 0;
  (void)height;
  int x0 = std::numeric_limits<int>::max(), y0 = x0, x1 = -1, y1 = -1;
  for (std::int32_t p : pixels) {
    const int x = p % width, y = p / width;
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
  }
  const int bw = x1 - x0 + 3, bh = y1 - y0 + 3;
  // 0 = outside, 1 = unvisited member, 2 = visited
  std::vector<std::uint8_t> grid(static_cast<std::size_t>(bw) * bh, 0);
  for (std::int32_t p : pixels) {
    grid[static_cast<std::size_t>(p / width - y0 + 1) * bw + (p % width - x0 + 1)] = 1;
  }
  int components = 0;
  std::vector<int> stack;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] != 1) continue;
    ++components;
    grid[i] = 2;
    stack.push_back(static_cast<int>(i));
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int n = c + dy * bw + dx;
          if (grid[n] == 1) {
            grid[n] = 2;
            stack.push_back(n);
          }
        }
      }
    }
  }
  return components;
}

std::vector<std::string> frame_problems(const LabeledFrame& frame) {
  std::vector<std::string> problems;
  if (frame.width() < 1 || frame.height() < 1) {
    problems.push_back("frame has empty dimensions");
    return problems;
  }
  RegionTable table(frame);
  for (const auto& [label, region] : table.regions()) {
    const int n = count_components(region.pixels, frame.width(), frame.height());
    if (n != 1) {
      std::ostringstream os;
      os << "frame " << frame.index() << ": label " << label << " has " << n
         << " 8-connected components";
      problems.push_back(os.str());
    }
  }
  return problems;
}

void require_same_shape(const LabeledFrame& a, const LabeledFrame& b, const char* what) {
  if (!a.same_shape(b)) {
    std::ostringstream os;
    os << what << ": frame dimensions differ (" << a.width() << "x" << a.height() << " vs "
       << b.width() << "x" << b.height() << ")";
    throw InputError(os.str());
  }
}

}  // namespace cellforest
