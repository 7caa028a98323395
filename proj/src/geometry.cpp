#include "cellforest/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <tuple>

namespace cellforest {

PixelSet pixels_of(const LabeledFrame& frame, Label label) {
  PixelSet out{frame.width(), frame.height(), {}};
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame[i] == label) out.pixels.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

PixelSet pixels_of(const CellRegion& region, int width, int height) {
  return PixelSet{width, height, region.pixels};
}

PixelSet set_union(const PixelSet& a, const PixelSet& b) {
  PixelSet out{a.width, a.height, {}};
  out.pixels.reserve(a.pixels.size() + b.pixels.size());
  std::set_union(a.pixels.begin(), a.pixels.end(), b.pixels.begin(), b.pixels.end(),
                 std::back_inserter(out.pixels));
  return out;
}

Point centroid_of(const PixelSet& set) {
  Point c;
  if (set.empty()) return c;
  for (std::int32_t p : set.pixels) {
    c.x += p % set.width;
    c.y += p / set.width;
  }
  c.x /= static_cast<double>(set.pixels.size());
  c.y /= static_cast<double>(set.pixels.size());
  return c;
}

std::int64_t pixel_overlap(const PixelSet& a, const PixelSet& b) {
  if (a.width != b.width || a.height != b.height) {
    throw InputError("pixel_overlap: frame dimensions differ");
  }
  std::int64_t n = 0;
  auto ia = a.pixels.begin();
  auto ib = b.pixels.begin();
  while (ia != a.pixels.end() && ib != b.pixels.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

std::int64_t pixel_overlap(const LabeledFrame& fa, Label a, const LabeledFrame& fb, Label b) {
  require_same_shape(fa, fb, "pixel_overlap");
  std::int64_t n = 0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    if (fa[i] == a && fb[i] == b) ++n;
  }
  return n;
}

bool regions_touch(const PixelSet& a, const PixelSet& b) {
  if (a.empty() || b.empty()) return false;
  const PixelSet& small = a.pixels.size() <= b.pixels.size() ? a : b;
  const PixelSet& large = &small == &a ? b : a;
  for (std::int32_t p : small.pixels) {
    const int x = p % small.width, y = p / small.width;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= small.width || ny >= small.height) continue;
        const std::int32_t q = ny * small.width + nx;
        if (std::binary_search(large.pixels.begin(), large.pixels.end(), q)) return true;
      }
    }
  }
  return false;
}

bool regions_touch(const LabeledFrame& frame, Label a, Label b) {
  return regions_touch(pixels_of(frame, a), pixels_of(frame, b));
}

MergeResult merge_regions(const LabeledFrame& frame, std::span<const Label> labels) {
  if (labels.empty()) throw InputError("merge_regions: no labels given");
  RegionTable table(frame);
  for (Label l : labels) {
    if (!table.contains(l)) throw InputError("merge_regions: unknown label " + std::to_string(l));
  }
  MergeResult out{frame, frame.max_label() + 1};
  std::set<Label> members(labels.begin(), labels.end());
  for (const auto& [label, region] : table.regions()) {
    if (!members.contains(label)) continue;
    for (std::int32_t p : region.pixels) out.frame[p] = out.label;
  }
  return out;
}

namespace {

constexpr double kDiagonal = 1.4142135623730951;

// Pixels of `region` grouped into 8-connected components.
std::vector<std::vector<std::int32_t>> components_of(const std::vector<std::int32_t>& pixels,
                                                     int width, int height) {
  std::vector<std::vector<std::int32_t>> comps;
  std::set<std::int32_t> unvisited(pixels.begin(), pixels.end());
  while (!unvisited.empty()) {
    std::vector<std::int32_t> comp;
    std::vector<std::int32_t> stack{*unvisited.begin()};
    unvisited.erase(unvisited.begin());
    while (!stack.empty()) {
      const std::int32_t p = stack.back();
      stack.pop_back();
      comp.push_back(p);
      const int x = p % width, y = p / width;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          auto it = unvisited.find(ny * width + nx);
          if (it != unvisited.end()) {
            stack.push_back(*it);
            unvisited.erase(it);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

}  // namespace

SplitResult split_region_by_seeds(const LabeledFrame& frame, Label label,
                                  std::span<const Point> seeds) {
  RegionTable table(frame);
  const CellRegion& region = table.at(label);
  const std::size_t k = seeds.size();
  if (k < 2) throw SplitInfeasible("split needs at least two seeds");
  if (static_cast<std::int64_t>(k) > region.area_px) {
    throw SplitInfeasible("more seeds than region pixels");
  }
  const int w = frame.width(), h = frame.height();

  // Snap each seed to its nearest region pixel (lowest index on ties).
  std::vector<std::int32_t> anchor(k);
  for (std::size_t s = 0; s < k; ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (std::int32_t p : region.pixels) {
      const double dx = p % w - seeds[s].x, dy = p / w - seeds[s].y;
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        anchor[s] = p;
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (anchor[i] == anchor[j]) {
        throw SplitInfeasible("seeds " + std::to_string(i) + " and " + std::to_string(j) +
                              " snap to the same pixel");
      }
    }
  }

  // Multi-source Dijkstra restricted to the region; heap order (distance,
  // seed) makes the lower seed index win exact ties.
  std::map<std::int32_t, std::size_t> slot;
  for (std::size_t i = 0; i < region.pixels.size(); ++i) slot[region.pixels[i]] = i;
  const std::size_t n = region.pixels.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> owner(n, kNone);
  using Entry = std::tuple<double, std::size_t, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t s = 0; s < k; ++s) {
    dist[slot[anchor[s]]] = 0.0;
    heap.emplace(0.0, s, anchor[s]);
  }
  while (!heap.empty()) {
    auto [d, s, p] = heap.top();
    heap.pop();
    const std::size_t i = slot[p];
    if (owner[i] != kNone) continue;
    owner[i] = s;
    const int x = p % w, y = p / w;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        auto it = slot.find(ny * w + nx);
        if (it == slot.end() || owner[it->second] != kNone) continue;
        const double nd = d + ((dx != 0 && dy != 0) ? kDiagonal : 1.0);
        if (nd <= dist[it->second]) {
          dist[it->second] = nd;
          heap.emplace(nd, s, it->first);
        }
      }
    }
  }
  // Pixels in components without any seed go to the Euclidean-nearest seed.
  for (std::size_t i = 0; i < n; ++i) {
    if (owner[i] != kNone) continue;
    const std::int32_t p = region.pixels[i];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < k; ++s) {
      const double dx = p % w - anchor[s] % w, dy = p / w - anchor[s] / w;
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        owner[i] = s;
      }
    }
  }

  // Stray components donate themselves to the part with the longest shared boundary.
  std::vector<std::vector<std::int32_t>> parts(k);
  for (std::size_t i = 0; i < n; ++i) parts[owner[i]].push_back(region.pixels[i]);
  for (std::size_t s = 0; s < k; ++s) {
    auto comps = components_of(parts[s], w, h);
    if (comps.size() <= 1) continue;
    for (auto& comp : comps) {
      if (std::binary_search(comp.begin(), comp.end(), anchor[s])) continue;
      std::vector<std::int64_t> shared(k, 0);
      for (std::int32_t p : comp) {
        const int x = p % w, y = p / w;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            auto it = slot.find(ny * w + nx);
            if (it == slot.end()) continue;
            const std::size_t o = owner[it->second];
            if (o != s) ++shared[o];
          }
        }
      }
      auto best = std::max_element(shared.begin(), shared.end());
      if (*best == 0) continue;
      const std::size_t target = static_cast<std::size_t>(best - shared.begin());
      for (std::int32_t p : comp) owner[slot[p]] = target;
    }
    // Rebuild the part lists after donations.
    for (auto& part : parts) part.clear();
    for (std::size_t i = 0; i < n; ++i) parts[owner[i]].push_back(region.pixels[i]);
  }

  SplitResult out{frame, {}};
  Label next = frame.max_label() + 1;
  for (std::size_t s = 0; s < k; ++s) {
    if (parts[s].empty()) throw SplitInfeasible("split produced an empty part");
    out.labels.push_back(next++);
  }
  for (std::size_t i = 0; i < n; ++i) out.frame[region.pixels[i]] = out.labels[owner[i]];
  return out;
}

std::vector<std::vector<Label>> connected_clusters(const LabeledFrame& frame,
                                                   std::span<const Label> labels) {
  std::vector<Label> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  RegionTable table(frame);
  std::vector<PixelSet> sets;
  for (Label l : sorted) sets.push_back(pixels_of(table.at(l), frame.width(), frame.height()));

  std::vector<std::size_t> parent(sorted.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (find(i) == find(j)) continue;
      if (regions_touch(sets[i], sets[j])) parent[std::max(find(i), find(j))] = std::min(find(i), find(j));
    }
  }
  std::map<std::size_t, std::vector<Label>> classes;
  for (std::size_t i = 0; i < sorted.size(); ++i) classes[find(i)].push_back(sorted[i]);
  std::vector<std::vector<Label>> out;
  for (auto& [root, members] : classes) out.push_back(std::move(members));
  return out;
}

PixelSet dilate(const PixelSet& set, int radius) {
  PixelSet out{set.width, set.height, {}};
  if (set.empty()) return out;
  int x0 = set.width, y0 = set.height, x1 = -1, y1 = -1;
  for (std::int32_t p : set.pixels) {
    x0 = std::min(x0, p % set.width);
    x1 = std::max(x1, p % set.width);
    y0 = std::min(y0, p / set.width);
    y1 = std::max(y1, p / set.width);
  }
  x0 = std::max(0, x0 - radius);
  y0 = std::max(0, y0 - radius);
  x1 = std::min(set.width - 1, x1 + radius);
  y1 = std::min(set.height - 1, y1 + radius);
  const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
  for (std::int32_t p : set.pixels) mask[(p / set.width - y0) * bw + (p % set.width - x0)] = 1;
  // Separable max filter: rows, then columns.
  std::vector<std::uint8_t> rows(mask.size(), 0);
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      if (!mask[y * bw + x]) continue;
      for (int nx = std::max(0, x - radius); nx <= std::min(bw - 1, x + radius); ++nx) {
        rows[y * bw + nx] = 1;
      }
    }
  }
  std::vector<std::uint8_t> full(mask.size(), 0);
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      if (!rows[y * bw + x]) continue;
      for (int ny = std::max(0, y - radius); ny <= std::min(bh - 1, y + radius); ++ny) {
        full[ny * bw + x] = 1;
      }
    }
  }
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      if (full[y * bw + x]) out.pixels.push_back((y + y0) * set.width + (x + x0));
    }
  }
  return out;
}

}  // namespace cellforest
