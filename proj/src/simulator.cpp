#include "cellforest/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "cellforest/geometry.hpp"

namespace cellforest {

void SimConfig::validate() const {
  if (n_clones < 1) throw InputError("n_clones must be >= 1");
  if (frames < 1) throw InputError("frames must be >= 1");
  if (width < 8 || height < 8) throw InputError("grid must be at least 8x8");
  if (!(cell_width > 0.0)) throw InputError("cell_width must be > 0");
  if (!(initial_length >= cell_width)) throw InputError("initial_length must be >= cell_width");
  if (!(growth_rate >= 1.0)) throw InputError("growth_rate must be >= 1");
  if (!(division_length_cv >= 0.0)) throw InputError("division_length_cv must be >= 0");
  if (!(division_length_mean > initial_length)) {
    throw InputError("division_length_mean must exceed initial_length");
  }
  if (!(interval_min > 0.0)) throw InputError("interval_min must be > 0");
  if (!founders.empty()) {
    if (static_cast<int>(founders.size()) != n_clones) {
      throw InputError("founders must list exactly n_clones positions");
    }
    for (const Founder& f : founders) {
      if (!(f.x >= 0.0 && f.x < width && f.y >= 0.0 && f.y < height)) {
        throw InputError("founder outside the grid");
      }
    }
  }
}

void ErrorConfig::validate() const {
  for (double p : {p_over_transient, p_over_persistent, p_under}) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("error probabilities must lie in [0, 1]");
  }
  if (persist_len < 1) throw InputError("persist_len must be >= 1");
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::over_transient: return "over_transient";
    case ErrorKind::over_persistent: return "over_persistent";
    case ErrorKind::under: return "under";
    case ErrorKind::skipped: return "skipped";
  }
  return "skipped";
}

namespace {

struct Rod {
  int id = 0;
  int clone = 0;  // 1-based founder id
  int mother = -1;
  double x = 0.0;
  double y = 0.0;
  double angle = 0.0;
  double length = 0.0;  // tip to tip
  double division_length = 0.0;
};

struct Segment2 {
  double ax, ay, bx, by;
};

Segment2 axis_of(const Rod& r, double width) {
  const double half = std::max(0.0, (r.length - width) / 2.0);
  const double c = std::cos(r.angle), s = std::sin(r.angle);
  return {r.x - half * c, r.y - half * s, r.x + half * c, r.y + half * s};
}

double point_segment_dist2(double px, double py, const Segment2& s) {
  const double vx = s.bx - s.ax, vy = s.by - s.ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - s.ax) * vx + (py - s.ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s.ax + t * vx), dy = py - (s.ay + t * vy);
  return dx * dx + dy * dy;
}

// Closest points between two segments; returns squared distance and the
// vector from the point on `p` to the point on `q`.
double segment_gap(const Segment2& p, const Segment2& q, double& gx, double& gy) {
  const double d1x = p.bx - p.ax, d1y = p.by - p.ay;
  const double d2x = q.bx - q.ax, d2y = q.by - q.ay;
  const double rx = p.ax - q.ax, ry = p.ay - q.ay;
  const double a = d1x * d1x + d1y * d1y, e = d2x * d2x + d2y * d2y;
  const double f = d2x * rx + d2y * ry;
  constexpr double eps = 1e-12;
  double s = 0.0, t = 0.0;
  if (a <= eps && e <= eps) {
    s = t = 0.0;
  } else if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1x * rx + d1y * ry;
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1x * d2x + d1y * d2y;
      const double denom = a * e - b * b;
      s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  const double c1x = p.ax + d1x * s, c1y = p.ay + d1y * s;
  const double c2x = q.ax + d2x * t, c2y = q.ay + d2y * t;
  gx = c2x - c1x;
  gy = c2y - c1y;
  return gx * gx + gy * gy;
}

class Colony {
 public:
  Colony(const SimConfig& config, std::mt19937_64& rng) : cfg_(config), rng_(rng) {}

  std::vector<Rod>& rods() { return rods_; }

  void seed_founders() {
    std::uniform_real_distribution<double> ux(cfg_.initial_length, cfg_.width - cfg_.initial_length);
    std::uniform_real_distribution<double> uy(cfg_.initial_length, cfg_.height - cfg_.initial_length);
    std::uniform_real_distribution<double> ua(0.0, std::numbers::pi);
    const double min_sep = 2.0 * cfg_.initial_length;
    for (int c = 1; c <= cfg_.n_clones; ++c) {
      Rod r;
      if (!cfg_.founders.empty()) {
        const Founder& f = cfg_.founders[static_cast<std::size_t>(c - 1)];
        r.id = next_id_++;
        r.clone = c;
        r.x = f.x;
        r.y = f.y;
        r.angle = f.angle_deg * std::numbers::pi / 180.0;
        r.length = cfg_.initial_length;
        r.division_length = sample_division_length();
        rods_.push_back(r);
        continue;
      }
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        r.x = ux(rng_);
        r.y = uy(rng_);
        placed = std::all_of(rods_.begin(), rods_.end(), [&](const Rod& o) {
          return std::hypot(o.x - r.x, o.y - r.y) >= min_sep;
        });
      }
      if (!placed) throw GrowthOverflow(0, "no room to place founder " + std::to_string(c));
      r.id = next_id_++;
      r.clone = c;
      r.angle = ua(rng_);
      r.length = cfg_.initial_length;
      r.division_length = sample_division_length();
      rods_.push_back(r);
    }
  }

  /// Grow and divide. Returns (daughter id -> mother id).
  std::map<int, int> grow() {
    std::map<int, int> born;
    std::vector<Rod> next;
    std::uniform_real_distribution<double> noise(-cfg_.orientation_noise_deg,
                                                 cfg_.orientation_noise_deg);
    for (Rod r : rods_) {
      r.length *= cfg_.growth_rate;
      if (r.length < r.division_length) {
        next.push_back(r);
        continue;
      }
      const double c = std::cos(r.angle), s = std::sin(r.angle);
      for (int side : {-1, 1}) {
        Rod d;
        d.id = next_id_++;
        d.clone = r.clone;
        d.mother = r.id;
        d.length = r.length / 2.0;
        d.x = r.x + side * c * r.length / 4.0;
        d.y = r.y + side * s * r.length / 4.0;
        d.angle = r.angle + noise(rng_) * std::numbers::pi / 180.0;
        d.division_length = sample_division_length();
        born[d.id] = r.id;
        next.push_back(d);
      }
    }
    rods_ = std::move(next);
    return born;
  }

  /// Push overlapping rods apart until no pair overlaps (50 iterations max,
  /// then a small jitter for the pairs that still collide).
  void relax() {
    bool colliding = true;
    for (int iter = 0; iter < 50 && colliding; ++iter) colliding = relax_pass(false);
    if (colliding) relax_pass(true);
  }

  /// Paint rods onto a label grid: each pixel goes to the rod whose axis is
  /// nearest (within half a width). Labels follow rod id order.
  LabeledFrame rasterize(int frame_index, std::vector<int>& label_to_id) {
    const int W = cfg_.width, H = cfg_.height;
    const double r = cfg_.cell_width / 2.0;
    std::vector<double> best(static_cast<std::size_t>(W) * H, std::numeric_limits<double>::infinity());
    std::vector<int> owner(best.size(), -1);
    for (std::size_t i = 0; i < rods_.size(); ++i) {
      const Segment2 s = axis_of(rods_[i], cfg_.cell_width);
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min(s.ax, s.bx) - r - 1)));
      const int x1 = std::min(W - 1, static_cast<int>(std::ceil(std::max(s.ax, s.bx) + r + 1)));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min(s.ay, s.by) - r - 1)));
      const int y1 = std::min(H - 1, static_cast<int>(std::ceil(std::max(s.ay, s.by) + r + 1)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double d2 = point_segment_dist2(x + 0.5, y + 0.5, s);
          const std::size_t p = static_cast<std::size_t>(y) * W + x;
          if (d2 <= r * r && d2 < best[p]) {
            best[p] = d2;
            owner[p] = static_cast<int>(i);
          }
        }
      }
    }
    LabeledFrame frame(frame_index, W, H);
    label_to_id.assign(1, -1);
    for (std::size_t i = 0; i < rods_.size(); ++i) label_to_id.push_back(rods_[i].id);
    for (std::size_t p = 0; p < owner.size(); ++p) {
      if (owner[p] >= 0) frame[p] = static_cast<Label>(owner[p] + 1);
    }
    // Keep only the largest 8-connected piece of each rod.
    RegionTable table(frame);
    for (std::size_t i = 0; i < rods_.size(); ++i) {
      const Label l = static_cast<Label>(i + 1);
      const CellRegion* region = table.find(l);
      if (region == nullptr) {
        throw GrowthOverflow(frame_index, "cell " + std::to_string(rods_[i].id) + " has no pixels");
      }
      if (count_components(region->pixels, W, H) > 1) keep_largest_piece(frame, *region);
    }
    return frame;
  }

 private:
  double sample_division_length() {
    const double sd = cfg_.division_length_cv * cfg_.division_length_mean;
    std::normal_distribution<double> n(cfg_.division_length_mean, sd > 0.0 ? sd : 1e-12);
    return std::max(n(rng_), 1.25 * cfg_.initial_length);
  }

  void keep_largest_piece(LabeledFrame& frame, const CellRegion& region) {
    const int W = frame.width();
    std::set<std::int32_t> left(region.pixels.begin(), region.pixels.end());
    std::vector<std::int32_t> largest;
    while (!left.empty()) {
      std::vector<std::int32_t> comp, stack{*left.begin()};
      left.erase(left.begin());
      while (!stack.empty()) {
        const std::int32_t p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p % W + dx, ny = p / W + dy;
            if (!frame.in_bounds(nx, ny)) continue;
            auto it = left.find(ny * W + nx);
            if (it != left.end()) {
              stack.push_back(*it);
              left.erase(it);
            }
          }
        }
      }
      if (comp.size() > largest.size()) largest = std::move(comp);
    }
    std::set<std::int32_t> keep(largest.begin(), largest.end());
    for (std::int32_t p : region.pixels) {
      if (!keep.contains(p)) frame[p] = 0;
    }
  }

  void clamp_inside(Rod& r) {
    const double half = r.length / 2.0;
    const double mx = std::min(half + 1.0, cfg_.width / 2.0);
    const double my = std::min(half + 1.0, cfg_.height / 2.0);
    r.x = std::clamp(r.x, mx, cfg_.width - mx);
    r.y = std::clamp(r.y, my, cfg_.height - my);
  }

  bool relax_pass(bool jitter) {
    const double w = cfg_.cell_width;
    double max_len = 0.0;
    for (const Rod& r : rods_) max_len = std::max(max_len, r.length);
    const double bucket = max_len + w;
    const int gw = static_cast<int>(cfg_.width / bucket) + 1;
    const int gh = static_cast<int>(cfg_.height / bucket) + 1;
    std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(gw) * gh);
    auto cell_of = [&](const Rod& r) {
      const int gx = std::clamp(static_cast<int>(r.x / bucket), 0, gw - 1);
      const int gy = std::clamp(static_cast<int>(r.y / bucket), 0, gh - 1);
      return std::pair{gx, gy};
    };
    for (std::size_t i = 0; i < rods_.size(); ++i) {
      auto [gx, gy] = cell_of(rods_[i]);
      grid[static_cast<std::size_t>(gy) * gw + gx].push_back(i);
    }
    std::uniform_real_distribution<double> shake(-0.1, 0.1);
    bool colliding = false;
    for (std::size_t i = 0; i < rods_.size(); ++i) {
      auto [gx, gy] = cell_of(rods_[i]);
      for (int ny = std::max(0, gy - 1); ny <= std::min(gh - 1, gy + 1); ++ny) {
        for (int nx = std::max(0, gx - 1); nx <= std::min(gw - 1, gx + 1); ++nx) {
          for (std::size_t j : grid[static_cast<std::size_t>(ny) * gw + nx]) {
            if (j <= i) continue;
            Rod& a = rods_[i];
            Rod& b = rods_[j];
            double vx = 0.0, vy = 0.0;
            const double d2 = segment_gap(axis_of(a, w), axis_of(b, w), vx, vy);
            if (d2 >= w * w) continue;
            double d = std::sqrt(d2);
            if (d < 1e-9) {
              // Coincident axes: separate along the centre line, or across the axis.
              vx = b.x - a.x;
              vy = b.y - a.y;
              d = std::hypot(vx, vy);
              if (d < 1e-9) {
                vx = -std::sin(a.angle);
                vy = std::cos(a.angle);
                d = 1.0;
              }
              vx /= d;
              vy /= d;
              d = 0.0;
            } else {
              vx /= d;
              vy /= d;
            }
            const double push = (w - d) / 2.0 + 1e-3;
            if (w - d > 0.05) colliding = true;
            a.x -= vx * push;
            a.y -= vy * push;
            b.x += vx * push;
            b.y += vy * push;
            if (jitter) {
              b.x += shake(rng_);
              b.y += shake(rng_);
            }
          }
        }
      }
    }
    for (Rod& r : rods_) clamp_inside(r);
    return colliding;
  }

  const SimConfig& cfg_;
  std::mt19937_64& rng_;
  std::vector<Rod> rods_;
  int next_id_ = 0;
};

}  // namespace

SimResult simulate(const SimConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  Colony colony(config, rng);
  colony.seed_founders();
  colony.relax();

  SimResult out;
  out.movie.interval_min = config.interval_min;
  std::vector<int> label_to_id;
  out.movie.frames.push_back(colony.rasterize(0, label_to_id));
  std::map<int, Label> prev_label;  // rod id -> label at the previous frame
  for (std::size_t l = 1; l < label_to_id.size(); ++l) prev_label[label_to_id[l]] = static_cast<Label>(l);

  for (int f = 1; f < config.frames; ++f) {
    std::map<int, int> born = colony.grow();
    if (config.death && config.death->frame == f) {
      auto& rods = colony.rods();
      // Prefer the lowest-id cell whose sister is still alive, so the loss
      // leaves a lonely sibling; it must have existed at the previous frame.
      auto victim = rods.end();
      for (auto it = rods.begin(); it != rods.end(); ++it) {
        if (it->clone != config.death->clone || born.contains(it->id)) continue;
        const bool has_sister = it->mother >= 0 && std::any_of(rods.begin(), rods.end(), [&](const Rod& o) {
          return o.id != it->id && o.mother == it->mother;
        });
        if (victim == rods.end()) victim = it;
        if (has_sister) {
          victim = it;
          break;
        }
      }
      if (victim != rods.end()) {
        auto pl = prev_label.find(victim->id);
        if (pl != prev_label.end()) out.removed_cell = CellKey{f - 1, pl->second};
        rods.erase(victim);
      }
    }
    colony.relax();
    LabeledFrame frame = colony.rasterize(f, label_to_id);

    LinkSet links;
    std::map<int, Label> cur_label;
    for (std::size_t l = 1; l < label_to_id.size(); ++l) {
      const int id = label_to_id[l];
      cur_label[id] = static_cast<Label>(l);
      int pred = id;
      if (auto b = born.find(id); b != born.end()) pred = b->second;
      auto pl = prev_label.find(pred);
      if (pl == prev_label.end()) continue;
      links.push_back(TrackingLink{CellKey{f - 1, pl->second}, CellKey{f, static_cast<Label>(l)}, 0, 0.0});
    }
    // Fill in overlap statistics for the true links.
    const LabeledFrame& prev = out.movie.frames.back();
    std::map<std::pair<Label, Label>, std::int64_t> ov;
    std::map<Label, std::int64_t> area;
    for (std::size_t p = 0; p < frame.size(); ++p) {
      if (frame[p] == 0) continue;
      ++area[frame[p]];
      if (prev[p] != 0) ++ov[{frame[p], prev[p]}];
    }
    for (TrackingLink& link : links) {
      link.overlap_px = ov[{link.curr.label, link.prev.label}];
      link.score_fraction = static_cast<double>(link.overlap_px) /
                            static_cast<double>(std::max<std::int64_t>(1, area[link.curr.label]));
    }
    out.true_links.push_back(std::move(links));
    out.movie.frames.push_back(std::move(frame));
    prev_label = std::move(cur_label);
  }
  out.truth = build_forest(out.movie, out.true_links);
  return out;
}

// ---------------------------------------------------------------------------
// Error injection

std::vector<std::pair<Label, Label>> touching_pairs(const LabeledFrame& frame) {
  std::set<std::pair<Label, Label>> pairs;
  const int W = frame.width(), H = frame.height();
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const Label a = frame.at(x, y);
      if (a == 0) continue;
      const int nbr[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
      for (const auto& n : nbr) {
        const int nx = x + n[0], ny = y + n[1];
        if (!frame.in_bounds(nx, ny)) continue;
        const Label b = frame.at(nx, ny);
        if (b != 0 && b != a) pairs.insert({std::min(a, b), std::max(a, b)});
      }
    }
  }
  return {pairs.begin(), pairs.end()};
}

std::optional<std::vector<Label>> fragment_cell(LabeledFrame& frame, Label label,
                                                std::span<const double> cut_fractions) {
  const PixelSet cell = pixels_of(frame, label);
  if (cell.empty() || cut_fractions.empty()) return std::nullopt;
  const int W = frame.width();
  const Point c = centroid_of(cell);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::int32_t p : cell.pixels) {
    const double dx = p % W - c.x, dy = p / W - c.y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  // Principal axis, oriented with a non-negative x component (then y) so the
  // same fraction lands on the same end from frame to frame.
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  double ax = std::cos(theta), ay = std::sin(theta);
  if (ax < -1e-12 || (std::abs(ax) <= 1e-12 && ay < 0.0)) {
    ax = -ax;
    ay = -ay;
  }
  std::vector<double> proj;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::int32_t p : cell.pixels) {
    const double s = (p % W - c.x) * ax + (p / W - c.y) * ay;
    proj.push_back(s);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  std::vector<double> cuts;
  for (double f : cut_fractions) cuts.push_back(lo + f * (hi - lo));
  std::sort(cuts.begin(), cuts.end());

  std::vector<std::vector<std::int32_t>> parts(cuts.size() + 1);
  for (std::size_t i = 0; i < cell.pixels.size(); ++i) {
    const auto piece = std::upper_bound(cuts.begin(), cuts.end(), proj[i]) - cuts.begin();
    parts[static_cast<std::size_t>(piece)].push_back(cell.pixels[i]);
  }
  for (const auto& part : parts) {
    if (part.empty() || count_components(part, W, frame.height()) != 1) return std::nullopt;
  }
  std::vector<Label> labels{label};
  Label next = frame.max_label() + 1;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    labels.push_back(next);
    for (std::int32_t p : parts[i]) frame[p] = next;
    ++next;
  }
  return labels;
}

namespace {

struct PersistentPlan {
  std::map<int, Label> label_at;  // frame -> true label
  double cut = 0.5;
};

}  // namespace

CorruptedMovie inject_errors(const Movie& movie, const LineageForest& truth,
                             const ErrorConfig& config) {
  config.validate();
  CorruptedMovie out{movie, {}};
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Persistent events are planned per true segment up front.
  std::vector<PersistentPlan> plans;
  for (const CellSegment& seg : extract_segments(truth)) {
    if (unit(rng) >= config.p_over_persistent) continue;
    const int first = std::max(seg.start_frame, 1);
    if (first > seg.end_frame) continue;
    std::uniform_int_distribution<int> start(first, seg.end_frame);
    const int s = start(rng);
    PersistentPlan plan;
    plan.cut = 0.3 + 0.4 * unit(rng);
    for (NodeId id : seg.nodes) {
      const CellNode& n = truth.node(id);
      if (n.key.frame >= s && n.key.frame < s + config.persist_len) {
        plan.label_at[n.key.frame] = n.key.label;
      }
    }
    plans.push_back(std::move(plan));
  }

  for (int f = 1; f < movie.frame_count(); ++f) {
    LabeledFrame& frame = out.movie.frames[f];
    const LabeledFrame& clean = movie.frames[f];
    std::set<Label> used;

    for (const PersistentPlan& plan : plans) {
      auto it = plan.label_at.find(f);
      if (it == plan.label_at.end()) continue;
      const double cut[1] = {plan.cut};
      if (used.contains(it->second)) continue;
      if (auto labels = fragment_cell(frame, it->second, cut)) {
        used.insert(it->second);
        out.log.push_back({f, ErrorKind::over_persistent, {it->second}, *labels, ""});
      } else {
        out.log.push_back({f, ErrorKind::skipped, {it->second}, {}, "over_persistent: cut infeasible"});
      }
    }

    for (Label l : clean.cell_labels()) {
      const double draw = unit(rng);
      const int pieces = unit(rng) < 0.5 ? 2 : 3;
      const double u1 = unit(rng), u2 = unit(rng);
      if (draw >= config.p_over_transient) continue;
      if (used.contains(l)) {
        out.log.push_back({f, ErrorKind::skipped, {l}, {}, "over_transient: cell already corrupted"});
        continue;
      }
      std::vector<double> cuts;
      if (pieces == 2) {
        cuts = {0.3 + 0.4 * u1};
      } else {
        cuts = {0.2 + 0.25 * u1, 0.55 + 0.25 * u2};
      }
      if (auto labels = fragment_cell(frame, l, cuts)) {
        used.insert(l);
        out.log.push_back({f, ErrorKind::over_transient, {l}, *labels, ""});
      } else {
        out.log.push_back({f, ErrorKind::skipped, {l}, {}, "over_transient: cut infeasible"});
      }
    }

    for (const auto& [a, b] : touching_pairs(clean)) {
      const double draw = unit(rng);
      const bool keep_a = unit(rng) < 0.5;
      if (draw >= config.p_under) continue;
      if (used.contains(a) || used.contains(b)) {
        out.log.push_back({f, ErrorKind::skipped, {a, b}, {}, "under: cell already corrupted"});
        continue;
      }
      const Label keep = keep_a ? a : b;
      const Label gone = keep_a ? b : a;
      for (std::size_t p = 0; p < frame.size(); ++p) {
        if (frame[p] == gone) frame[p] = keep;
      }
      used.insert(a);
      used.insert(b);
      out.log.push_back({f, ErrorKind::under, {a, b}, {keep}, ""});
    }
  }
  return out;
}

}  // namespace cellforest
