#include "cellforest/correction.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "cellforest/geometry.hpp"

namespace cellforest {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::coalesce_to_one: return "coalesce_to_one";
    case EventKind::coalesce_to_division: return "coalesce_to_division";
    case EventKind::underseg_split: return "underseg_split";
    case EventKind::retro_merge: return "retro_merge";
    case EventKind::unresolved: return "unresolved";
  }
  return "unresolved";
}

std::optional<EventKind> event_kind_from_string(std::string_view text) {
  for (EventKind k : {EventKind::coalesce_to_one, EventKind::coalesce_to_division,
                      EventKind::underseg_split, EventKind::retro_merge, EventKind::unresolved}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(AnomalyKind kind) {
  return kind == AnomalyKind::multi_overseg ? "multi_overseg" : "lonely_cell";
}

std::size_t CorrectionResult::committed_count() const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const auto& e) {
    return e.kind != EventKind::unresolved;
  }));
}

// ---------------------------------------------------------------------------
// Workspace

namespace {

std::vector<std::vector<CellSummary>> summarize_movie(const Movie& movie) {
  std::vector<std::vector<CellSummary>> out;
  out.reserve(movie.frames.size());
  for (const LabeledFrame& f : movie.frames) out.push_back(summarize_frame(f));
  return out;
}

}  // namespace

Workspace::Workspace(Movie movie) : movie_(std::move(movie)) {
  if (movie_.frames.empty()) throw InputError("movie has no frames");
  for (int f = 0; f < movie_.frame_count(); ++f) {
    movie_.frames[f].set_index(f);
    require_same_shape(movie_.frames.front(), movie_.frames[f], "workspace");
  }
  links_ = link_movie(movie_);
  cells_ = summarize_movie(movie_);
  forest_ = build_forest(std::span<const std::vector<CellSummary>>(cells_), links_);
}

void Workspace::commit(std::vector<LabeledFrame> frames) {
  std::set<int> pairs;
  for (LabeledFrame& frame : frames) {
    const int f = frame.index();
    if (f < 0 || f > last_frame()) throw InputError("commit: frame index out of range");
    require_same_shape(movie_.frames.front(), frame, "commit");
    movie_.frames[f] = std::move(frame);
    cells_[f] = summarize_frame(movie_.frames[f]);
    if (f > 0) pairs.insert(f - 1);
    if (f < last_frame()) pairs.insert(f);
  }
  for (int p : pairs) links_[p] = match_frame_pair(movie_.frames[p], movie_.frames[p + 1]);
  forest_ = build_forest(std::span<const std::vector<CellSummary>>(cells_), links_);
}

// ---------------------------------------------------------------------------
// Detection

std::vector<Anomaly> detect_anomalies(const LineageForest& forest, int frame) {
  std::vector<Anomaly> multi;
  std::vector<Anomaly> lonely;
  if (frame < 1 || frame >= forest.frame_count()) return {};

  for (NodeId id : forest.nodes_at(frame - 1)) {
    const CellNode& n = forest.node(id);
    if (n.children.size() > 2) {
      Anomaly a;
      a.kind = AnomalyKind::multi_overseg;
      a.detect_frame = frame;
      a.site = n.key;
      for (NodeId c : n.children) a.children.push_back(forest.node(c).key);
      multi.push_back(std::move(a));
    } else if (n.children.empty()) {
      Anomaly a;
      a.kind = AnomalyKind::lonely_cell;
      a.detect_frame = frame;
      a.site = n.key;
      const NodeId start = segment_start(forest, id);
      a.branch_start_frame = forest.node(start).key.frame;
      const auto& parent = forest.node(start).parent;
      if (parent && forest.node(*parent).children.size() == 2) {
        const auto& kids = forest.node(*parent).children;
        NodeId sib = kids[0] == start ? kids[1] : kids[0];
        a.sibling = forest.node(sib).key;
        NodeId cur = sib;
        bool unary = true;
        while (forest.node(cur).key.frame < frame) {
          if (forest.node(cur).children.size() != 1) {
            unary = false;
            break;
          }
          cur = forest.node(cur).children.front();
        }
        if (unary && forest.node(cur).key.frame == frame) a.lonely = forest.node(cur).key;
      }
      lonely.push_back(std::move(a));
    }
  }
  // Node ids at one frame are already in label order.
  multi.insert(multi.end(), std::make_move_iterator(lonely.begin()),
               std::make_move_iterator(lonely.end()));
  return multi;
}

// ---------------------------------------------------------------------------
// Over-segmentation into more than two children

namespace {

// How well a mask and its successor one frame later agree, in both
// directions: the successor must lie within one pixel of the mask (growth
// adds rows at the poles) and the mask must lie inside the successor. A dead
// sister leaves area the successor cannot explain.
double merge_agreement(const PixelSet& mask, const PixelSet& successor) {
  if (mask.empty() || successor.empty()) return 0.0;
  const double covered = static_cast<double>(pixel_overlap(dilate(mask, 1), successor)) /
                         static_cast<double>(successor.area());
  const double explained = static_cast<double>(pixel_overlap(mask, successor)) /
                           static_cast<double>(mask.area());
  return std::min(covered, explained);
}

// Number of 4-adjacent pixel pairs with one pixel in `a` and the other in `b`.
std::int64_t shared_border(const LabeledFrame& frame, Label a, Label b) {
  std::int64_t n = 0;
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      const Label l = frame.at(x, y);
      if (l != a && l != b) continue;
      const Label want = l == a ? b : a;
      if (x + 1 < frame.width() && frame.at(x + 1, y) == want) ++n;
      if (y + 1 < frame.height() && frame.at(x, y + 1) == want) ++n;
    }
  }
  return n;
}

// A single contact cluster that still carries two lineages into the next
// frame may be a real division plus fragments: attach every fragment to the
// continuing child it borders most, and keep the grouping only when each
// group's mask is continued by its next-frame cells.
std::optional<std::vector<std::vector<Label>>> split_by_continuation(
    const Anomaly& anomaly, const Workspace& ws, const AnalysisParams& params) {
  const int f = anomaly.detect_frame;
  if (f >= ws.last_frame()) return std::nullopt;
  const LineageForest& forest = ws.forest();
  std::vector<Label> continuing, stray;
  for (const CellKey& k : anomaly.children) {
    auto id = forest.find(k);
    if (id && !forest.node(*id).children.empty()) {
      continuing.push_back(k.label);
    } else {
      stray.push_back(k.label);
    }
  }
  if (continuing.size() != 2) return std::nullopt;
  std::vector<std::vector<Label>> groups{{continuing[0]}, {continuing[1]}};
  // Grow the two groups through fragment contacts, strongest border first.
  while (!stray.empty()) {
    std::int64_t best = 0;
    std::size_t best_stray = 0, best_group = 0;
    for (std::size_t i = 0; i < stray.size(); ++i) {
      for (std::size_t g = 0; g < 2; ++g) {
        std::int64_t border = 0;
        for (Label l : groups[g]) border += shared_border(ws.frame(f), stray[i], l);
        if (border > best) {
          best = border;
          best_stray = i;
          best_group = g;
        }
      }
    }
    if (best == 0) return std::nullopt;
    groups[best_group].push_back(stray[best_stray]);
    stray.erase(stray.begin() + static_cast<std::ptrdiff_t>(best_stray));
  }
  const LabeledFrame& here = ws.frame(f);
  const LabeledFrame& next = ws.frame(f + 1);
  for (auto& g : groups) {
    PixelSet mask{here.width(), here.height(), {}};
    for (Label l : g) mask = set_union(mask, pixels_of(here, l));
    PixelSet continuation{next.width(), next.height(), {}};
    for (NodeId c : forest.node(*forest.find(CellKey{f, g.front()})).children) {
      continuation = set_union(continuation, pixels_of(next, forest.node(c).key.label));
    }
    if (merge_agreement(mask, continuation) < params.M) return std::nullopt;
    std::sort(g.begin(), g.end());
  }
  return groups;
}

}  // namespace

CorrectionEvent correct_multi_overseg(const Anomaly& anomaly, Workspace& ws,
                                      const AnalysisParams& params) {
  const int f = anomaly.detect_frame;
  std::vector<Label> labels;
  for (const CellKey& k : anomaly.children) labels.push_back(k.label);
  auto clusters = connected_clusters(ws.frame(f), labels);
  if (clusters.size() == 1) {
    if (auto groups = split_by_continuation(anomaly, ws, params)) clusters = std::move(*groups);
  }

  CorrectionEvent ev;
  ev.frame_from = ev.frame_to = f;
  ev.labels_before = anomaly.children;

  LabeledFrame out = ws.frame(f);
  if (clusters.size() == 2) {
    ev.kind = EventKind::coalesce_to_division;
    for (const auto& cluster : clusters) {
      if (cluster.size() == 1) {
        ev.labels_after.push_back(CellKey{f, cluster.front()});
        continue;
      }
      MergeResult m = merge_regions(out, cluster);
      out = std::move(m.frame);
      ev.labels_after.push_back(CellKey{f, m.label});
    }
  } else {
    ev.kind = EventKind::coalesce_to_one;
    if (clusters.size() > 2) {
      ev.note = "low confidence: " + std::to_string(clusters.size()) +
                " non-touching fragment clusters merged";
    }
    MergeResult m = merge_regions(out, labels);
    out = std::move(m.frame);
    ev.labels_after.push_back(CellKey{f, m.label});
  }
  ws.commit({std::move(out)});
  return ev;
}

// ---------------------------------------------------------------------------
// Under-segmentation at frame t

std::optional<CorrectionEvent> try_underseg_split(const Anomaly& anomaly, Workspace& ws,
                                                  const AnalysisParams& params) {
  if (anomaly.kind != AnomalyKind::lonely_cell) return std::nullopt;
  const int t = anomaly.detect_frame;
  if (t - anomaly.branch_start_frame + 1 < params.min_life_frames) return std::nullopt;

  const LineageForest& forest = ws.forest();
  const LabeledFrame& at_t = ws.frame(t);
  const LabeledFrame& before = ws.frame(t - 1);
  RegionTable before_table(before);
  const CellRegion* terminated = before_table.find(anomaly.site.label);
  if (terminated == nullptr) return std::nullopt;

  // The cell at t that swallowed most of the terminated cell's footprint.
  std::map<Label, std::int64_t> cover;
  for (std::int32_t p : terminated->pixels) {
    if (at_t[p] != 0) ++cover[at_t[p]];
  }
  Label absorber = 0;
  std::int64_t best = 0;
  for (const auto& [l, n] : cover) {
    if (n > best) {
      best = n;
      absorber = l;
    }
  }
  if (absorber == 0) return std::nullopt;
  auto absorber_node = forest.find(CellKey{t, absorber});
  if (!absorber_node || !forest.node(*absorber_node).parent) return std::nullopt;
  const Label predecessor = forest.node(*forest.node(*absorber_node).parent).key.label;

  // Anchor set: the absorber's predecessor, the terminated cell, and any other
  // branch ending at t-1 nearby that the absorber also swallowed.
  std::vector<Label> anchors{predecessor, anomaly.site.label};
  const NeighborhoodPair probe = neighborhood_correspondence(before, anchors, at_t, params);
  for (Label c : probe.n_prev) {
    if (std::find(anchors.begin(), anchors.end(), c) != anchors.end()) continue;
    auto node = forest.find(CellKey{t - 1, c});
    if (!node || !forest.node(*node).children.empty()) continue;
    auto m = probe.matching.find(c);
    if (m != probe.matching.end() && m->second == absorber) anchors.push_back(c);
  }
  const NeighborhoodPair pair = neighborhood_correspondence(before, anchors, at_t, params);
  for (Label a : pair.anchors) {
    auto m = pair.matching.find(a);
    if (m == pair.matching.end() || m->second != absorber) return std::nullopt;
  }
  if (pair.total_overlap_score < params.T) return std::nullopt;

  std::vector<Point> seeds;
  for (Label a : pair.anchors) seeds.push_back(before_table.at(a).centroid);
  SplitResult split;
  try {
    split = split_region_by_seeds(at_t, absorber, seeds);
  } catch (const SplitInfeasible&) {
    return std::nullopt;
  }

  // Each part must trace back to its own anchor and, unless t is the last
  // frame, carry on into t+1; otherwise the split only moves the anomaly.
  const LinkSet back = match_frame_pair(before, split.frame);
  for (std::size_t i = 0; i < split.labels.size(); ++i) {
    auto it = std::find_if(back.begin(), back.end(), [&](const TrackingLink& l) {
      return l.curr.label == split.labels[i];
    });
    if (it == back.end() || it->prev.label != pair.anchors[i]) return std::nullopt;
  }
  if (t < ws.last_frame()) {
    const LinkSet ahead = match_frame_pair(split.frame, ws.frame(t + 1));
    for (Label part : split.labels) {
      const bool continues = std::any_of(ahead.begin(), ahead.end(), [&](const TrackingLink& l) {
        return l.prev.label == part;
      });
      if (!continues) return std::nullopt;
    }
  }

  CorrectionEvent ev;
  ev.kind = EventKind::underseg_split;
  ev.frame_from = ev.frame_to = t;
  ev.labels_before = {CellKey{t, absorber}};
  for (Label l : split.labels) ev.labels_after.push_back(CellKey{t, l});
  ev.score_used = pair.total_overlap_score;
  ev.note = "k=" + std::to_string(split.labels.size());
  ws.commit({std::move(split.frame)});
  return ev;
}

// ---------------------------------------------------------------------------
// Over-segmentation in preceding frames

std::optional<CorrectionEvent> try_retro_merge(const Anomaly& anomaly, Workspace& ws,
                                               const AnalysisParams& params) {
  if (anomaly.kind != AnomalyKind::lonely_cell || !anomaly.sibling || !anomaly.lonely) {
    return std::nullopt;
  }
  const LineageForest& forest = ws.forest();
  const int t = anomaly.detect_frame;
  const int d = anomaly.branch_start_frame;

  // Both chains, indexed by frame - d.
  std::vector<CellKey> branch;
  std::vector<CellKey> sister;
  {
    auto id = forest.find(anomaly.site);
    if (!id) return std::nullopt;
    NodeId cur = segment_start(forest, *id);
    for (;;) {
      branch.push_back(forest.node(cur).key);
      if (forest.node(cur).children.size() != 1) break;
      cur = forest.node(cur).children.front();
    }
    auto sid = forest.find(*anomaly.sibling);
    if (!sid) return std::nullopt;
    cur = *sid;
    while (forest.node(cur).key.frame < t) {
      sister.push_back(forest.node(cur).key);
      if (forest.node(cur).children.size() != 1) return std::nullopt;
      cur = forest.node(cur).children.front();
    }
  }
  const int levels = t - d;
  if (static_cast<int>(branch.size()) != levels || static_cast<int>(sister.size()) != levels) {
    return std::nullopt;
  }

  PixelSet successor = pixels_of(ws.frame(t), anomaly.lonely->label);
  double weakest = 1.0;
  for (int g = t - 1; g >= d; --g) {
    const LabeledFrame& frame = ws.frame(g);
    RegionTable table(frame);
    const PixelSet a = pixels_of(table.at(branch[g - d].label), frame.width(), frame.height());
    const PixelSet b = pixels_of(table.at(sister[g - d].label), frame.width(), frame.height());
    if (!regions_touch(a, b)) return std::nullopt;
    PixelSet merged = set_union(a, b);
    const double score = merge_agreement(merged, successor);
    weakest = std::min(weakest, score);
    if (score < params.M) return std::nullopt;
    successor = std::move(merged);
  }

  CorrectionEvent ev;
  ev.kind = EventKind::retro_merge;
  ev.frame_from = d;
  ev.frame_to = t - 1;
  ev.score_used = weakest;
  std::vector<LabeledFrame> frames;
  for (int g = d; g < t; ++g) {
    const Label pair[2] = {branch[g - d].label, sister[g - d].label};
    MergeResult m = merge_regions(ws.frame(g), pair);
    ev.labels_before.push_back(branch[g - d]);
    ev.labels_before.push_back(sister[g - d]);
    ev.labels_after.push_back(CellKey{g, m.label});
    frames.push_back(std::move(m.frame));
  }
  ws.commit(std::move(frames));
  return ev;
}

// ---------------------------------------------------------------------------
// Closed loop

namespace {

CorrectionResult finish(Workspace ws, std::vector<CorrectionEvent> events, int sweeps) {
  LineageForest forest = ws.forest();
  for (int f = 1; f <= ws.last_frame(); ++f) {
    for (const Anomaly& a : detect_anomalies(forest, f)) {
      CorrectionEvent ev;
      ev.kind = EventKind::unresolved;
      ev.frame_from = ev.frame_to = f - 1;
      ev.labels_before = {a.site};
      if (a.kind == AnomalyKind::multi_overseg) {
        ev.note = "multi_overseg: " + std::to_string(a.children.size()) + " children kept";
        forest.set_status(*forest.find(a.site), NodeStatus::unresolved);
      } else {
        ev.note = a.sibling ? "lonely_cell: branch kept, terminated early"
                            : "lonely_cell without sister: death candidate";
      }
      events.push_back(std::move(ev));
    }
  }
  CorrectionResult result;
  result.links = ws.links();
  result.forest = std::move(forest);
  result.movie = std::move(ws).release_movie();
  result.events = std::move(events);
  result.sweeps = sweeps;
  return result;
}

}  // namespace

CorrectionResult run_correction_loop(Movie movie, const AnalysisParams& params) {
  params.validate();
  Workspace ws(std::move(movie));
  std::vector<CorrectionEvent> events;
  int sweeps = 0;

  for (int sweep = 0; sweep < params.max_sweeps; ++sweep) {
    ++sweeps;
    std::size_t committed = 0;
    for (int f = 1; f <= ws.last_frame(); ++f) {
      std::set<CellKey> failed;
      // Each commit removes or rewrites at least one site; the cap only guards
      // against pathological ping-pong between two corrections.
      const std::size_t cap = 4 * ws.forest().nodes_at(f - 1).size() + 16;
      for (std::size_t step = 0; step < cap; ++step) {
        auto anomalies = detect_anomalies(ws.forest(), f);
        auto it = std::find_if(anomalies.begin(), anomalies.end(),
                               [&](const Anomaly& a) { return !failed.contains(a.site); });
        if (it == anomalies.end()) break;
        const Anomaly& a = *it;
        if (a.kind == AnomalyKind::multi_overseg) {
          events.push_back(correct_multi_overseg(a, ws, params));
          ++committed;
          continue;
        }
        std::optional<CorrectionEvent> ev;
        if (f - a.branch_start_frame + 1 >= params.min_life_frames) {
          ev = try_underseg_split(a, ws, params);
        }
        if (!ev) ev = try_retro_merge(a, ws, params);
        if (ev) {
          events.push_back(std::move(*ev));
          ++committed;
        } else {
          failed.insert(a.site);
        }
      }
    }
    if (committed == 0) break;
  }
  return finish(std::move(ws), std::move(events), sweeps);
}

CorrectionResult analyze_without_correction(Movie movie) {
  Workspace ws(std::move(movie));
  CorrectionResult result;
  result.links = ws.links();
  result.forest = ws.forest();
  result.movie = std::move(ws).release_movie();
  return result;
}

}  // namespace cellforest
