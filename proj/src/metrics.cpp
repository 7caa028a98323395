#include "cellforest/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

namespace cellforest {

ValidityReport validity_report(const LineageForest& forest, bool include_entrants) {
  ValidityReport report;
  std::map<int, TreeValidity> trees;
  for (const CellSegment& seg : extract_segments(forest)) {
    if (seg.entrant && !include_entrants) {
      ++report.excluded_entrant_segments;
      continue;
    }
    TreeValidity& tree = trees[seg.clone_id];
    tree.clone_id = seg.clone_id;
    ++tree.total_segments;
    ++report.total_segments;
    if (seg.is_valid) {
      ++tree.valid_segments;
      ++report.valid_segments;
    }
  }
  for (const auto& [id, tree] : trees) report.per_tree.push_back(tree);
  if (report.total_segments > 0) {
    report.valid_fraction =
        static_cast<double>(report.valid_segments) / static_cast<double>(report.total_segments);
  }
  return report;
}

namespace {

// Per-frame pixel statistics between two label grids.
struct FrameOverlap {
  std::map<std::pair<Label, Label>, std::int64_t> both;  // (pred, true) -> px
  std::map<Label, std::int64_t> pred_area;
  std::map<Label, std::int64_t> true_area;

  double iou(Label p, Label t) const {
    auto it = both.find({p, t});
    if (it == both.end()) return 0.0;
    const double inter = static_cast<double>(it->second);
    const double uni = static_cast<double>(pred_area.at(p) + true_area.at(t)) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
  }
};

FrameOverlap frame_overlap(const LabeledFrame& pred, const LabeledFrame& truth) {
  FrameOverlap out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Label p = pred[i], t = truth[i];
    if (p != 0) ++out.pred_area[p];
    if (t != 0) ++out.true_area[t];
    if (p != 0 && t != 0) ++out.both[{p, t}];
  }
  return out;
}

double ratio(int num, int den) { return den > 0 ? static_cast<double>(num) / den : 0.0; }

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

TruthComparison compare_to_truth(const LineageForest& pred, const Movie& pred_movie,
                                 const LineageForest& truth, const Movie& truth_movie) {
  if (pred_movie.frame_count() != truth_movie.frame_count()) {
    throw InputError("frame count mismatch: " + std::to_string(pred_movie.frame_count()) +
                     " vs " + std::to_string(truth_movie.frame_count()));
  }
  if (pred.frame_count() != pred_movie.frame_count() ||
      truth.frame_count() != truth_movie.frame_count()) {
    throw InputError("forest does not belong to its movie");
  }
  for (int f = 0; f < pred_movie.frame_count(); ++f) {
    require_same_shape(pred_movie.frames[f], truth_movie.frames[f], "compare_to_truth");
  }
  std::vector<FrameOverlap> overlaps;
  for (int f = 0; f < pred_movie.frame_count(); ++f) {
    overlaps.push_back(frame_overlap(pred_movie.frames[f], truth_movie.frames[f]));
  }

  TruthComparison cmp;
  const std::vector<CellSegment> ps = extract_segments(pred);
  const std::vector<CellSegment> ts = extract_segments(truth);
  cmp.pred_segments = static_cast<int>(ps.size());
  cmp.true_segments = static_cast<int>(ts.size());

  std::map<std::pair<int, int>, std::vector<std::size_t>> true_by_span;
  for (std::size_t j = 0; j < ts.size(); ++j) {
    true_by_span[{ts[j].start_frame, ts[j].end_frame}].push_back(j);
  }
  // Candidate pairs above threshold; an IoU above 0.5 per frame already makes
  // them one-to-one, the greedy pass only guards degenerate ties.
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto it = true_by_span.find({ps[i].start_frame, ps[i].end_frame});
    if (it == true_by_span.end()) continue;
    for (std::size_t j : it->second) {
      double sum = 0.0;
      for (std::size_t k = 0; k < ps[i].nodes.size(); ++k) {
        const CellKey pk = pred.node(ps[i].nodes[k]).key;
        const CellKey tk = truth.node(ts[j].nodes[k]).key;
        sum += overlaps[pk.frame].iou(pk.label, tk.label);
      }
      const double mean = sum / static_cast<double>(ps[i].nodes.size());
      if (mean >= kSegmentMatchIoU) candidates.emplace_back(mean, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::vector<bool> p_used(ps.size()), t_used(ts.size());
  double iou_sum = 0.0;
  std::size_t iou_cells = 0;
  for (const auto& [mean, i, j] : candidates) {
    if (p_used[i] || t_used[j]) continue;
    p_used[i] = t_used[j] = true;
    ++cmp.matched_segments;
    iou_sum += mean * static_cast<double>(ps[i].nodes.size());
    iou_cells += ps[i].nodes.size();
  }
  cmp.precision = ratio(cmp.matched_segments, cmp.pred_segments);
  cmp.recall = ratio(cmp.matched_segments, cmp.true_segments);
  cmp.f1 = f1_of(cmp.precision, cmp.recall);
  cmp.mean_matched_iou = iou_cells > 0 ? iou_sum / static_cast<double>(iou_cells) : 0.0;

  std::vector<CellKey> true_div;
  for (NodeId id = 0; id < truth.size(); ++id) {
    if (is_division(truth, id)) true_div.push_back(truth.node(id).key);
  }
  std::vector<bool> true_hit(true_div.size());
  for (NodeId id = 0; id < pred.size(); ++id) {
    if (!is_division(pred, id)) continue;
    ++cmp.pred_divisions;
    const CellKey pk = pred.node(id).key;
    bool hit = false;
    for (std::size_t j = 0; j < true_div.size() && !hit; ++j) {
      if (true_hit[j] || true_div[j].frame != pk.frame) continue;
      if (overlaps[pk.frame].iou(pk.label, true_div[j].label) >= kDivisionMotherIoU) {
        true_hit[j] = hit = true;
      }
    }
    if (hit) ++cmp.matched_divisions;
  }
  cmp.true_divisions = static_cast<int>(true_div.size());
  cmp.spurious_divisions = cmp.pred_divisions - cmp.matched_divisions;
  cmp.missed_divisions = cmp.true_divisions - cmp.matched_divisions;
  return cmp;
}

CorrectionSummary correction_summary(std::span<const CorrectionEvent> events,
                                     const ValidityReport& before, const ValidityReport& after) {
  CorrectionSummary s;
  s.before = before;
  s.after = after;
  s.valid_change = after.valid_segments - before.valid_segments;
  s.relative_change = before.valid_segments > 0
                          ? static_cast<double>(s.valid_change) / before.valid_segments
                          : 0.0;
  s.fraction_change = after.valid_fraction - before.valid_fraction;
  for (EventKind k : {EventKind::coalesce_to_one, EventKind::coalesce_to_division,
                      EventKind::underseg_split, EventKind::retro_merge, EventKind::unresolved}) {
    s.events_by_kind[k] = 0;
  }
  for (const CorrectionEvent& e : events) ++s.events_by_kind[e.kind];
  s.unresolved = s.events_by_kind[EventKind::unresolved];
  return s;
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

std::string render_summary(const CorrectionSummary& s) {
  std::ostringstream out;
  out << "valid segments before: " << s.before.valid_segments << "/" << s.before.total_segments
      << " (" << fmt("%.1f", 100.0 * s.before.valid_fraction) << "%)\n";
  out << "valid segments after: " << s.after.valid_segments << "/" << s.after.total_segments
      << " (" << fmt("%.1f", 100.0 * s.after.valid_fraction) << "%)\n";
  out << "valid count change: " << (s.valid_change >= 0 ? "+" : "") << s.valid_change << " ("
      << fmt("%+.1f", 100.0 * s.relative_change) << "%)\n";
  out << "valid fraction change: " << fmt("%+.1f", 100.0 * s.fraction_change) << " points\n";
  for (const auto& [kind, n] : s.events_by_kind) {
    out << "events " << to_string(kind) << ": " << n << "\n";
  }
  out << "unresolved sites: " << s.unresolved << "\n";
  return out.str();
}

std::string render_validity_tsv(const ValidityReport& r) {
  std::ostringstream out;
  out << "clone_id\ttotal_segments\tvalid_segments\tvalid_fraction\n";
  for (const TreeValidity& t : r.per_tree) {
    out << t.clone_id << '\t' << t.total_segments << '\t' << t.valid_segments << '\t'
        << fmt("%.6f", ratio(t.valid_segments, t.total_segments)) << '\n';
  }
  out << "all\t" << r.total_segments << '\t' << r.valid_segments << '\t'
      << fmt("%.6f", r.valid_fraction) << '\n';
  return out.str();
}

std::string render_comparison(const TruthComparison& c) {
  std::ostringstream out;
  out << "metric\tvalue\n";
  out << "pred_segments\t" << c.pred_segments << '\n';
  out << "true_segments\t" << c.true_segments << '\n';
  out << "matched_segments\t" << c.matched_segments << '\n';
  out << "precision\t" << fmt("%.6f", c.precision) << '\n';
  out << "recall\t" << fmt("%.6f", c.recall) << '\n';
  out << "f1\t" << fmt("%.6f", c.f1) << '\n';
  out << "mean_matched_iou\t" << fmt("%.6f", c.mean_matched_iou) << '\n';
  out << "pred_divisions\t" << c.pred_divisions << '\n';
  out << "true_divisions\t" << c.true_divisions << '\n';
  out << "matched_divisions\t" << c.matched_divisions << '\n';
  out << "spurious_divisions\t" << c.spurious_divisions << '\n';
  out << "missed_divisions\t" << c.missed_divisions << '\n';
  return out.str();
}

}  // namespace cellforest
