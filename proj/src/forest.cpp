#include "cellforest/forest.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cellforest {

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::normal: return "normal";
    case NodeStatus::root: return "root";
    case NodeStatus::leaf_final_frame: return "leaf-final-frame";
    case NodeStatus::terminated_early: return "terminated-early";
    case NodeStatus::unresolved: return "unresolved";
  }
  return "normal";
}

std::optional<NodeStatus> node_status_from_string(std::string_view text) {
  for (NodeStatus s : {NodeStatus::normal, NodeStatus::root, NodeStatus::leaf_final_frame,
                       NodeStatus::terminated_early, NodeStatus::unresolved}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<NodeId> LineageForest::find(CellKey key) const {
  if (key.frame < 0 || key.frame >= frame_count_) return std::nullopt;
  auto ids = nodes_at(key.frame);
  auto it = std::lower_bound(ids.begin(), ids.end(), key.label,
                             [&](NodeId id, Label l) { return nodes_[id].key.label < l; });
  if (it == ids.end() || nodes_[*it].key.label != key.label) return std::nullopt;
  return *it;
}

std::span<const NodeId> LineageForest::nodes_at(int frame) const {
  if (frame < 0 || frame >= frame_count_) return {};
  return std::span<const NodeId>(order_).subspan(frame_offsets_[frame],
                                                frame_offsets_[frame + 1] - frame_offsets_[frame]);
}

std::size_t LineageForest::clone_count_at(int frame) const {
  std::set<int> ids;
  for (NodeId id : nodes_at(frame)) ids.insert(nodes_[id].clone_id);
  return ids.size();
}

namespace {

std::string key_text(CellKey k) {
  std::ostringstream os;
  os << "(frame " << k.frame << ", label " << k.label << ")";
  return os.str();
}

NodeStatus derived_status(const CellNode& n, int last_frame) {
  if (n.children.empty()) {
    return n.key.frame < last_frame ? NodeStatus::terminated_early : NodeStatus::leaf_final_frame;
  }
  if (!n.parent) return NodeStatus::root;
  return NodeStatus::normal;
}

}  // namespace

std::vector<CellSummary> summarize_frame(const LabeledFrame& frame) {
  std::vector<CellSummary> out;
  RegionTable table(frame);
  out.reserve(table.size());
  for (const auto& [label, region] : table.regions()) {
    out.push_back(CellSummary{label, region.area_px, region.centroid});
  }
  return out;
}

LineageForest build_forest(const Movie& movie, std::span<const LinkSet> links) {
  std::vector<std::vector<CellSummary>> cells;
  cells.reserve(movie.frames.size());
  for (const LabeledFrame& frame : movie.frames) {
    require_same_shape(movie.frames.front(), frame, "build_forest");
    cells.push_back(summarize_frame(frame));
  }
  return build_forest(std::span<const std::vector<CellSummary>>(cells), links);
}

LineageForest build_forest(std::span<const std::vector<CellSummary>> cells,
                           std::span<const LinkSet> links) {
  LineageForest forest;
  const int frames = static_cast<int>(cells.size());
  forest.frame_count_ = frames;
  if (frames > 0 && static_cast<int>(links.size()) != frames - 1) {
    throw InputError("expected " + std::to_string(frames - 1) + " link sets, got " +
                     std::to_string(links.size()));
  }

  forest.frame_offsets_.assign(static_cast<std::size_t>(frames) + 1, 0);
  for (int f = 0; f < frames; ++f) {
    forest.frame_offsets_[f] = forest.nodes_.size();
    for (const CellSummary& cell : cells[f]) {
      CellNode node;
      node.key = CellKey{f, cell.label};
      node.area_px = cell.area_px;
      node.centroid = cell.centroid;
      forest.order_.push_back(forest.nodes_.size());
      forest.nodes_.push_back(std::move(node));
    }
  }
  forest.frame_offsets_[frames] = forest.nodes_.size();

  for (int f = 0; f + 1 < frames; ++f) {
    for (const TrackingLink& link : links[f]) {
      if (link.prev.frame != f || link.curr.frame != f + 1) {
        throw InputError("link " + key_text(link.prev) + " -> " + key_text(link.curr) +
                         " stored in link set " + std::to_string(f));
      }
      auto p = forest.find(link.prev);
      auto c = forest.find(link.curr);
      if (!p) throw InputError("dangling link reference " + key_text(link.prev));
      if (!c) throw InputError("dangling link reference " + key_text(link.curr));
      CellNode& child = forest.nodes_[*c];
      if (child.parent) {
        throw InputError("cell " + key_text(link.curr) + " has more than one parent link");
      }
      child.parent = *p;
      forest.nodes_[*p].children.push_back(*c);
    }
  }

  const int last = frames - 1;
  for (NodeId id = 0; id < forest.nodes_.size(); ++id) {
    CellNode& n = forest.nodes_[id];
    std::sort(n.children.begin(), n.children.end());
    if (!n.parent) {
      forest.roots_.push_back(id);
      n.entrant = n.key.frame > 0;
    }
    n.status = derived_status(n, last);
  }
  return assign_clones(std::move(forest));
}

LineageForest assign_clones(LineageForest forest) {
  // Roots are already in (frame, label) order because node ids are.
  std::vector<NodeId> stack;
  int clone = 0;
  for (NodeId root : forest.roots_) {
    ++clone;
    stack.push_back(root);
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      CellNode& n = forest.nodes_[id];
      n.clone_id = clone;
      for (NodeId c : n.children) stack.push_back(c);
    }
  }
  return forest;
}

bool is_division(const LineageForest& forest, NodeId id) {
  return forest.node(id).children.size() == 2;
}

bool segment_is_valid(bool starts_at_division, bool ends_at_division, int start_frame,
                      int end_frame, int last_frame) {
  return (starts_at_division || start_frame == 0) && (ends_at_division || end_frame == last_frame);
}

NodeId segment_start(const LineageForest& forest, NodeId id) {
  for (;;) {
    const CellNode& n = forest.node(id);
    if (!n.parent || forest.node(*n.parent).children.size() != 1) return id;
    id = *n.parent;
  }
}

std::vector<CellSegment> extract_segments(const LineageForest& forest) {
  std::vector<CellSegment> segments;
  const int last = forest.frame_count() - 1;
  for (NodeId id = 0; id < forest.size(); ++id) {
    const CellNode& first = forest.node(id);
    const bool is_start = !first.parent || forest.node(*first.parent).children.size() != 1;
    if (!is_start) continue;
    CellSegment seg;
    seg.starts_at_division = first.parent && is_division(forest, *first.parent);
    seg.clone_id = first.clone_id;
    NodeId cur = id;
    seg.nodes.push_back(cur);
    while (forest.node(cur).children.size() == 1) {
      cur = forest.node(cur).children.front();
      seg.nodes.push_back(cur);
    }
    seg.start_frame = first.key.frame;
    seg.end_frame = forest.node(cur).key.frame;
    seg.ends_at_division = is_division(forest, cur);
    seg.is_valid = segment_is_valid(seg.starts_at_division, seg.ends_at_division, seg.start_frame,
                                    seg.end_frame, last);
    // Entrant flag follows the tree, not just the segment's own start.
    NodeId root = id;
    while (forest.node(root).parent) root = *forest.node(root).parent;
    seg.entrant = forest.node(root).entrant;
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<DivisionTree> condense_division_tree(const LineageForest& forest, double interval_min) {
  std::vector<CellSegment> all = extract_segments(forest);

  // Map every node to the segment it belongs to.
  std::vector<std::size_t> seg_of(forest.size(), 0);
  for (std::size_t s = 0; s < all.size(); ++s) {
    for (NodeId id : all[s].nodes) seg_of[id] = s;
  }

  std::vector<DivisionTree> trees;
  for (std::size_t r = 0; r < forest.roots().size(); ++r) {
    DivisionTree t;
    t.root = forest.roots()[r];
    t.clone_id = forest.node(t.root).clone_id;
    trees.push_back(std::move(t));
  }

  // Walk each tree breadth-first over segments so parents precede children.
  for (DivisionTree& tree : trees) {
    std::vector<std::size_t> queue{seg_of[tree.root]};
    std::vector<std::optional<std::size_t>> parent_local{std::nullopt};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const CellSegment& seg = all[queue[qi]];
      DivisionNode dn;
      dn.segment = qi;
      dn.parent = parent_local[qi];
      dn.life_frames = seg.length();
      double area = 0.0;
      for (NodeId id : seg.nodes) area += static_cast<double>(forest.node(id).area_px);
      dn.mean_area_px = area / static_cast<double>(seg.nodes.size());
      if (seg.ends_at_division) dn.division_time_min = seg.end_frame * interval_min;
      if (dn.parent) tree.nodes[*dn.parent].children.push_back(qi);
      tree.segments.push_back(seg);
      tree.nodes.push_back(std::move(dn));
      for (NodeId child : forest.node(seg.nodes.back()).children) {
        queue.push_back(seg_of[child]);
        parent_local.push_back(qi);
      }
    }
  }
  return trees;
}

}  // namespace cellforest
