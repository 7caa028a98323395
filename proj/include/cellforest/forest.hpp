#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cellforest/frame.hpp"

namespace cellforest {

/// Identity of one cell instance: (frame, label).
struct CellKey {
  int frame = 0;
  Label label = 0;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

/// Correspondence between a cell at frame f (prev) and a cell at f+1 (curr).
struct TrackingLink {
  CellKey prev;
  CellKey curr;
  std::int64_t overlap_px = 0;
  double score_fraction = 0.0;  // overlap_px / area(curr)

  friend bool operator==(const TrackingLink&, const TrackingLink&) = default;
};

/// Links between frame f and f+1, sorted by curr label.
using LinkSet = std::vector<TrackingLink>;

enum class NodeStatus { normal, root, leaf_final_frame, terminated_early, unresolved };

std::string_view to_string(NodeStatus status);
std::optional<NodeStatus> node_status_from_string(std::string_view text);

using NodeId = std::size_t;

struct CellNode {
  CellKey key;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;  // ordered by label
  int clone_id = 0;
  NodeStatus status = NodeStatus::normal;
  bool entrant = false;  // root appearing after frame 0 with no parent link
  std::int64_t area_px = 0;
  Point centroid;
};

/// Per-cell geometry needed by the forest, in label order.
struct CellSummary {
  Label label = 0;
  std::int64_t area_px = 0;
  Point centroid;
};

/// Forest of lineage trees. Nodes are stored sorted by (frame, label) and
/// identified by their position.
class LineageForest {
 public:
  LineageForest() = default;

  int frame_count() const { return frame_count_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<CellNode>& nodes() const { return nodes_; }
  const CellNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<NodeId>& roots() const { return roots_; }

  std::optional<NodeId> find(CellKey key) const;
  /// Node ids living at `frame`, in label order.
  std::span<const NodeId> nodes_at(int frame) const;

  /// Sets `status` on one node. Used by the correction loop to flag
  /// unresolved sites on its final forest.
  void set_status(NodeId id, NodeStatus status) { nodes_.at(id).status = status; }

  /// Number of distinct clone ids among the given frame's nodes.
  std::size_t clone_count_at(int frame) const;

  friend LineageForest build_forest(std::span<const std::vector<CellSummary>> cells,
                                    std::span<const LinkSet> links);
  friend LineageForest assign_clones(LineageForest forest);

 private:
  int frame_count_ = 0;
  std::vector<CellNode> nodes_;
  std::vector<NodeId> roots_;
  std::vector<NodeId> order_;              // ids grouped by frame
  std::vector<std::size_t> frame_offsets_;  // frame_count_ + 1 entries into order_
};

std::vector<CellSummary> summarize_frame(const LabeledFrame& frame);

/// Assemble tracking links into lineage trees. Every labeled cell of every
/// frame becomes one node; cells at frame > 0 without a parent link become
/// entrant roots. Throws InputError on dangling label references or a cell
/// with two parent links.
LineageForest build_forest(const Movie& movie, std::span<const LinkSet> links);
/// Same, from precomputed per-frame cell summaries (one vector per frame).
LineageForest build_forest(std::span<const std::vector<CellSummary>> cells,
                           std::span<const LinkSet> links);

/// Propagate clone ids from the roots down. Roots are numbered 1..n in
/// (frame, label) order, so frame-0 founders keep their ids as long as frame 0
/// is untouched.
LineageForest assign_clones(LineageForest forest);

/// Maximal chain of nodes between successive division events.
struct CellSegment {
  std::vector<NodeId> nodes;
  int start_frame = 0;
  int end_frame = 0;
  bool starts_at_division = false;
  bool ends_at_division = false;
  bool is_valid = false;
  int clone_id = 0;
  bool entrant = false;

  int length() const { return end_frame - start_frame + 1; }
};

/// A division point is a node with exactly two children.
bool is_division(const LineageForest& forest, NodeId id);

/// Validity of a segment from its boundary flags and frame span alone.
bool segment_is_valid(bool starts_at_division, bool ends_at_division, int start_frame,
                      int end_frame, int last_frame);

/// Partition the forest into segments, ordered by (start frame, first label).
std::vector<CellSegment> extract_segments(const LineageForest& forest);

/// First node of the segment containing `id`.
NodeId segment_start(const LineageForest& forest, NodeId id);

struct DivisionNode {
  std::size_t segment = 0;  // index into DivisionTree::segments
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  std::optional<double> division_time_min;  // undefined unless the segment ends at a division
  double mean_area_px = 0.0;
  int life_frames = 0;
};

struct DivisionTree {
  int clone_id = 0;
  NodeId root = 0;
  std::vector<CellSegment> segments;
  std::vector<DivisionNode> nodes;  // nodes[i] describes segments[i]
};

/// Contract each tree's unary chains into one node per segment.
std::vector<DivisionTree> condense_division_tree(const LineageForest& forest,
                                                 double interval_min = 5.0);

}  // namespace cellforest
