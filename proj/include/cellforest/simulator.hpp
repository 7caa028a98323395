#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cellforest/forest.hpp"
#include "cellforest/frame.hpp"

namespace cellforest {

/// The population no longer fits the grid.
class GrowthOverflow : public std::runtime_error {
 public:
  GrowthOverflow(int frame, const std::string& what)
      : std::runtime_error("growth overflow at frame " + std::to_string(frame) + ": " + what),
        frame_(frame) {}
  int frame() const { return frame_; }

 private:
  int frame_;
};

/// Remove one cell of `clone` (1-based founder id) at `frame`: it is present
/// up to frame-1 and its mask vanishes afterwards.
struct ScriptedDeath {
  int frame = 30;
  int clone = 1;
};

/// Explicit founder placement (pixel coordinates, axis angle in degrees).
struct Founder {
  double x = 0.0;
  double y = 0.0;
  double angle_deg = 0.0;
};

struct SimConfig {
  int n_clones = 19;
  int frames = 78;
  double interval_min = 5.0;
  int width = 192;
  int height = 192;
  double cell_width = 4.0;
  double initial_length = 8.0;
  double growth_rate = 1.03;  // length multiplier per frame
  double division_length_mean = 16.0;
  double division_length_cv = 0.08;
  double orientation_noise_deg = 10.0;
  std::uint64_t seed = 1;
  std::optional<ScriptedDeath> death;
  /// When non-empty, replaces random founder placement; size must equal n_clones.
  std::vector<Founder> founders;

  void validate() const;
};

struct SimResult {
  Movie movie;
  std::vector<LinkSet> true_links;
  LineageForest truth;  // clone ids equal founder ids (1..n_clones)
  /// The cell removed by a scripted death, at its last frame.
  std::optional<CellKey> removed_cell;
};

/// Deterministic growth of rod-shaped cells from n_clones founders.
SimResult simulate(const SimConfig& config);

struct ErrorConfig {
  double p_over_transient = 0.0;   // per cell per frame: one-frame split into 2-3 fragments
  double p_over_persistent = 0.0;  // per true cell segment: the same split for persist_len frames
  int persist_len = 4;
  double p_under = 0.0;  // per touching pair per frame: one-frame label merge
  std::uint64_t seed = 1;

  void validate() const;
};

enum class ErrorKind { over_transient, over_persistent, under, skipped };

std::string_view to_string(ErrorKind kind);

struct ErrorLogEntry {
  int frame = 0;
  ErrorKind kind = ErrorKind::skipped;
  std::vector<Label> true_labels;
  std::vector<Label> corrupted_labels;
  std::string note;
};

struct CorruptedMovie {
  Movie movie;
  std::vector<ErrorLogEntry> log;
};

/// Corrupt a clean movie with logged over- and under-segmentation errors.
/// Frame 0 is never touched.
CorruptedMovie inject_errors(const Movie& movie, const LineageForest& truth,
                             const ErrorConfig& config);

/// Cut one cell perpendicular to its principal axis at the given fractions of
/// its length (sorted, in (0, 1)). The first fragment keeps `label`, the others
/// get fresh labels. Returns the new labels, or nothing when a cut would leave
/// an empty or disconnected fragment (frame untouched).
std::optional<std::vector<Label>> fragment_cell(LabeledFrame& frame, Label label,
                                                std::span<const double> cut_fractions);

/// Sorted pairs (a < b) of labels whose regions are 8-adjacent.
std::vector<std::pair<Label, Label>> touching_pairs(const LabeledFrame& frame);

}  // namespace cellforest
