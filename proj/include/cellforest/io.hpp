#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cellforest/correction.hpp"
#include "cellforest/forest.hpp"
#include "cellforest/frame.hpp"
#include "cellforest/simulator.hpp"

namespace cellforest {

namespace fs = std::filesystem;

/// A file that does not parse. `offset` is the byte position of the problem.
class FormatError : public InputError {
 public:
  FormatError(const std::string& file, std::uint64_t offset, const std::string& what)
      : InputError(file + " @ byte " + std::to_string(offset) + ": " + what),
        file_(file),
        offset_(offset) {}
  const std::string& file() const { return file_; }
  std::uint64_t offset() const { return offset_; }

 private:
  std::string file_;
  std::uint64_t offset_;
};

/// Whole-file atomic write (temporary sibling file, then rename).
void atomic_write(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);

/// Binary PGM (P5), maxval 65535, big-endian 16-bit samples; pixel = label.
std::string encode_frame(const LabeledFrame& frame);
LabeledFrame decode_frame(std::string_view bytes, int index = 0, const std::string& name = "<memory>");
void write_frame(const LabeledFrame& frame, const fs::path& path);
LabeledFrame read_frame(const fs::path& path, int index = 0);

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";

struct MovieManifest {
  int version = kManifestVersion;
  int width = 0;
  int height = 0;
  double interval_min = 5.0;
  std::vector<std::string> frames;  // file names relative to the manifest
  nlohmann::json provenance = nlohmann::json::object();
};

nlohmann::json manifest_to_json(const MovieManifest& manifest);
MovieManifest manifest_from_json(const nlohmann::json& j, const std::string& name = "manifest");

/// Write frames plus manifest into `dir` (created if needed).
void write_movie(const Movie& movie, const fs::path& dir,
                 const nlohmann::json& provenance = nlohmann::json::object());
/// `path` is a movie directory or its manifest file.
Movie read_movie(const fs::path& path, MovieManifest* manifest_out = nullptr);

nlohmann::json sim_config_to_json(const SimConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json error_config_to_json(const ErrorConfig& config);

/// Tab-separated forest: frame, cell_id, parent_frame, parent_cell_id,
/// clone_id, area_px, centroid_x, centroid_y, status; sorted by (frame, cell_id).
std::string forest_to_tsv(const LineageForest& forest);
/// Rebuild a forest from its TSV form. Statuses are restored from the file;
/// clone ids must agree with the tree structure.
LineageForest forest_from_tsv(std::string_view text, const std::string& name = "<memory>");
/// Directed graph, one node "f<frame>_c<label>" per cell.
std::string forest_to_dot(const LineageForest& forest);

std::string events_to_tsv(std::span<const CorrectionEvent> events);
std::string error_log_to_tsv(std::span<const ErrorLogEntry> log);

}  // namespace cellforest
