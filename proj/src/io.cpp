#include "cellforest/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

namespace cellforest {

using nlohmann::json;

void atomic_write(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// PGM

std::string encode_frame(const LabeledFrame& frame) {
  std::string out = "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) +
                    "\n65535\n";
  out.reserve(out.size() + 2 * frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const Label l = frame[i];
    if (l > 65535) {
      throw InputError("label " + std::to_string(l) + " exceeds the 16-bit range at pixel " +
                       std::to_string(i));
    }
    out.push_back(static_cast<char>((l >> 8) & 0xff));
    out.push_back(static_cast<char>(l & 0xff));
  }
  return out;
}

namespace {

class HeaderReader {
 public:
  HeaderReader(std::string_view bytes, const std::string& name) : b_(bytes), name_(name) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const char c = b_[pos_];
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long long number(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(b_.data() + pos_, b_.data() + b_.size(), v);
    if (ec != std::errc() || ptr == b_.data() + start) {
      throw FormatError(name_, start, std::string("header field ") + field + ": expected a decimal number");
    }
    pos_ = static_cast<std::size_t>(ptr - b_.data());
    return v;
  }

 private:
  std::string_view b_;
  const std::string& name_;
  std::size_t pos_ = 0;
};

}  // namespace

LabeledFrame decode_frame(std::string_view bytes, int index, const std::string& name) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError(name, 0, "header field magic: expected P5");
  }
  HeaderReader h(bytes.substr(2), name);
  const std::size_t base = 2;
  const long long w = h.number("width");
  const long long ht = h.number("height");
  h.skip_space_and_comments();
  const std::size_t maxval_at = base + h.pos();
  const long long maxval = h.number("maxval");
  if (w < 1 || ht < 1 || w > (1 << 20) || ht > (1 << 20)) {
    throw FormatError(name, 2, "header field width/height: out of range");
  }
  if (maxval != 65535) {
    throw FormatError(name, maxval_at,
                      "header field maxval: expected 65535 (16-bit labels), found " +
                          std::to_string(maxval));
  }
  std::size_t pos = base + h.pos();
  if (pos >= bytes.size() || !(bytes[pos] == ' ' || bytes[pos] == '\n' || bytes[pos] == '\t' ||
                               bytes[pos] == '\r')) {
    throw FormatError(name, pos, "header: missing whitespace before the raster");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(ht);
  if (bytes.size() - pos < 2 * n) {
    throw FormatError(name, bytes.size(),
                      "truncated raster: need " + std::to_string(2 * n) + " bytes, have " +
                          std::to_string(bytes.size() - pos));
  }
  if (bytes.size() - pos > 2 * n) {
    throw FormatError(name, pos + 2 * n, "trailing bytes after the raster");
  }
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto hi = static_cast<unsigned char>(bytes[pos + 2 * i]);
    const auto lo = static_cast<unsigned char>(bytes[pos + 2 * i + 1]);
    labels[i] = (static_cast<Label>(hi) << 8) | lo;
  }
  return LabeledFrame(index, static_cast<int>(w), static_cast<int>(ht), std::move(labels));
}

void write_frame(const LabeledFrame& frame, const fs::path& path) {
  atomic_write(path, encode_frame(frame));
}

LabeledFrame read_frame(const fs::path& path, int index) {
  return decode_frame(read_file(path), index, path.string());
}

// ---------------------------------------------------------------------------
// Manifest

json manifest_to_json(const MovieManifest& m) {
  return json{{"format", "cellforest-movie"},
              {"version", m.version},
              {"width", m.width},
              {"height", m.height},
              {"interval_min", m.interval_min},
              {"frames", m.frames},
              {"provenance", m.provenance}};
}

MovieManifest manifest_from_json(const json& j, const std::string& name) {
  auto fail = [&](const std::string& what) { return FormatError(name, 0, what); };
  if (!j.is_object()) throw fail("manifest is not a JSON object");
  if (j.value("format", "") != "cellforest-movie") throw fail("field format: expected cellforest-movie");
  MovieManifest m;
  try {
    m.version = j.at("version").get<int>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.interval_min = j.at("interval_min").get<double>();
    m.frames = j.at("frames").get<std::vector<std::string>>();
    if (j.contains("provenance")) m.provenance = j.at("provenance");
  } catch (const json::exception& e) {
    throw fail(std::string("manifest field: ") + e.what());
  }
  if (m.version != kManifestVersion) {
    throw fail("field version: unsupported " + std::to_string(m.version));
  }
  if (m.width < 1 || m.height < 1) throw fail("field width/height: must be positive");
  if (!(m.interval_min > 0.0)) throw fail("field interval_min: must be positive");
  if (m.frames.empty()) throw fail("field frames: empty");
  return m;
}

namespace {

std::string frame_file_name(int f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.pgm", f);
  return buf;
}

}  // namespace

void write_movie(const Movie& movie, const fs::path& dir, const json& provenance) {
  if (movie.frames.empty()) throw InputError("cannot write an empty movie");
  fs::create_directories(dir);
  MovieManifest m;
  m.width = movie.width();
  m.height = movie.height();
  m.interval_min = movie.interval_min;
  m.provenance = provenance;
  for (int f = 0; f < movie.frame_count(); ++f) {
    require_same_shape(movie.frames.front(), movie.frames[f], "write_movie");
    m.frames.push_back(frame_file_name(f));
    write_frame(movie.frames[f], dir / m.frames.back());
  }
  atomic_write(dir / kManifestName, manifest_to_json(m).dump(2) + "\n");
}

Movie read_movie(const fs::path& path, MovieManifest* manifest_out) {
  const fs::path manifest_path = fs::is_directory(path) ? path / kManifestName : path;
  json j;
  try {
    j = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw FormatError(manifest_path.string(), e.byte, "invalid JSON");
  }
  MovieManifest m = manifest_from_json(j, manifest_path.string());
  Movie movie;
  movie.interval_min = m.interval_min;
  const fs::path dir = manifest_path.parent_path();
  for (std::size_t f = 0; f < m.frames.size(); ++f) {
    LabeledFrame frame = read_frame(dir / m.frames[f], static_cast<int>(f));
    if (frame.width() != m.width || frame.height() != m.height) {
      throw FormatError((dir / m.frames[f]).string(), 0,
                        "frame dimensions disagree with the manifest");
    }
    movie.frames.push_back(std::move(frame));
  }
  if (manifest_out) *manifest_out = std::move(m);
  return movie;
}

// ---------------------------------------------------------------------------
// Configs

json sim_config_to_json(const SimConfig& c) {
  json j{{"n_clones", c.n_clones},
         {"frames", c.frames},
         {"interval_min", c.interval_min},
         {"width", c.width},
         {"height", c.height},
         {"cell_width", c.cell_width},
         {"initial_length", c.initial_length},
         {"growth_rate", c.growth_rate},
         {"division_length_mean", c.division_length_mean},
         {"division_length_cv", c.division_length_cv},
         {"orientation_noise_deg", c.orientation_noise_deg},
         {"seed", c.seed}};
  if (c.death) j["death"] = json{{"frame", c.death->frame}, {"clone", c.death->clone}};
  if (!c.founders.empty()) {
    json list = json::array();
    for (const Founder& f : c.founders) list.push_back(json{{"x", f.x}, {"y", f.y}, {"angle_deg", f.angle_deg}});
    j["founders"] = list;
  }
  return j;
}

SimConfig sim_config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("simulation config must be a JSON object");
  SimConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_clones") c.n_clones = value.get<int>();
      else if (key == "frames") c.frames = value.get<int>();
      else if (key == "interval_min") c.interval_min = value.get<double>();
      else if (key == "width") c.width = value.get<int>();
      else if (key == "height") c.height = value.get<int>();
      else if (key == "cell_width") c.cell_width = value.get<double>();
      else if (key == "initial_length") c.initial_length = value.get<double>();
      else if (key == "growth_rate") c.growth_rate = value.get<double>();
      else if (key == "division_length_mean") c.division_length_mean = value.get<double>();
      else if (key == "division_length_cv") c.division_length_cv = value.get<double>();
      else if (key == "orientation_noise_deg") c.orientation_noise_deg = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "death") {
        if (value.is_null()) {
          c.death.reset();
        } else {
          c.death = ScriptedDeath{value.at("frame").get<int>(), value.at("clone").get<int>()};
        }
      } else if (key == "founders") {
        c.founders.clear();
        for (const json& f : value) {
          c.founders.push_back(Founder{f.at("x").get<double>(), f.at("y").get<double>(),
                                       f.value("angle_deg", 0.0)});
        }
      } else {
        throw InputError("unknown simulation config key: " + key);
      }
    } catch (const json::exception& e) {
      throw InputError("simulation config key " + key + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

json error_config_to_json(const ErrorConfig& c) {
  return json{{"p_over_transient", c.p_over_transient},
              {"p_over_persistent", c.p_over_persistent},
              {"persist_len", c.persist_len},
              {"p_under", c.p_under},
              {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Forest exports

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = line.find(sep, start);
    out.push_back(line.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, const std::string& name, std::size_t offset, const char* field) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(name, offset, std::string("field ") + field + ": cannot parse '" +
                                        std::string(text) + "'");
  }
  return v;
}

constexpr const char* kForestHeader =
    "frame\tcell_id\tparent_frame\tparent_cell_id\tclone_id\tarea_px\tcentroid_x\tcentroid_y\tstatus";

std::string keys_text(const std::vector<CellKey>& keys) {
  std::string out;
  for (const CellKey& k : keys) {
    if (!out.empty()) out += ',';
    out += std::to_string(k.frame) + ":" + std::to_string(k.label);
  }
  return out;
}

std::string labels_text(const std::vector<Label>& labels) {
  std::string out;
  for (Label l : labels) {
    if (!out.empty()) out += ',';
    out += std::to_string(l);
  }
  return out;
}

}  // namespace

std::string forest_to_tsv(const LineageForest& forest) {
  std::string out = std::string(kForestHeader) + "\n";
  // Node ids are already in (frame, label) order.
  for (const CellNode& n : forest.nodes()) {
    out += std::to_string(n.key.frame) + '\t' + std::to_string(n.key.label) + '\t';
    if (n.parent) {
      const CellKey p = forest.node(*n.parent).key;
      out += std::to_string(p.frame) + '\t' + std::to_string(p.label) + '\t';
    } else {
      out += "\t\t";
    }
    out += std::to_string(n.clone_id) + '\t' + std::to_string(n.area_px) + '\t' +
           fixed(n.centroid.x, 3) + '\t' + fixed(n.centroid.y, 3) + '\t' +
           std::string(to_string(n.status)) + '\n';
  }
  return out;
}

LineageForest forest_from_tsv(std::string_view text, const std::string& name) {
  struct Row {
    CellKey key;
    std::optional<CellKey> parent;
    int clone = 0;
    NodeStatus status = NodeStatus::normal;
  };
  std::vector<Row> rows;
  std::map<int, std::vector<CellSummary>> cells;
  int last_frame = -1;
  std::size_t offset = 0;
  bool header = true;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_at = offset;
    offset = end + 1;
    if (header) {
      if (line != kForestHeader) throw FormatError(name, line_at, "unexpected forest header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 9) throw FormatError(name, line_at, "expected 9 columns");
    Row r;
    r.key.frame = parse_number<int>(f[0], name, line_at, "frame");
    r.key.label = parse_number<Label>(f[1], name, line_at, "cell_id");
    if (!f[2].empty() || !f[3].empty()) {
      r.parent = CellKey{parse_number<int>(f[2], name, line_at, "parent_frame"),
                         parse_number<Label>(f[3], name, line_at, "parent_cell_id")};
    }
    r.clone = parse_number<int>(f[4], name, line_at, "clone_id");
    const auto status = node_status_from_string(f[8]);
    if (!status) throw FormatError(name, line_at, "field status: unknown value");
    r.status = *status;
    if (r.key.frame < 0) throw FormatError(name, line_at, "field frame: negative");
    CellSummary s;
    s.label = r.key.label;
    s.area_px = parse_number<std::int64_t>(f[5], name, line_at, "area_px");
    s.centroid.x = parse_number<double>(f[6], name, line_at, "centroid_x");
    s.centroid.y = parse_number<double>(f[7], name, line_at, "centroid_y");
    cells[r.key.frame].push_back(s);
    last_frame = std::max(last_frame, r.key.frame);
    rows.push_back(r);
  }
  if (header) throw FormatError(name, 0, "missing forest header");
  std::vector<std::vector<CellSummary>> per_frame(static_cast<std::size_t>(last_frame + 1));
  for (auto& [frame, list] : cells) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
    per_frame[frame] = std::move(list);
  }
  std::vector<LinkSet> links(per_frame.empty() ? 0 : per_frame.size() - 1);
  for (const Row& r : rows) {
    if (!r.parent) continue;
    if (r.parent->frame != r.key.frame - 1) {
      throw FormatError(name, 0, "parent of " + std::to_string(r.key.frame) + ":" +
                                     std::to_string(r.key.label) + " is not on the previous frame");
    }
    links[r.parent->frame].push_back(TrackingLink{*r.parent, r.key, 0, 0.0});
  }
  for (LinkSet& set : links) {
    std::sort(set.begin(), set.end(), [](const auto& a, const auto& b) { return a.curr < b.curr; });
  }
  LineageForest forest = build_forest(std::span<const std::vector<CellSummary>>(per_frame), links);
  for (const Row& r : rows) {
    const NodeId id = *forest.find(r.key);
    if (forest.node(id).clone_id != r.clone) {
      throw FormatError(name, 0, "clone_id of " + std::to_string(r.key.frame) + ":" +
                                     std::to_string(r.key.label) +
                                     " disagrees with the tree structure");
    }
    forest.set_status(id, r.status);
  }
  return forest;
}

std::string forest_to_dot(const LineageForest& forest) {
  auto id = [&](const CellKey& k) {
    return "f" + std::to_string(k.frame) + "_c" + std::to_string(k.label);
  };
  std::string out = "digraph lineage {\n";
  for (const CellNode& n : forest.nodes()) {
    out += "  " + id(n.key) + " [clone_id=" + std::to_string(n.clone_id) +
           ", area_px=" + std::to_string(n.area_px) + ", status=\"" +
           std::string(to_string(n.status)) + "\"];\n";
  }
  for (const CellNode& n : forest.nodes()) {
    for (NodeId c : n.children) out += "  " + id(n.key) + " -> " + id(forest.node(c).key) + ";\n";
  }
  out += "}\n";
  return out;
}

std::string events_to_tsv(std::span<const CorrectionEvent> events) {
  std::string out = "frame_from\tframe_to\tkind\tlabels_before\tlabels_after\tscore_used\n";
  for (const CorrectionEvent& e : events) {
    out += std::to_string(e.frame_from) + '\t' + std::to_string(e.frame_to) + '\t' +
           std::string(to_string(e.kind)) + '\t' + keys_text(e.labels_before) + '\t' +
           keys_text(e.labels_after) + '\t' + (e.score_used ? fixed(*e.score_used, 6) : "") + '\n';
  }
  return out;
}

std::string error_log_to_tsv(std::span<const ErrorLogEntry> log) {
  std::string out = "frame\tkind\ttrue_labels\tcorrupted_labels\tnote\n";
  for (const ErrorLogEntry& e : log) {
    out += std::to_string(e.frame) + '\t' + std::string(to_string(e.kind)) + '\t' +
           labels_text(e.true_labels) + '\t' + labels_text(e.corrupted_labels) + '\t' + e.note +
           '\n';
  }
  return out;
}

}  // namespace cellforest
