#include "cellforest/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cellforest/correction.hpp"
#include "cellforest/io.hpp"
#include "cellforest/metrics.hpp"
#include "cellforest/simulator.hpp"
#include "cellforest/tracking.hpp"

namespace cellforest {

using nlohmann::json;

namespace {

constexpr const char* kForestFile = "forest.tsv";

std::string param_header(const AnalysisParams& p, bool corrected) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "parameters: T=%.2f M=%.2f min-life=%d radius=%d max-sweeps=%d%s\n",
                p.T, p.M, p.min_life_frames, p.neighborhood_radius_px, p.max_sweeps,
                corrected ? "" : " (correction disabled)");
  return buf;
}

LineageForest read_forest_beside(const fs::path& dir) {
  const fs::path p = fs::is_directory(dir) ? dir / kForestFile : dir;
  if (!fs::exists(p)) throw InputError("no forest file at " + p.string());
  return forest_from_tsv(read_file(p), p.string());
}

void write_forest_files(const LineageForest& forest, const fs::path& dir) {
  atomic_write(dir / kForestFile, forest_to_tsv(forest));
  atomic_write(dir / "forest.dot", forest_to_dot(forest));
}

struct SimulateArgs {
  std::string config;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  SimConfig cfg;
  if (!a.config.empty()) cfg = sim_config_from_json(json::parse(read_file(a.config)));
  if (a.seed_set) cfg.seed = a.seed;
  cfg.validate();
  SimResult sim = simulate(cfg);
  const fs::path dir = a.out;
  write_movie(sim.movie, dir, json{{"simulation", sim_config_to_json(cfg)}});
  write_forest_files(sim.truth, dir);
  out << "simulated " << sim.movie.frame_count() << " frames, " << sim.truth.size()
      << " cells, " << cfg.n_clones << " clones -> " << dir.string() << "\n";
  return kExitOk;
}

struct CorruptArgs {
  std::string in, out;
  ErrorConfig cfg;
};

int run_corrupt(const CorruptArgs& a, std::ostream& out) {
  MovieManifest manifest;
  Movie movie = read_movie(a.in, &manifest);
  const fs::path forest_path = fs::path(a.in) / kForestFile;
  LineageForest truth = fs::exists(forest_path)
                            ? forest_from_tsv(read_file(forest_path), forest_path.string())
                            : build_forest(movie, link_movie(movie));
  if (truth.frame_count() != movie.frame_count()) {
    throw InputError("forest and movie disagree on the frame count");
  }
  CorruptedMovie bad = inject_errors(movie, truth, a.cfg);
  json prov = manifest.provenance;
  prov["errors"] = error_config_to_json(a.cfg);
  const fs::path dir = a.out;
  write_movie(bad.movie, dir, prov);
  atomic_write(dir / "errors.tsv", error_log_to_tsv(bad.log));
  const auto applied = std::count_if(bad.log.begin(), bad.log.end(),
                                     [](const ErrorLogEntry& e) { return e.kind != ErrorKind::skipped; });
  out << "injected " << applied << " errors (" << bad.log.size() - static_cast<std::size_t>(applied)
      << " skipped) -> " << dir.string() << "\n";
  return kExitOk;
}

struct AnalyzeArgs {
  std::string in, out;
  AnalysisParams params;
  bool no_correct = false;
};

int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
  a.params.validate();
  MovieManifest manifest;
  Movie movie = read_movie(a.in, &manifest);
  CorrectionResult raw = analyze_without_correction(movie);
  const ValidityReport before = validity_report(raw.forest);
  CorrectionResult result = a.no_correct ? std::move(raw) : run_correction_loop(std::move(movie), a.params);
  const ValidityReport after = validity_report(result.forest);
  const CorrectionSummary summary = correction_summary(result.events, before, after);

  const fs::path dir = a.out;
  write_movie(result.movie, dir, manifest.provenance);
  write_forest_files(result.forest, dir);
  atomic_write(dir / "events.tsv", events_to_tsv(result.events));
  atomic_write(dir / "validity.tsv", render_validity_tsv(after));
  std::string report = param_header(a.params, !a.no_correct);
  report += "sweeps: " + std::to_string(result.sweeps) + "\n";
  report += render_summary(summary);
  atomic_write(dir / "report.txt", report);
  out << report;
  return kExitOk;
}

struct MetricsArgs {
  std::string pred, truth, out;
};

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  const Movie pm = read_movie(a.pred);
  const Movie tm = read_movie(a.truth);
  const LineageForest pf = read_forest_beside(a.pred);
  const LineageForest tf = read_forest_beside(a.truth);
  const std::string text = render_comparison(compare_to_truth(pf, pm, tf, tm));
  if (!a.out.empty()) atomic_write(a.out, text);
  out << text;
  return kExitOk;
}

struct ExportArgs {
  std::string in, format = "dot", out;
};

int run_export(const ExportArgs& a, std::ostream& out) {
  const LineageForest forest = read_forest_beside(a.in);
  const std::string text = a.format == "dot" ? forest_to_dot(forest) : forest_to_tsv(forest);
  if (a.out.empty()) {
    out << text;
  } else {
    atomic_write(a.out, text);
  }
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lineage forest reconstruction and segmentation-error correction for cell movies",
               "cellforest"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Grow a synthetic colony movie with its true forest");
  s->add_option("--config", sim.config, "JSON simulation config")->check(CLI::ExistingFile);
  s->add_option("--seed", sim.seed, "RNG seed (overrides the config)")->each([&](const std::string&) {
    sim.seed_set = true;
  });
  s->add_option("--out", sim.out, "Output movie directory")->required();

  CorruptArgs cor;
  auto* c = app.add_subcommand("corrupt", "Inject logged segmentation errors into a movie");
  c->add_option("--in", cor.in, "Input movie directory")->required()->check(CLI::ExistingDirectory);
  c->add_option("--p-over", cor.cfg.p_over_transient, "Transient over-segmentation probability")
      ->check(CLI::Range(0.0, 1.0));
  c->add_option("--p-over-persistent", cor.cfg.p_over_persistent,
                "Persistent over-segmentation probability per cell segment")
      ->check(CLI::Range(0.0, 1.0));
  c->add_option("--persist-len", cor.cfg.persist_len, "Frames per persistent event")
      ->check(CLI::PositiveNumber);
  c->add_option("--p-under", cor.cfg.p_under, "Under-segmentation probability per touching pair")
      ->check(CLI::Range(0.0, 1.0));
  c->add_option("--seed", cor.cfg.seed, "RNG seed");
  c->add_option("--out", cor.out, "Output movie directory")->required();

  AnalyzeArgs an;
  auto* z = app.add_subcommand("analyze", "Track, correct and export lineage forests");
  z->add_option("--in", an.in, "Input movie directory or manifest")->required()->check(CLI::ExistingPath);
  z->add_option("--out", an.out, "Output directory")->required();
  z->add_option("--T", an.params.T, "Under-segmentation threshold")->capture_default_str();
  z->add_option("--M", an.params.M, "Retro-merge threshold")->capture_default_str();
  z->add_option("--min-life", an.params.min_life_frames, "Minimum lifespan for a split")
      ->capture_default_str();
  z->add_option("--radius", an.params.neighborhood_radius_px, "Neighbourhood radius in pixels")
      ->capture_default_str();
  z->add_option("--max-sweeps", an.params.max_sweeps, "Sweep limit")->capture_default_str();
  z->add_flag("--no-correct", an.no_correct, "Track only, no correction");

  MetricsArgs me;
  auto* m = app.add_subcommand("metrics", "Compare a predicted forest with the true one");
  m->add_option("--pred", me.pred, "Analyzed movie directory")->required()->check(CLI::ExistingDirectory);
  m->add_option("--truth", me.truth, "Simulated movie directory")->required()->check(CLI::ExistingDirectory);
  m->add_option("--out", me.out, "Write the comparison table here too");

  ExportArgs ex;
  auto* e = app.add_subcommand("export", "Re-render a stored forest");
  e->add_option("--in", ex.in, "Directory holding forest.tsv, or the file itself")
      ->required()
      ->check(CLI::ExistingPath);
  e->add_option("--format", ex.format, "dot or tsv")->check(CLI::IsMember({"dot", "tsv"}));
  e->add_option("--out", ex.out, "Output file (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& ex) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (s->parsed()) return run_simulate(sim, out);
    if (c->parsed()) return run_corrupt(cor, out);
    if (z->parsed()) return run_analyze(an, out);
    if (m->parsed()) return run_metrics(me, out);
    if (e->parsed()) return run_export(ex, out);
  } catch (const GrowthOverflow& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  } catch (const json::exception& ex) {
    err << "error: bad JSON: " << ex.what() << "\n";
    return kExitData;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int cli_dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace cellforest
