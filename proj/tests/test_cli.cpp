#include "doctest.h"

#include <fstream>
#include <sstream>

#include "cellforest/cli.hpp"
#include "cellforest/io.hpp"
#include "support.hpp"

using namespace cellforest;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"simulate"}).code == kExitUsage);  // --out missing
  CHECK(run({"export", "--in", "/nonexistent/forest.tsv"}).code == kExitUsage);
  const Run help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("analyze") != std::string::npos);
}

TEST_CASE("data errors exit 2") {
  cftest::TempDir dir("clidata");
  {
    std::ofstream(dir / "cfg.json") << R"({"n_clones": 0})";
  }
  const Run r = run({"simulate", "--config", (dir / "cfg.json").string(), "--out",
                     (dir / "m").string()});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("n_clones") != std::string::npos);

  fs::create_directories(dir / "empty");
  CHECK(run({"analyze", "--in", (dir / "empty").string(), "--out", (dir / "o").string()}).code ==
        kExitData);
}

TEST_CASE("simulate, corrupt, analyze, metrics and export") {
  cftest::TempDir dir("cli");
  {
    std::ofstream(dir / "cfg.json")
        << R"({"n_clones": 2, "frames": 24, "width": 80, "height": 80})";
  }
  const std::string sim = (dir / "sim").string(), bad = (dir / "bad").string(),
                    out = (dir / "out").string();
  REQUIRE(run({"simulate", "--config", (dir / "cfg.json").string(), "--seed", "3", "--out", sim})
              .code == kExitOk);
  CHECK(fs::exists(dir / "sim" / "forest.tsv"));
  CHECK(fs::exists(dir / "sim" / "frame_0023.pgm"));

  REQUIRE(run({"corrupt", "--in", sim, "--p-over", "0.05", "--p-under", "0.05", "--seed", "2",
               "--out", bad})
              .code == kExitOk);
  CHECK(read_file(dir / "bad" / "errors.tsv").rfind("frame\tkind\t", 0) == 0);
  MovieManifest manifest;
  read_movie(bad, &manifest);
  CHECK(manifest.provenance.contains("simulation"));
  CHECK(manifest.provenance.contains("errors"));

  const Run a = run({"analyze", "--in", bad, "--out", out});
  REQUIRE(a.code == kExitOk);
  CHECK(a.out.rfind("parameters: T=0.75 M=0.90 min-life=3 radius=5 max-sweeps=5\n", 0) == 0);
  for (const char* f : {"forest.tsv", "forest.dot", "events.tsv", "validity.tsv", "report.txt"}) {
    CHECK(fs::exists(dir / "out" / f));
  }

  const Run m = run({"metrics", "--pred", out, "--truth", sim, "--out", (dir / "m.tsv").string()});
  REQUIRE(m.code == kExitOk);
  CHECK(m.out.find("f1\t") != std::string::npos);
  CHECK(read_file(dir / "m.tsv") == m.out);

  const Run e = run({"export", "--in", out, "--format", "dot"});
  REQUIRE(e.code == kExitOk);
  CHECK(e.out == read_file(dir / "out" / "forest.dot"));
  CHECK(run({"export", "--in", out, "--format", "png"}).code == kExitUsage);

  const Run raw = run({"analyze", "--in", bad, "--out", (dir / "raw").string(), "--no-correct"});
  CHECK(raw.code == kExitOk);
  CHECK(raw.out.find("(correction disabled)") != std::string::npos);
  CHECK(read_file(dir / "raw" / "events.tsv") ==
        "frame_from\tframe_to\tkind\tlabels_before\tlabels_after\tscore_used\n");
}
