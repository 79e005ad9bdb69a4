#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "cli_commands.hpp"
#include "doctest.h"
#include "pkrect/io.hpp"

using namespace pkrect;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content = "") const {
    const auto p = path / name;
    if (!content.empty()) io::write_text_atomic(p, content);
    return p.string();
  }
};

}  // namespace

TEST_CASE("version and usage") {
  CHECK(invoke({"--version"}).code == 0);
  CHECK(invoke({"--version"}).out.find(cli::kVersion) != std::string::npos);
  CHECK(invoke({"rectify", "--version"}).code == 0);
  CHECK(invoke({"eval", "--help"}).code == 0);
  CHECK(invoke({}).code == cli::kUsageOrIo);
  CHECK(invoke({"frobnicate"}).code == cli::kUsageOrIo);
  CHECK(invoke({"eval", "a", "b", "--metric", "nope"}).code == cli::kUsageOrIo);
}

TEST_CASE("gen-prior from labels") {
  TempDir dir("pkrect_cli_gen");
  const auto labels = dir.file("labels.csv", "0\n0\n1\n");
  const auto out = dir.file("prior.json");
  REQUIRE(invoke({"gen-prior", labels, "--type", "ub", "--sigma", "0", "-o", out}).code == 0);
  const auto k = io::prior_from_json(io::json::parse(io::read_text(out)));
  REQUIRE(k.unary.size() == 2);
  CHECK(k.unary[0].lower == doctest::Approx(2.0 / 3));
  CHECK(k.unary[0].upper == doctest::Approx(2.0 / 3));
  CHECK(k.unary[1].lower == doctest::Approx(1.0 / 3));
  CHECK(k.binary.empty());
  CHECK(fs::exists(out + ".manifest.json"));

  REQUIRE(invoke({"gen-prior", labels, "--type", "ub+br", "--sigma", "0.5", "-o", out}).code == 0);
  const auto both = io::prior_from_json(io::json::parse(io::read_text(out)));
  CHECK(both.unary.size() == 2);
  CHECK(both.binary.size() == 1);

  const auto prior = dir.file("q.json", "[0.2, 0.5, 0.3]");
  REQUIRE(invoke({"gen-prior", prior, "--type", "br", "-o", out}).code == 0);
  const auto br = io::prior_from_json(io::json::parse(io::read_text(out)));
  CHECK(br.binary == std::vector<BinaryRelationship>{{1, 2, 0.0}, {2, 0, 0.0}});

  REQUIRE(invoke({"gen-prior", prior, "--partial", "major:1", "-o", out}).code == 0);
  CHECK(io::prior_from_json(io::json::parse(io::read_text(out))).unary.size() == 1);

  CHECK(invoke({"gen-prior", prior, "--partial", "major", "-o", out}).code == cli::kUsageOrIo);
  CHECK(invoke({"gen-prior", dir.file("bad.csv", "0\nx\n"), "-o", out}).code == cli::kUsageOrIo);
  CHECK(invoke({"gen-prior", dir.file("missing.csv"), "-o", out}).code == cli::kUsageOrIo);
}

TEST_CASE("rectify command") {
  TempDir dir("pkrect_cli_rect");
  const auto probs = dir.file("p.csv", "0.9,0.1\n0.8,0.2\n0.6,0.4\n");
  const auto empty = dir.file("empty.json", R"({"num_classes": 2})");
  const auto labels = dir.file("labels.csv");
  const auto report = dir.file("report.json");

  REQUIRE(invoke({"rectify", "--probs", probs, "--prior", empty, "-o", labels}).code == 0);
  CHECK(io::read_labels(labels) == std::vector<int>{0, 0, 0});

  const auto ub = dir.file("ub.json", R"({"num_classes": 2, "unary_bounds": [
      {"class": 0, "lower": 0.333333333333, "upper": 1},
      {"class": 1, "lower": 0.333333333333, "upper": 1}]})");
  REQUIRE(invoke({"rectify", "--probs", probs, "--prior", ub, "-o", labels, "--report", report})
              .code == 0);
  CHECK(io::read_labels(labels) == std::vector<int>{0, 0, 1});
  const auto rep = io::json::parse(io::read_text(report));
  CHECK(rep["class_counts"] == io::json::array({2, 1}));
  CHECK(rep["M"] == 30.0);
  CHECK(rep["certified_optimal"] == true);
  CHECK(rep["changed"] == 1);

  // Distances go through the softmax first.
  const auto dists = dir.file("d.csv", "0,2\n3,0\n");
  REQUIRE(invoke({"rectify", "--distances", dists, "--prior", empty, "-o", labels}).code == 0);
  CHECK(io::read_labels(labels) == std::vector<int>{0, 1});

  const auto contradictory = dir.file("bad.json", R"({"num_classes": 2, "unary_bounds": [
      {"class": 0, "lower": 0.9, "upper": 1}, {"class": 1, "lower": 0.9, "upper": 1}]})");
  const auto hard = invoke({"rectify", "--probs", probs, "--prior", contradictory, "--mode", "hard",
                         "-o", labels, "--report", report});
  CHECK(hard.code == cli::kInfeasible);
  CHECK(io::json::parse(io::read_text(report))["feasible"] == false);

  const auto big = dir.file("big.csv", [] {
    std::string s;
    for (int i = 0; i < 30; ++i) s += "0.5,0.5\n";
    return s;
  }());
  CHECK(invoke({"rectify", "--probs", big, "--prior", ub, "--strategy", "brute-force", "-o", labels})
            .code == cli::kTooLarge);

  const auto feats = dir.file("f.csv", "0\n1\n");
  CHECK(invoke({"rectify", "--probs", probs, "--prior", ub, "--features", feats, "-o", labels})
            .code == cli::kUsageOrIo);
  const auto three = dir.file("p3.csv", "0.2,0.3,0.5\n");
  CHECK(invoke({"rectify", "--probs", three, "--prior", ub, "-o", labels}).code == cli::kUsageOrIo);
  CHECK(invoke({"rectify", "--prior", ub, "-o", labels}).code == cli::kUsageOrIo);
  CHECK(invoke({"rectify", "--probs", probs, "--distances", dists, "--prior", ub, "-o", labels})
            .code == cli::kUsageOrIo);
}

TEST_CASE("eval command") {
  TempDir dir("pkrect_cli_eval");
  const auto truth = dir.file("t.csv", "0\n0\n0\n0\n0\n0\n0\n0\n0\n1\n");
  const auto zeros = dir.file("z.csv", "0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n");
  auto value = [](const Run& r) { return io::json::parse(r.out)["value"].get<double>(); };
  CHECK(value(invoke({"eval", truth, truth, "--metric", "acc"})) == 1.0);
  CHECK(value(invoke({"eval", zeros, truth, "--metric", "per-class-acc"})) == 0.5);
  CHECK(value(invoke({"eval", truth, truth, "--metric", "kl"})) == 0.0);
  CHECK(invoke({"eval", dir.file("s.csv", "0\n"), truth}).code == cli::kUsageOrIo);
}

TEST_CASE("simulate command") {
  TempDir dir("pkrect_cli_sim");
  const auto spec = dir.file("spec.json", R"({
    "num_classes": 3, "feature_dim": 2,
    "class_means": [[1, 0], [0, 1], [-1, -1]], "class_scales": [0.4, 0.4, 0.4],
    "source_prior": [0.6, 0.3, 0.1], "target_prior": [0.1, 0.3, 0.6],
    "n_source": 60, "n_target": 40})");
  const auto out = (dir.path / "run").string();
  REQUIRE(invoke({"simulate", spec, "--arms", "baseline", "--seeds", "1", "--iterations", "3", "-o",
               out})
              .code == 0);
  const auto trace = io::read_text(out + "/baseline.jsonl");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 3);

  REQUIRE(invoke({"simulate", spec, "--arms", "baseline,ub0,br,ub0.5+br", "--seeds", "2",
               "--iterations", "2", "-o", out})
              .code == 0);
  const auto summary = io::json::parse(io::read_text(out + "/summary.json"));
  for (const char* arm : {"baseline", "ub0", "br", "ub0.5+br"})
    CHECK(summary["arms"][arm]["acc_pseudo_first"]["n"] == 2);
  CHECK(fs::exists(out + "/ub0_histograms.csv"));
  CHECK(fs::exists(out + "/manifest.json"));

  CHECK(invoke({"simulate", spec, "--arms", "ubx", "-o", out}).code == cli::kUsageOrIo);
  CHECK(invoke({"simulate", dir.file("bad.json", "{}"), "-o", out}).code == cli::kUsageOrIo);
}

TEST_CASE("the installed binary honors the exit codes") {
  TempDir dir("pkrect_cli_bin");
  const std::string bin = PKRECT_CLI_PATH;
  CHECK(std::system((bin + " --version > /dev/null").c_str()) == 0);
  const int status = std::system((bin + " eval /nonexistent /nonexistent 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(status) == 1);
}
