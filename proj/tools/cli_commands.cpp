#include "cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "pkrect/error.hpp"
#include "pkrect/harness.hpp"
#include "pkrect/io.hpp"
#include "pkrect/prior.hpp"
#include "pkrect/rectify.hpp"

namespace pkrect::cli {
namespace {

namespace fs = std::filesystem;
using io::json;

struct GenPriorOptions {
  std::string input;
  std::string type = "ub";
  double sigma = 0.0;
  double noise_phi = 0.0;
  int rank_phi = 0;
  std::string partial;
  std::uint64_t seed = 0;
  int num_classes = 0;
  std::string output;
};

struct RectifyOptions {
  std::string probs;
  std::string distances;
  std::string prior;
  std::string features;
  std::optional<double> M;
  std::string mode = "soft";
  std::string smooth = "auto";
  std::string metric = "cosine";
  std::string strategy = "exact";
  std::string output;
  std::string report;
};

struct SimulateOptions {
  std::string spec;
  std::string arms = "baseline,ub0";
  int seeds = 1;
  std::uint64_t seed_base = 0;
  int iterations = 10;
  std::optional<double> M;
  std::string metric = "cosine";
  std::string output;
};

struct EvalOptions {
  std::string pred;
  std::string truth;
  std::string metric = "acc";
  int num_classes = 0;
};

Metric parse_metric(const std::string& s) {
  return s == "euclidean" ? Metric::euclidean : Metric::cosine;
}

int infer_classes(std::span<const int> a, std::span<const int> b = {}) {
  int hi = -1;
  for (int y : a) hi = std::max(hi, y);
  for (int y : b) hi = std::max(hi, y);
  return hi + 1;
}

json manifest(const std::string& command, json inputs, json config, json outputs) {
  return {{"command", command},
          {"version", kVersion},
          {"inputs", std::move(inputs)},
          {"config", std::move(config)},
          {"outputs", std::move(outputs)}};
}

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

// Seeded draws come from one stream in a fixed order (unary noise, ranking
// noise, partial selection) so a seed means the same thing whatever flags are set.
int cmd_gen_prior(const GenPriorOptions& o, std::ostream& out) {
  ClassPrior q;
  if (fs::path(o.input).extension() == ".json") {
    q = io::class_prior_from_json(json::parse(io::read_text(o.input)));
  } else {
    const auto labels = io::read_labels(o.input);
    const int c = o.num_classes > 0 ? o.num_classes : infer_classes(labels);
    q = estimate_prior(labels, c);
  }
  const std::size_t C = q.num_classes();

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> symmetric(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> unary_draws(C), rank_draws(C), partial_draws(C);
  for (double& d : unary_draws) d = symmetric(rng);
  for (double& d : rank_draws) d = symmetric(rng);
  for (double& d : partial_draws) d = unit(rng);

  require(o.sigma >= 0.0, "--sigma must be nonnegative");
  require(o.noise_phi >= 0.0 && o.noise_phi <= 1.0, "--noise-phi must lie in [0, 1]");

  PriorKnowledge k{static_cast<int>(C), {}, {}};
  if (o.type == "ub" || o.type == "ub+br")
    k = combine(k, make_unary_bounds(perturb_unary(q, o.noise_phi, unary_draws), o.sigma));
  if (o.type == "br" || o.type == "ub+br")
    k = combine(k, make_binary_relationships(perturb_ranking(q, o.rank_phi, rank_draws)));

  if (!o.partial.empty()) {
    const auto colon = o.partial.find(':');
    require(colon != std::string::npos, "--partial expects mode:count");
    const std::string mode = o.partial.substr(0, colon);
    static const std::map<std::string, PartialMode> modes{
        {"major", PartialMode::major}, {"minor", PartialMode::minor},
        {"random", PartialMode::random}};
    const auto it = modes.find(mode);
    require(it != modes.end(), "--partial mode must be major, minor or random");
    int count = 0;
    try {
      std::size_t used = 0;
      count = std::stoi(o.partial.substr(colon + 1), &used);
      require(used == o.partial.size() - colon - 1, "bad --partial count");
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad --partial count in '" + o.partial + "'");
    }
    k = select_partial(k, q, it->second, count, partial_draws);
  }

  io::write_text_atomic(o.output, io::dump(io::prior_to_json(k)));
  io::write_text_atomic(
      manifest_path(o.output),
      io::dump(manifest("gen-prior", {{"input", o.input}},
                        {{"type", o.type},
                         {"sigma", io::round_real(o.sigma)},
                         {"noise_phi", io::round_real(o.noise_phi)},
                         {"rank_phi", o.rank_phi},
                         {"partial", o.partial},
                         {"seed", o.seed},
                         {"num_classes", C}},
                        {o.output})));
  out << "wrote " << o.output << " (" << k.unary.size() << " unary, " << k.binary.size()
      << " binary)\n";
  return kSuccess;
}

int cmd_rectify(const RectifyOptions& o, std::ostream& out, std::ostream& err) {
  const bool from_distances = !o.distances.empty();
  const Matrix raw = io::read_matrix_csv(from_distances ? o.distances : o.probs);
  const ProbMatrix p =
      from_distances ? probs_from_distances(raw) : ProbMatrix::from_probabilities(raw);
  const PriorKnowledge k = io::prior_from_json(json::parse(io::read_text(o.prior)));

  std::optional<Matrix> features;
  if (!o.features.empty()) {
    features = io::read_matrix_csv(o.features);
    require(features->rows() == p.num_samples(),
            "features have " + std::to_string(features->rows()) + " rows, probabilities have " +
                std::to_string(p.num_samples()));
  }

  RectifyConfig cfg;
  cfg.M = o.M;
  if (o.M) require(*o.M >= 0.0, "--M must be nonnegative");
  cfg.mode = o.mode == "hard" ? ConstraintMode::hard : ConstraintMode::soft;
  cfg.use_smooth = o.smooth == "on" || (o.smooth == "auto" && features.has_value());
  require(!cfg.use_smooth || features.has_value(), "--smooth on needs --features");
  cfg.neighbor_metric = parse_metric(o.metric);
  cfg.optimality = o.strategy == "heuristic" ? Optimality::heuristic : Optimality::exact;
  cfg.exhaustive = o.strategy == "brute-force";

  const RectifyResult result = rectify(p, k, features ? &*features : nullptr, cfg);
  const double M = cfg.M.value_or(10.0 * static_cast<double>(p.num_samples()));

  io::write_text_atomic(o.output, io::labels_to_text(result.labels));
  json outputs = json::array({o.output});
  if (!o.report.empty()) {
    json report = io::report_to_json(result.stage2);
    report["M"] = io::round_real(M);
    report["stage1"] = io::report_to_json(result.stage1);
    report["changed"] = result.changed.size();
    report["smooth_pairs"] = result.regularization.pairs.size();
    report["smoothing_applied"] = result.smoothing_applied;
    report["no_anchor_warning"] = result.no_anchor_warning;
    io::write_text_atomic(o.report, io::dump(report));
    outputs.push_back(o.report);
  }
  json inputs = {{from_distances ? "distances" : "probs", from_distances ? o.distances : o.probs},
                 {"prior", o.prior}};
  if (features) inputs["features"] = o.features;
  io::write_text_atomic(manifest_path(o.output),
                        io::dump(manifest("rectify", inputs,
                                          {{"M", io::round_real(M)},
                                           {"mode", o.mode},
                                           {"smooth", cfg.use_smooth},
                                           {"metric", o.metric},
                                           {"strategy", o.strategy}},
                                          outputs)));

  if (result.no_anchor_warning)
    err << "warning: every label changed; smooth regularization skipped\n";
  if (!result.stage2.feasible) {
    err << "infeasible: the hard constraints admit no labeling\n";
    return kInfeasible;
  }
  out << "wrote " << o.output << " (" << result.changed.size() << " labels moved off argmax)\n";
  return kSuccess;
}

struct Arm {
  std::string name;
  std::optional<double> sigma;  // unary bounds with this tightness
  bool binary = false;
};

Arm parse_arm(const std::string& name) {
  Arm arm{name, std::nullopt, false};
  if (name == "baseline") return arm;
  std::string rest = name;
  const auto plus = rest.find('+');
  if (plus != std::string::npos) {
    require(rest.substr(plus + 1) == "br", "unknown arm '" + name + "'");
    arm.binary = true;
    rest = rest.substr(0, plus);
  }
  if (rest == "br") {
    require(!arm.binary, "unknown arm '" + name + "'");
    arm.binary = true;
    return arm;
  }
  require(rest.rfind("ub", 0) == 0 && rest.size() > 2, "unknown arm '" + name + "'");
  try {
    std::size_t used = 0;
    arm.sigma = std::stod(rest.substr(2), &used);
    require(used == rest.size() - 2, "unknown arm '" + name + "'");
  } catch (const std::logic_error&) {
    throw InvalidArgument("unknown arm '" + name + "'");
  }
  require(*arm.sigma >= 0.0, "arm sigma must be nonnegative");
  return arm;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

json mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return nullptr;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  return {{"mean", io::round_real(mean)}, {"std", io::round_real(sd)}, {"n", xs.size()}};
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const auto spec = io::domain_spec_from_json(json::parse(io::read_text(o.spec)));
  require(o.seeds >= 1, "--seeds must be at least 1");
  require(o.iterations >= 1, "--iterations must be at least 1");
  std::vector<Arm> arms;
  for (const auto& name : split(o.arms, ',')) arms.push_back(parse_arm(name));
  require(!arms.empty(), "--arms is empty");

  const fs::path dir = o.output;
  fs::create_directories(dir);

  harness::AdaptConfig cfg;
  cfg.iterations = o.iterations;
  cfg.centroid_metric = parse_metric(o.metric);
  cfg.rectify.neighbor_metric = cfg.centroid_metric;
  cfg.rectify.M = o.M;

  json summary = {{"seeds", o.seeds}, {"iterations", o.iterations}, {"arms", json::object()}};
  json outputs = json::array();
  for (const Arm& arm : arms) {
    std::string trace, histograms;
    std::vector<double> acc_first, acc_final, pca_final, kl_final;
    for (int s = 0; s < o.seeds; ++s) {
      const std::uint64_t seed = o.seed_base + static_cast<std::uint64_t>(s);
      const auto domains = harness::generate_shifted_domains(spec, seed);
      const ClassPrior truth = estimate_prior(domains.target.labels, spec.num_classes);

      std::optional<PriorKnowledge> k;
      if (arm.sigma || arm.binary) {
        k = PriorKnowledge{spec.num_classes, {}, {}};
        if (arm.sigma) k = combine(*k, make_unary_bounds(truth, *arm.sigma));
        if (arm.binary) k = combine(*k, make_binary_relationships(truth));
      }
      const auto result =
          harness::shot_like_adapt(domains.source, domains.target, k ? &*k : nullptr, cfg);

      for (const auto& rec : result.records) {
        json line = io::record_to_json(rec);
        line["arm"] = arm.name;
        line["seed"] = seed;
        trace += line.dump() + "\n";
        histograms += std::to_string(seed) + "," + std::to_string(rec.iteration);
        for (int h : rec.histogram) histograms += "," + std::to_string(h);
        histograms += "\n";
      }
      const auto& first = result.records.front();
      const auto& last = result.records.back();
      acc_first.push_back(first.acc_pseudo);
      acc_final.push_back(last.acc_pseudo);
      pca_final.push_back(last.per_class_acc);
      if (last.kl_labels) kl_final.push_back(*last.kl_labels);
    }
    const fs::path trace_path = dir / (arm.name + ".jsonl");
    const fs::path hist_path = dir / (arm.name + "_histograms.csv");
    io::write_text_atomic(trace_path, trace);
    io::write_text_atomic(hist_path, histograms);
    outputs.push_back(trace_path.string());
    outputs.push_back(hist_path.string());
    summary["arms"][arm.name] = {{"acc_pseudo_first", mean_std(acc_first)},
                                 {"acc_pseudo_final", mean_std(acc_final)},
                                 {"per_class_acc_final", mean_std(pca_final)},
                                 {"kl_labels_final", mean_std(kl_final)}};
    out << arm.name << ": first-iteration pseudo-label accuracy "
        << io::format_real(summary["arms"][arm.name]["acc_pseudo_first"]["mean"].get<double>())
        << "\n";
  }
  const fs::path summary_path = dir / "summary.json";
  io::write_text_atomic(summary_path, io::dump(summary));
  outputs.push_back(summary_path.string());
  io::write_text_atomic(dir / "manifest.json",
                        io::dump(manifest("simulate", {{"spec", o.spec}},
                                          {{"arms", o.arms},
                                           {"seeds", o.seeds},
                                           {"seed_base", o.seed_base},
                                           {"iterations", o.iterations},
                                           {"M", o.M ? json(io::round_real(*o.M)) : json("10*n_t")},
                                           {"metric", o.metric}},
                                          outputs)));
  return kSuccess;
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const auto pred = io::read_labels(o.pred);
  const auto truth = io::read_labels(o.truth);
  require(pred.size() == truth.size(), "prediction has " + std::to_string(pred.size()) +
                                           " labels, truth has " + std::to_string(truth.size()));
  const int C = o.num_classes > 0 ? o.num_classes : infer_classes(pred, truth);
  double value = 0.0;
  if (o.metric == "acc") {
    value = harness::accuracy(pred, truth);
  } else if (o.metric == "per-class-acc") {
    value = harness::per_class_avg_accuracy(pred, truth, C);
  } else {
    value = harness::kl_to_truth(estimate_prior(pred, C).probs(), estimate_prior(truth, C));
  }
  out << json({{"metric", o.metric}, {"value", io::round_real(value)}}).dump() << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rectify pseudo labels against prior knowledge of the class distribution", "pkrect"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenPriorOptions gp;
  auto* gen = app.add_subcommand("gen-prior", "Build prior-knowledge JSON from labels or a prior");
  gen->set_version_flag("--version", kVersion);
  gen->add_option("input", gp.input, "labels file (one per line) or prior JSON")->required();
  gen->add_option("--type", gp.type)->check(CLI::IsMember({"ub", "br", "ub+br"}));
  gen->add_option("--sigma", gp.sigma, "unary bound tightness");
  gen->add_option("--noise-phi", gp.noise_phi, "multiplicative noise on the prior");
  gen->add_option("--rank-phi", gp.rank_phi, "ranking noise radius");
  gen->add_option("--partial", gp.partial, "keep constraints of mode:count classes");
  gen->add_option("--seed", gp.seed);
  gen->add_option("--num-classes", gp.num_classes, "class count for labels input");
  gen->add_option("-o,--output", gp.output)->required();

  RectifyOptions ro;
  auto* rec = app.add_subcommand("rectify", "Rectify pseudo labels");
  rec->set_version_flag("--version", kVersion);
  auto* probs = rec->add_option("--probs", ro.probs, "n x C probability CSV");
  auto* dists = rec->add_option("--distances", ro.distances, "n x C distance CSV");
  probs->excludes(dists);
  dists->excludes(probs);
  rec->add_option("--prior", ro.prior, "prior-knowledge JSON")->required();
  rec->add_option("--features", ro.features, "n x d feature CSV for smooth regularization");
  rec->add_option("--M", ro.M, "penalty constant (default 10 * n)");
  rec->add_option("--mode", ro.mode)->check(CLI::IsMember({"soft", "hard"}));
  rec->add_option("--smooth", ro.smooth)->check(CLI::IsMember({"auto", "on", "off"}));
  rec->add_option("--metric", ro.metric)->check(CLI::IsMember({"cosine", "euclidean"}));
  rec->add_option("--strategy", ro.strategy)
      ->check(CLI::IsMember({"exact", "heuristic", "brute-force"}));
  rec->add_option("-o,--output", ro.output, "labels output")->required();
  rec->add_option("--report", ro.report, "report JSON output");

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "Run the self-training harness");
  sim->set_version_flag("--version", kVersion);
  sim->add_option("spec", so.spec, "domain spec JSON")->required();
  sim->add_option("--arms", so.arms, "comma list of baseline, ub<sigma>, br, ub<sigma>+br");
  sim->add_option("--seeds", so.seeds);
  sim->add_option("--seed-base", so.seed_base);
  sim->add_option("--iterations", so.iterations);
  sim->add_option("--M", so.M);
  sim->add_option("--metric", so.metric)->check(CLI::IsMember({"cosine", "euclidean"}));
  sim->add_option("-o,--output", so.output, "output directory")->required();

  EvalOptions eo;
  auto* ev = app.add_subcommand("eval", "Score predicted labels against the truth");
  ev->set_version_flag("--version", kVersion);
  ev->add_option("pred", eo.pred)->required();
  ev->add_option("truth", eo.truth)->required();
  ev->add_option("--metric", eo.metric)->check(CLI::IsMember({"acc", "per-class-acc", "kl"}));
  ev->add_option("--num-classes", eo.num_classes);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageOrIo;
  }
  if (rec->parsed() && ro.probs.empty() && ro.distances.empty()) {
    err << "rectify: one of --probs or --distances is required\n";
    return kUsageOrIo;
  }

  try {
    if (gen->parsed()) return cmd_gen_prior(gp, out);
    if (rec->parsed()) return cmd_rectify(ro, out, err);
    if (sim->parsed()) return cmd_simulate(so, out);
    return cmd_eval(eo, out);
  } catch (const InstanceTooLarge& e) {
    err << "too large: " << e.what() << "\n";
    return kTooLarge;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrIo;
  }
}

}  // namespace pkrect::cli
