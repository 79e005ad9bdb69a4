#include "pkrect/rectify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pkrect/error.hpp"

namespace pkrect {

namespace {
constexpr double kTieTol = 1e-12;
}  // namespace

ProbMatrix probs_from_distances(const Matrix& distances) {
  require(!distances.empty() && distances.cols() > 0, "distance matrix must be non-empty");
  Matrix out(distances.rows(), distances.cols());
  for (std::size_t i = 0; i < distances.rows(); ++i) {
    const auto d = distances.row(i);
    for (double v : d)
      require(std::isfinite(v) && v >= 0.0, "distances must be finite and nonnegative");
    const double shift = *std::min_element(d.begin(), d.end());
    double total = 0.0;
    for (std::size_t c = 0; c < d.size(); ++c) {
      out(i, c) = std::exp(shift - d[c]);
      total += out(i, c);
    }
    for (double& v : out.row(i)) v /= total;
  }
  return ProbMatrix::from_probabilities(std::move(out));
}

double feature_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (metric == Metric::euclidean) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;
  return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
}

std::vector<std::pair<int, int>> nearest_anchor(const Matrix& features,
                                                std::span<const int> members, Metric metric) {
  const std::size_t n = features.rows();
  std::vector<char> is_member(n, 0);
  for (int m : members) {
    require(m >= 0 && static_cast<std::size_t>(m) < n, "member index out of range");
    is_member[m] = 1;
  }
  require(static_cast<std::size_t>(std::count(is_member.begin(), is_member.end(), 1)) < n,
          "every sample is a member; no anchors available");

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(members.size());
  for (int m : members) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (is_member[j]) continue;
      const double d = feature_distance(features.row(m), features.row(j), metric);
      // Distances within rounding noise count as ties (parallel vectors, mirrored points).
      if (d < best_dist - kTieTol) {
        best_dist = d;
        best = static_cast<int>(j);
      }
    }
    pairs.emplace_back(m, best);
  }
  return pairs;
}

RectifyResult rectify(const ProbMatrix& p, const PriorKnowledge& k, const Matrix* features,
                      const RectifyConfig& cfg) {
  require(p.num_samples() > 0, "target set is empty");
  if (cfg.use_smooth) {
    require(features != nullptr, "smooth regularization needs a feature matrix");
    require(features->rows() == p.num_samples(),
            "feature matrix rows do not match the probability matrix");
    require(features->cols() >= 1, "feature matrix needs at least one column");
    for (double v : features->values()) require(std::isfinite(v), "features must be finite");
  }

  SolverConfig solver_cfg;
  solver_cfg.M = cfg.M.value_or(10.0 * static_cast<double>(p.num_samples()));
  solver_cfg.mode = cfg.mode;
  solver_cfg.optimality = cfg.optimality;

  auto run = [&](const SmoothRegularization& r) {
    return cfg.exhaustive ? brute_force(p, k, r, solver_cfg) : solve(p, k, r, solver_cfg);
  };

  RectifyResult out;
  out.stage1 = run({});
  out.labels = out.stage1.labels;

  const LabelAssignment base = argmax_labels(p);
  for (std::size_t i = 0; i < base.size(); ++i)
    if (base[i] != out.stage1.labels[i]) out.changed.push_back(static_cast<int>(i));

  out.stage2 = out.stage1;
  if (!cfg.use_smooth || out.changed.empty()) return out;
  if (out.changed.size() == p.num_samples()) {
    out.no_anchor_warning = true;
    return out;
  }

  out.regularization.pairs = nearest_anchor(*features, out.changed, cfg.neighbor_metric);
  out.stage2 = run(out.regularization);
  out.labels = out.stage2.labels;
  out.smoothing_applied = true;
  return out;
}

}  // namespace pkrect
