#include "pkrect/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pkrect/error.hpp"

namespace pkrect {

namespace {

constexpr double kProbabilityTolerance = 1e-9;

std::vector<int> order_by(std::size_t n, auto&& less) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), less);
  return order;
}

}  // namespace

ClassPrior::ClassPrior(std::vector<double> probs) : probs_(std::move(probs)) {
  require(!probs_.empty(), "class prior must have at least one class");
  double total = 0.0;
  for (double p : probs_) {
    require(std::isfinite(p) && p >= 0.0, "class prior entries must be finite and nonnegative");
    total += p;
  }
  require(std::abs(total - 1.0) <= kProbabilityTolerance,
          "class prior must sum to 1 (got " + std::to_string(total) + ")");
}

std::vector<int> ClassPrior::descending_order() const {
  return order_by(probs_.size(), [this](int a, int b) { return probs_[a] > probs_[b]; });
}

void PriorKnowledge::validate() const {
  require(num_classes > 0, "prior knowledge needs a positive class count");
  std::vector<char> seen(num_classes, 0);
  for (const auto& u : unary) {
    require(u.class_index >= 0 && u.class_index < num_classes,
            "unary bound class index out of range: " + std::to_string(u.class_index));
    require(!seen[u.class_index],
            "duplicate unary bound for class " + std::to_string(u.class_index));
    seen[u.class_index] = 1;
    require(std::isfinite(u.lower) && std::isfinite(u.upper) && 0.0 <= u.lower &&
                u.lower <= u.upper && u.upper <= 1.0,
            "unary bound for class " + std::to_string(u.class_index) +
                " must satisfy 0 <= lower <= upper <= 1");
  }
  for (const auto& b : binary) {
    require(b.greater >= 0 && b.greater < num_classes && b.lesser >= 0 && b.lesser < num_classes,
            "binary relationship class index out of range");
    require(b.greater != b.lesser, "binary relationship must relate two distinct classes");
    require(std::isfinite(b.delta) && b.delta >= -1.0 && b.delta <= 1.0,
            "binary relationship delta must lie in [-1, 1]");
  }
}

PriorKnowledge make_unary_bounds(const ClassPrior& q, double sigma) {
  require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be nonnegative");
  PriorKnowledge k;
  k.num_classes = static_cast<int>(q.num_classes());
  for (std::size_t c = 0; c < q.num_classes(); ++c) {
    double lower = std::max(0.0, q[c] * (1.0 - sigma));
    double upper = std::min(1.0, q[c] * (1.0 + sigma));
    k.unary.push_back({static_cast<int>(c), lower, upper});
  }
  return k;
}

PriorKnowledge make_binary_relationships(const ClassPrior& q) {
  auto order = q.descending_order();
  return make_binary_relationships(order);
}

PriorKnowledge make_binary_relationships(std::span<const int> order) {
  PriorKnowledge k;
  k.num_classes = static_cast<int>(order.size());
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    k.binary.push_back({order[i], order[i + 1], 0.0});
  k.validate();
  return k;
}

PriorKnowledge combine(const PriorKnowledge& a, const PriorKnowledge& b) {
  require(a.num_classes == b.num_classes, "cannot combine knowledge over different class counts");
  PriorKnowledge out = a;
  out.unary.insert(out.unary.end(), b.unary.begin(), b.unary.end());
  out.binary.insert(out.binary.end(), b.binary.begin(), b.binary.end());
  out.validate();
  return out;
}

ClassPrior perturb_unary(const ClassPrior& q, double phi, std::span<const double> noise_draws) {
  require(phi >= 0.0 && phi <= 1.0, "phi must lie in [0, 1]");
  const std::size_t n = q.num_classes();
  require(noise_draws.size() == n, "need one noise draw per class");
  std::vector<double> offset(n);
  for (std::size_t c = 0; c < n; ++c) {
    require(std::abs(noise_draws[c]) <= 1.0, "noise draws must lie in [-1, 1]");
    offset[c] = q[c] * phi * noise_draws[c];
  }
  const double mean = std::accumulate(offset.begin(), offset.end(), 0.0) / static_cast<double>(n);
  std::vector<double> out(n);
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    out[c] = std::max(0.0, q[c] + offset[c] - mean);
    total += out[c];
  }
  for (double& p : out) p /= total;
  return ClassPrior(std::move(out));
}

std::vector<int> perturb_ranking(const ClassPrior& q, int varphi,
                                 std::span<const double> noise_draws) {
  require(varphi >= 0, "ranking noise radius must be nonnegative");
  const std::size_t n = q.num_classes();
  require(noise_draws.size() == n, "need one noise draw per class");
  const auto ranked = q.descending_order();
  std::vector<double> noisy(n);
  for (std::size_t r = 0; r < n; ++r) {
    const int c = ranked[r];
    require(std::abs(noise_draws[c]) <= 1.0, "noise draws must lie in [-1, 1]");
    noisy[r] = static_cast<double>(r) + varphi * noise_draws[c];
  }
  auto by_rank = order_by(n, [&](int a, int b) { return noisy[a] < noisy[b]; });
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = ranked[by_rank[i]];
  return order;
}

PriorKnowledge select_partial(const PriorKnowledge& k, const ClassPrior& q, PartialMode mode,
                              int count, std::span<const double> rng_draws) {
  require(static_cast<int>(q.num_classes()) == k.num_classes,
          "class prior and knowledge disagree on the class count");
  require(count >= 0 && count <= k.num_classes,
          "partial count must lie in [0, " + std::to_string(k.num_classes) + "]");
  std::vector<int> ranking;
  switch (mode) {
    case PartialMode::major:
      ranking = q.descending_order();
      break;
    case PartialMode::minor:
      ranking = q.descending_order();
      std::stable_sort(ranking.begin(), ranking.end(),
                       [&](int a, int b) { return q[a] < q[b]; });
      // Reverse of descending order with ties still resolved by ascending index.
      break;
    case PartialMode::random:
      require(rng_draws.size() == q.num_classes(), "random selection needs one draw per class");
      ranking = order_by(q.num_classes(), [&](int a, int b) { return rng_draws[a] < rng_draws[b]; });
      break;
  }
  std::vector<char> keep(k.num_classes, 0);
  for (int i = 0; i < count; ++i) keep[ranking[i]] = 1;

  PriorKnowledge out;
  out.num_classes = k.num_classes;
  for (const auto& u : k.unary)
    if (keep[u.class_index]) out.unary.push_back(u);
  for (const auto& b : k.binary)
    if (keep[b.greater]) out.binary.push_back(b);
  return out;
}

ClassPrior estimate_prior(std::span<const int> labels, int num_classes) {
  require(!labels.empty(), "cannot estimate a prior from an empty label list");
  require(num_classes > 0, "class count must be positive");
  std::vector<double> counts(num_classes, 0.0);
  for (int y : labels) {
    require(y >= 0 && y < num_classes, "label out of range: " + std::to_string(y));
    counts[y] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(labels.size());
  return ClassPrior(std::move(counts));
}

}  // namespace pkrect
