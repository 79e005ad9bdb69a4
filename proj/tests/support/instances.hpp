#pragma once

// Random small rectification instances and a from-scratch enumeration oracle
// that shares no code with the library's constraint accounting.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "pkrect/matrix.hpp"
#include "pkrect/prior.hpp"
#include "pkrect/zop_solver.hpp"

namespace testsupport {

struct Instance {
  pkrect::ProbMatrix p;
  pkrect::PriorKnowledge k;
  pkrect::SmoothRegularization r;
  double M = 0.0;
};

inline std::vector<double> random_row(std::mt19937_64& rng, int C, bool quantized) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> row(C);
  double s = 0.0;
  for (double& v : row) {
    v = quantized ? std::floor(u(rng) * 4.0) + 1.0 : u(rng) + 1e-3;
    s += v;
  }
  for (double& v : row) v /= s;
  return row;
}

inline pkrect::Matrix random_probs(std::mt19937_64& rng, int n, int C, bool quantized) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n; ++i) rows.push_back(random_row(rng, C, quantized));
  return pkrect::Matrix::from_rows(rows);
}

inline pkrect::ClassPrior random_prior(std::mt19937_64& rng, int C) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Half the time the prior is the histogram of a random labeling, so sigma = 0
  // bounds are exactly attainable.
  if (u(rng) < 0.5) {
    std::uniform_int_distribution<int> n_dist(C, 8), c_dist(0, C - 1);
    std::vector<int> labels(n_dist(rng));
    for (int& y : labels) y = c_dist(rng);
    return pkrect::estimate_prior(labels, C);
  }
  std::vector<double> q(C);
  double s = 0.0;
  for (double& v : q) s += (v = u(rng));
  for (double& v : q) v /= s;
  return pkrect::ClassPrior(q);
}

inline pkrect::PriorKnowledge random_knowledge(std::mt19937_64& rng, int C) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double sigmas[] = {0.0, 0.1, 0.5};
  const auto q = random_prior(rng, C);
  pkrect::PriorKnowledge k{C, {}, {}};
  const double pick = u(rng);
  if (pick < 0.7) k = pkrect::combine(k, pkrect::make_unary_bounds(q, sigmas[rng() % 3]));
  if (pick > 0.4) {
    std::vector<int> order(C);
    for (int c = 0; c < C; ++c) order[c] = c;
    std::shuffle(order.begin(), order.end(), rng);
    auto br = pkrect::make_binary_relationships(u(rng) < 0.5 ? q.descending_order() : order);
    if (u(rng) < 0.3)
      for (auto& b : br.binary) b.delta = 0.125 * static_cast<double>(rng() % 3);
    k = pkrect::combine(k, br);
  }
  if (!k.empty() && u(rng) < 0.3) {
    std::vector<double> draws(C);
    for (double& d : draws) d = u(rng);
    k = pkrect::select_partial(k, q, pkrect::PartialMode::random,
                               static_cast<int>(rng() % (C + 1)), draws);
  }
  return k;
}

inline pkrect::SmoothRegularization random_pairs(std::mt19937_64& rng, int n) {
  pkrect::SmoothRegularization r;
  if (n < 2 || rng() % 3 == 0) return r;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  const int members = 1 + static_cast<int>(rng() % (n - 1));
  for (int m = 0; m < members; ++m) {
    const int anchor = idx[members + static_cast<int>(rng() % (n - members))];
    r.pairs.emplace_back(idx[m], anchor);
  }
  return r;
}

inline Instance random_instance(std::mt19937_64& rng, int max_n = 8, int max_c = 4) {
  const int n = 1 + static_cast<int>(rng() % max_n);
  const int C = 2 + static_cast<int>(rng() % (max_c - 1));
  Instance inst;
  inst.p = pkrect::ProbMatrix::from_probabilities(random_probs(rng, n, C, rng() % 4 == 0));
  inst.k = random_knowledge(rng, C);
  inst.r = random_pairs(rng, n);
  const double Ms[] = {0.0, 1.0, 10.0 * n};
  inst.M = Ms[rng() % 3];
  return inst;
}

// ---- independent oracle ----

inline double snapped(double x) {
  const double r = std::round(x);
  return std::abs(x - r) <= 1e-9 ? r : x;
}

struct OracleEval {
  double objective = 0.0;
  double slack = 0.0;
  bool hard_ok = true;
};

inline OracleEval oracle_evaluate(const pkrect::ProbMatrix& p, const pkrect::PriorKnowledge& k,
                                  const std::vector<int>& labels) {
  const double n = static_cast<double>(labels.size());
  std::vector<double> cnt(p.num_classes(), 0.0);
  OracleEval e;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    e.objective += p(i, labels[i]);
    cnt[labels[i]] += 1.0;
  }
  for (const auto& u : k.unary) {
    const double lo = snapped(n * u.lower) - cnt[u.class_index];
    const double hi = cnt[u.class_index] - snapped(n * u.upper);
    e.slack += std::max(0.0, lo) + std::max(0.0, hi);
    if (lo > 1e-9 || hi > 1e-9) e.hard_ok = false;
  }
  for (const auto& b : k.binary) {
    const double s = snapped(n * b.delta) - (cnt[b.greater] - cnt[b.lesser]);
    e.slack += std::max(0.0, s);
    if (s > 1e-9) e.hard_ok = false;
  }
  return e;
}

struct OracleResult {
  bool found = false;
  double total = -std::numeric_limits<double>::infinity();
  double objective = 0.0;
};

/// Enumerates every labeling that honors the pairs (pairs checked directly).
inline OracleResult oracle_optimum(const pkrect::ProbMatrix& p, const pkrect::PriorKnowledge& k,
                                   const pkrect::SmoothRegularization& r, double M, bool hard) {
  const int n = static_cast<int>(p.num_samples());
  const int C = static_cast<int>(p.num_classes());
  std::vector<int> labels(n, 0);
  OracleResult best;
  while (true) {
    bool ok = true;
    for (auto [m, a] : r.pairs) ok = ok && labels[m] == labels[a];
    if (ok) {
      const auto e = oracle_evaluate(p, k, labels);
      if (!hard || e.hard_ok) {
        const double total = hard ? e.objective : e.objective - M * e.slack;
        if (total > best.total) best = {true, total, e.objective};
      }
    }
    int pos = n - 1;
    while (pos >= 0 && ++labels[pos] == C) labels[pos--] = 0;
    if (pos < 0) break;
  }
  return best;
}

}  // namespace testsupport
