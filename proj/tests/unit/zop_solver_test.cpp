#include <random>

#include "../support/instances.hpp"
#include "doctest.h"
#include "pkrect/constraints.hpp"
#include "pkrect/error.hpp"
#include "pkrect/zop_solver.hpp"

using namespace pkrect;
using doctest::Approx;

namespace {

ProbMatrix probs(std::vector<std::vector<double>> rows) {
  return ProbMatrix::from_probabilities(Matrix::from_rows(rows));
}

SolverConfig soft(double M) { return {M, ConstraintMode::soft, Optimality::exact}; }
SolverConfig hard() { return {0.0, ConstraintMode::hard, Optimality::exact}; }

void check_report_consistency(const SolveReport& rep, const ProbMatrix& p,
                              const PriorKnowledge& k, const SolverConfig& cfg) {
  const auto counts = class_counts(rep.labels, p.num_classes());
  CHECK(rep.class_counts == counts);
  int total = 0;
  for (int c : counts) total += c;
  CHECK(total == static_cast<int>(p.num_samples()));
  const auto e = testsupport::oracle_evaluate(p, k, rep.labels);
  CHECK(rep.objective == Approx(e.objective).epsilon(1e-12));
  if (cfg.mode == ConstraintMode::soft) {
    CHECK(rep.penalty == Approx(cfg.M * e.slack).epsilon(1e-12));
  } else if (rep.feasible) {
    CHECK(rep.penalty == 0.0);
    for (const auto& s : rep.unary_slacks) CHECK((s.lower == 0.0 && s.upper == 0.0));
    for (const auto& s : rep.binary_slacks) CHECK(s.slack == 0.0);
  }
  const double n = static_cast<double>(p.num_samples());
  for (std::size_t j = 0; j < k.unary.size(); ++j) {
    const auto& u = k.unary[j];
    CHECK(rep.unary_slacks[j].lower ==
          std::max(0.0, testsupport::snapped(n * u.lower) - counts[u.class_index]));
    CHECK(rep.unary_slacks[j].upper ==
          std::max(0.0, counts[u.class_index] - testsupport::snapped(n * u.upper)));
  }
}

}  // namespace

TEST_CASE("ProbMatrix construction checks") {
  CHECK_THROWS_AS(ProbMatrix::from_probabilities(Matrix::from_rows({{0.5, 0.4}})),
                  InvalidArgument);
  CHECK_THROWS_AS(ProbMatrix::from_probabilities(Matrix::from_rows({{NAN, 1.0}})),
                  InvalidArgument);
  const auto raw = ProbMatrix::from_scores(Matrix::from_rows({{3.0, -1.0}}));
  CHECK(raw.raw_scores());
  CHECK_FALSE(probs({{0.5, 0.5}}).raw_scores());
}

TEST_CASE("identity matrix without constraints") {
  const auto p = probs({{1, 0}, {0, 1}});
  const auto rep = solve(p, {2, {}, {}}, {}, soft(0.0));
  CHECK(rep.labels == LabelAssignment{0, 1});
  CHECK(rep.objective == 2.0);
  CHECK(rep.certified_optimal);
}

TEST_CASE("unary bounds flip the cheapest sample") {
  const auto p = probs({{0.9, 0.1}, {0.8, 0.2}, {0.6, 0.4}});
  const PriorKnowledge k{2, {{0, 1.0 / 3, 1.0}, {1, 1.0 / 3, 1.0}}, {}};
  const auto rep = solve(p, k, {}, soft(30.0));
  CHECK(rep.labels == LabelAssignment{0, 0, 1});
  CHECK(rep.objective == Approx(2.1));
  CHECK(rep.penalty == 0.0);
  const auto oracle = testsupport::oracle_optimum(p, k, {}, 30.0, false);
  CHECK(rep.total() == Approx(oracle.total).epsilon(1e-12));
}

TEST_CASE("zero upper bound empties a class") {
  const auto p = probs({{0.0, 0.1, 0.9}, {0.05, 0.05, 0.9}, {0.2, 0.0, 0.8}});
  const PriorKnowledge k{3, {{2, 0.0, 0.0}}, {}};
  const auto rep = solve(p, k, {}, soft(30.0));
  for (int y : rep.labels) CHECK(y != 2);
  CHECK(rep.labels == LabelAssignment{1, 0, 0});
}

TEST_CASE("hard mode reports infeasibility instead of throwing") {
  const auto p = probs({{0.5, 0.5}, {0.4, 0.6}});
  const PriorKnowledge k{2, {{0, 0.9, 1.0}, {1, 0.9, 1.0}}, {}};
  const auto rep = solve(p, k, {}, hard());
  CHECK_FALSE(rep.feasible);
  CHECK_FALSE(brute_force(p, k, {}, hard()).feasible);

  // Integer infeasibility: 3 samples cannot split into exact halves.
  const auto q = probs({{0.5, 0.5}, {0.4, 0.6}, {0.3, 0.7}});
  const PriorKnowledge half{2, {{0, 0.5, 0.5}}, {}};
  CHECK_FALSE(solve(q, half, {}, hard()).feasible);
  // Binary relationships can contradict each other too.
  const PriorKnowledge cycle{2, {}, {{0, 1, 0.5}, {1, 0, 0.5}}};
  CHECK_FALSE(solve(q, cycle, {}, hard()).feasible);
}

TEST_CASE("input validation") {
  const auto p = probs({{0.5, 0.5}});
  CHECK_THROWS_AS(solve(p, {3, {}, {}}, {}, soft(1.0)), InvalidArgument);
  CHECK_THROWS_AS(solve(p, {2, {}, {}}, {}, soft(-1.0)), InvalidArgument);
  SmoothRegularization bad;
  bad.pairs = {{0, 5}};
  CHECK_THROWS_AS(solve(p, {2, {}, {}}, bad, soft(1.0)), InvalidArgument);
  const auto p3 = probs({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
  SmoothRegularization chained;
  chained.pairs = {{0, 1}, {1, 2}};  // anchor 1 is also a member
  CHECK_THROWS_AS(solve(p3, {2, {}, {}}, chained, soft(1.0)), InvalidArgument);
  SmoothRegularization dup;
  dup.pairs = {{0, 1}, {0, 2}};
  CHECK_THROWS_AS(solve(p3, {2, {}, {}}, dup, soft(1.0)), InvalidArgument);
}

TEST_CASE("merge_groups orders groups by smallest member") {
  SmoothRegularization r;
  r.pairs = {{4, 1}, {0, 3}, {2, 1}};
  const auto g = merge_groups(5, r);
  REQUIRE(g.size() == 2);
  CHECK(g.members[0] == std::vector<int>{0, 3});
  CHECK(g.members[1] == std::vector<int>{1, 2, 4});
  CHECK(g.group_of == std::vector<int>{0, 1, 1, 0, 1});
}

TEST_CASE("brute force tie-breaking and size cap") {
  const auto p = probs({{0.5, 0.5}});
  CHECK(brute_force(p, {2, {}, {}}, {}, soft(0.0)).labels == LabelAssignment{0});

  // Both samples tie; the lexicographically smallest optimum has the 1 last.
  const auto q = probs({{0.5, 0.5}, {0.5, 0.5}});
  const PriorKnowledge k{2, {{0, 0.5, 0.5}}, {}};
  CHECK(brute_force(q, k, {}, soft(10.0)).labels == LabelAssignment{0, 1});

  Matrix big(30, 3, 1.0 / 3);
  CHECK_THROWS_AS(brute_force(ProbMatrix::from_probabilities(big), {3, {}, {}}, {}, soft(0.0)),
                  InstanceTooLarge);
}

TEST_CASE("solve_fixed_counts") {
  const auto p = probs({{0.9, 0.1}, {0.8, 0.2}});
  const std::vector<int> split = {1, 1};
  auto sol = solve_fixed_counts(p, split);
  CHECK(sol.labels == LabelAssignment{0, 1});
  CHECK(sol.objective == Approx(1.1));

  const std::vector<int> all0 = {2, 0};
  sol = solve_fixed_counts(p, all0);
  CHECK(sol.labels == LabelAssignment{0, 0});
  CHECK(sol.objective == Approx(1.7));

  const std::vector<int> wrong_total = {1, 0};
  CHECK_THROWS_AS(solve_fixed_counts(p, wrong_total), InvalidArgument);

  // A merged pair cannot be split across two classes.
  SmoothRegularization r;
  r.pairs = {{1, 0}};
  CHECK_THROWS_AS(solve_fixed_counts(p, split, r), InvalidArgument);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + static_cast<int>(rng() % 8), C = 2 + static_cast<int>(rng() % 3);
    const auto pm = ProbMatrix::from_probabilities(testsupport::random_probs(rng, n, C, false));
    const auto am = argmax_labels(pm);
    const auto counts = class_counts(am, C);
    CHECK(solve_fixed_counts(pm, counts).labels == am);
  }
}

TEST_CASE("solve_fixed_counts matches enumeration") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng() % 7), C = 2 + static_cast<int>(rng() % 3);
    const auto pm = ProbMatrix::from_probabilities(testsupport::random_probs(rng, n, C, t % 3 == 0));
    std::vector<int> counts(C, 0);
    for (int i = 0; i < n; ++i) ++counts[rng() % C];
    // Exact counts as unary bounds; the oracle's hard optimum is the fixed-count optimum.
    PriorKnowledge k{C, {}, {}};
    for (int c = 0; c < C; ++c)
      k.unary.push_back({c, counts[c] / static_cast<double>(n), counts[c] / static_cast<double>(n)});
    const auto oracle = testsupport::oracle_optimum(pm, k, {}, 0.0, true);
    REQUIRE(oracle.found);
    const auto sol = solve_fixed_counts(pm, counts);
    CHECK(class_counts(sol.labels, C) == counts);
    CHECK(sol.objective == Approx(oracle.objective).epsilon(1e-12));
  }
}

TEST_CASE("exact solver agrees with the independent oracle") {
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 300; ++t) {
    const auto inst = testsupport::random_instance(rng);
    for (auto mode : {ConstraintMode::soft, ConstraintMode::hard}) {
      const SolverConfig cfg{inst.M, mode, Optimality::exact};
      const bool is_hard = mode == ConstraintMode::hard;
      const auto oracle = testsupport::oracle_optimum(inst.p, inst.k, inst.r, inst.M, is_hard);
      const auto rep = solve(inst.p, inst.k, inst.r, cfg);
      CHECK(rep.feasible == oracle.found);
      if (!oracle.found) continue;
      CHECK(rep.certified_optimal);
      CHECK(rep.total() == Approx(oracle.total).epsilon(1e-9));
      for (auto [m, a] : inst.r.pairs) CHECK(rep.labels[m] == rep.labels[a]);
      check_report_consistency(rep, inst.p, inst.k, cfg);

      const auto bf = brute_force(inst.p, inst.k, inst.r, cfg);
      CHECK(bf.total() == Approx(oracle.total).epsilon(1e-9));
      check_report_consistency(bf, inst.p, inst.k, cfg);
    }
  }
}

TEST_CASE("empty knowledge reduces to the row argmax") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng() % 20), C = 2 + static_cast<int>(rng() % 5);
    const auto p = ProbMatrix::from_probabilities(testsupport::random_probs(rng, n, C, true));
    const auto rep = solve(p, {C, {}, {}}, {}, soft(static_cast<double>(rng() % 50)));
    CHECK(rep.labels == argmax_labels(p));
  }
}

TEST_CASE("heuristic returns valid, uncertified, no-better solutions") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 100; ++t) {
    const auto inst = testsupport::random_instance(rng);
    const SolverConfig exact{inst.M, ConstraintMode::soft, Optimality::exact};
    const SolverConfig heur{inst.M, ConstraintMode::soft, Optimality::heuristic};
    const auto a = solve(inst.p, inst.k, inst.r, exact);
    const auto b = solve(inst.p, inst.k, inst.r, heur);
    CHECK(b.total() <= a.total() + 1e-9);
    for (auto [m, x] : inst.r.pairs) CHECK(b.labels[m] == b.labels[x]);
    check_report_consistency(b, inst.p, inst.k, heur);
    if (!inst.k.empty()) CHECK_FALSE(b.certified_optimal);
  }
}

TEST_CASE("exact solver scales to a few hundred samples") {
  std::mt19937_64 rng(5);
  const int n = 600, C = 6;
  const auto p = ProbMatrix::from_probabilities(testsupport::random_probs(rng, n, C, false));
  const ClassPrior q({0.05, 0.08, 0.12, 0.15, 0.25, 0.35});
  const auto k = combine(make_unary_bounds(q, 0.0), make_binary_relationships(q));
  const auto rep = solve(p, k, {}, soft(10.0 * n));
  CHECK(rep.certified_optimal);
  CHECK(rep.penalty == 0.0);
  CHECK(rep.class_counts == std::vector<int>{30, 48, 72, 90, 150, 210});
}
