#pragma once

#include <span>
#include <vector>

#include "pkrect/prior.hpp"
#include "pkrect/zop_solver.hpp"

// Constraint accounting shared by the exact solver and the brute-force oracle.

namespace pkrect {

inline constexpr double kRhsEps = 1e-9;

/// Right-hand side n_t * ratio, snapped to the nearest integer when within kRhsEps.
double count_rhs(double ratio, std::size_t num_samples);

/// Smallest integer count satisfying count >= n_t * ratio.
long long ceil_count(double ratio, std::size_t num_samples);
/// Largest integer count satisfying count <= n_t * ratio.
long long floor_count(double ratio, std::size_t num_samples);

struct ConstraintSummary {
  std::vector<UnarySlack> unary;
  std::vector<BinarySlack> binary;
  double slack_sum = 0.0;
  bool hard_feasible = true;
};

/// Slacks and hard feasibility of a class-count vector.
ConstraintSummary evaluate_constraints(std::span<const int> counts, const PriorKnowledge& k,
                                       std::size_t num_samples);

std::vector<int> class_counts(std::span<const int> labels, std::size_t num_classes);

/// Fills counts, slacks, penalty and objective of a report from its labels.
void fill_report(SolveReport& report, const ProbMatrix& p, const PriorKnowledge& k,
                 const SolverConfig& cfg);

namespace detail {
/// Shape and validity checks shared by solve() and brute_force().
void check_solver_inputs(const ProbMatrix& p, const PriorKnowledge& k,
                         const SmoothRegularization& r, const SolverConfig& cfg);
}  // namespace detail

}  // namespace pkrect
