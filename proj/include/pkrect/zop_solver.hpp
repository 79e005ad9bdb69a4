#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pkrect/matrix.hpp"
#include "pkrect/prior.hpp"

namespace pkrect {

/// n_t x C matrix of class probabilities (or raw scores).
class ProbMatrix {
 public:
  ProbMatrix() = default;

  /// Rows must be finite and sum to 1 within 1e-6.
  static ProbMatrix from_probabilities(Matrix values);
  /// Any finite scores; the row-sum check is skipped and raw_scores() is set.
  static ProbMatrix from_scores(Matrix values);

  std::size_t num_samples() const { return values_.rows(); }
  std::size_t num_classes() const { return values_.cols(); }
  double operator()(std::size_t i, std::size_t c) const { return values_(i, c); }
  std::span<const double> row(std::size_t i) const { return values_.row(i); }
  const Matrix& matrix() const { return values_; }
  bool raw_scores() const { return raw_scores_; }

 private:
  ProbMatrix(Matrix values, bool raw) : values_(std::move(values)), raw_scores_(raw) {}

  Matrix values_;
  bool raw_scores_ = false;
};

using LabelAssignment = std::vector<int>;

/// Per-row argmax, ties to the lowest class index.
LabelAssignment argmax_labels(const ProbMatrix& p);

/// Equality constraints labels[member] == labels[anchor].
struct SmoothRegularization {
  std::vector<std::pair<int, int>> pairs;  // (member, anchor)

  bool empty() const { return pairs.empty(); }
  /// Members distinct, anchors never members, indices below num_samples.
  void validate(std::size_t num_samples) const;
};

/// Samples tied together by smooth regularization. Groups are ordered by their
/// smallest member; members of a group are ascending.
struct SampleGroups {
  std::vector<int> group_of;
  std::vector<std::vector<int>> members;

  std::size_t size() const { return members.size(); }
};

SampleGroups merge_groups(std::size_t num_samples, const SmoothRegularization& r);

enum class ConstraintMode { hard, soft };
enum class Optimality { exact, heuristic };

struct SolverConfig {
  double M = 0.0;
  ConstraintMode mode = ConstraintMode::soft;
  Optimality optimality = Optimality::exact;
};

struct UnarySlack {
  int class_index = 0;
  double lower = 0.0;  // max(0, n_t * nu - n_c)
  double upper = 0.0;  // max(0, n_c - n_t * mu)
};

struct BinarySlack {
  int greater = 0;
  int lesser = 0;
  double slack = 0.0;  // max(0, n_t * delta - (n_greater - n_lesser))
};

struct SolveReport {
  LabelAssignment labels;
  double objective = 0.0;  // sum_i P[i, labels[i]]
  double penalty = 0.0;    // M * sum of slacks (0 in hard mode)
  std::vector<int> class_counts;
  std::vector<UnarySlack> unary_slacks;
  std::vector<BinarySlack> binary_slacks;
  bool certified_optimal = false;
  bool feasible = true;

  double total() const { return objective - penalty; }
};

/// Maximizes <L, P> - M * sum(slack) (soft) or <L, P> under the constraints
/// (hard), with every smooth-regularization pair forced to share a label.
SolveReport solve(const ProbMatrix& p, const PriorKnowledge& k, const SmoothRegularization& r,
                  const SolverConfig& cfg);

/// Exhaustive enumeration; ties resolve to the lexicographically smallest label
/// vector. Throws InstanceTooLarge past max_assignments.
SolveReport brute_force(const ProbMatrix& p, const PriorKnowledge& k,
                        const SmoothRegularization& r, const SolverConfig& cfg,
                        double max_assignments = 1e7);

struct FixedCountSolution {
  LabelAssignment labels;
  double objective = 0.0;
};

/// Best assignment with exactly counts[c] samples in class c. Throws
/// InvalidArgument when the group sizes cannot realize the counts.
FixedCountSolution solve_fixed_counts(const ProbMatrix& p, std::span<const int> counts,
                                      const SmoothRegularization& r = {});

}  // namespace pkrect
