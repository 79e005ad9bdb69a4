#include "pkrect/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "pkrect/error.hpp"

namespace pkrect {

double count_rhs(double ratio, std::size_t num_samples) {
  const double rhs = static_cast<double>(num_samples) * ratio;
  const double nearest = std::round(rhs);
  return std::abs(rhs - nearest) <= kRhsEps ? nearest : rhs;
}

long long ceil_count(double ratio, std::size_t num_samples) {
  return static_cast<long long>(std::ceil(count_rhs(ratio, num_samples)));
}

long long floor_count(double ratio, std::size_t num_samples) {
  return static_cast<long long>(std::floor(count_rhs(ratio, num_samples)));
}

ConstraintSummary evaluate_constraints(std::span<const int> counts, const PriorKnowledge& k,
                                       std::size_t num_samples) {
  require(static_cast<int>(counts.size()) == k.num_classes,
          "count vector length does not match the class count");
  ConstraintSummary out;
  for (const auto& u : k.unary) {
    const double n = counts[u.class_index];
    UnarySlack s{u.class_index, std::max(0.0, count_rhs(u.lower, num_samples) - n),
                 std::max(0.0, n - count_rhs(u.upper, num_samples))};
    out.slack_sum += s.lower + s.upper;
    out.unary.push_back(s);
    if (n < ceil_count(u.lower, num_samples) || n > floor_count(u.upper, num_samples))
      out.hard_feasible = false;
  }
  for (const auto& b : k.binary) {
    const double diff = counts[b.greater] - counts[b.lesser];
    BinarySlack s{b.greater, b.lesser, std::max(0.0, count_rhs(b.delta, num_samples) - diff)};
    out.slack_sum += s.slack;
    out.binary.push_back(s);
    if (diff < ceil_count(b.delta, num_samples)) out.hard_feasible = false;
  }
  return out;
}

std::vector<int> class_counts(std::span<const int> labels, std::size_t num_classes) {
  std::vector<int> counts(num_classes, 0);
  for (int y : labels) ++counts[y];
  return counts;
}

void fill_report(SolveReport& report, const ProbMatrix& p, const PriorKnowledge& k,
                 const SolverConfig& cfg) {
  report.class_counts = class_counts(report.labels, p.num_classes());
  report.objective = 0.0;
  for (std::size_t i = 0; i < report.labels.size(); ++i) report.objective += p(i, report.labels[i]);
  auto summary = evaluate_constraints(report.class_counts, k, p.num_samples());
  report.unary_slacks = std::move(summary.unary);
  report.binary_slacks = std::move(summary.binary);
  if (cfg.mode == ConstraintMode::soft) {
    report.penalty = cfg.M * summary.slack_sum;
    report.feasible = true;
  } else {
    report.penalty = 0.0;
    report.feasible = summary.hard_feasible;
  }
}

}  // namespace pkrect
