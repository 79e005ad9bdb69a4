#include <cmath>
#include <limits>
#include <string>

#include "pkrect/constraints.hpp"
#include "pkrect/error.hpp"
#include "pkrect/zop_solver.hpp"

namespace pkrect {

SolveReport brute_force(const ProbMatrix& p, const PriorKnowledge& k,
                        const SmoothRegularization& r, const SolverConfig& cfg,
                        double max_assignments) {
  detail::check_solver_inputs(p, k, r, cfg);
  const std::size_t n = p.num_samples();
  const std::size_t classes = p.num_classes();
  const auto groups = merge_groups(n, r);
  const std::size_t num_groups = groups.size();

  const double space = std::pow(static_cast<double>(classes), static_cast<double>(num_groups));
  if (space > max_assignments)
    throw InstanceTooLarge("brute force would enumerate " + std::to_string(space) +
                           " assignments (limit " + std::to_string(max_assignments) + ")");

  std::vector<double> profit(num_groups * classes, 0.0);
  std::vector<int> weight(num_groups);
  for (std::size_t g = 0; g < num_groups; ++g) {
    weight[g] = static_cast<int>(groups.members[g].size());
    for (std::size_t c = 0; c < classes; ++c)
      for (int i : groups.members[g]) profit[g * classes + c] += p(i, c);
  }

  // Odometer over group labels, group 0 most significant. Groups are ordered by
  // smallest member, so this is lexicographic order of the sample label vector.
  std::vector<int> digits(num_groups, 0);
  std::vector<int> counts(classes, 0);
  counts[0] = static_cast<int>(n);
  std::vector<int> best_digits;
  double best_value = -std::numeric_limits<double>::infinity();

  while (true) {
    double value = 0.0;
    for (std::size_t g = 0; g < num_groups; ++g) value += profit[g * classes + digits[g]];
    const auto summary = evaluate_constraints(counts, k, n);
    bool admissible = true;
    if (cfg.mode == ConstraintMode::soft)
      value -= cfg.M * summary.slack_sum;
    else
      admissible = summary.hard_feasible;
    if (admissible && (best_digits.empty() || value > best_value + 1e-12)) {
      best_value = value;
      best_digits = digits;
    }

    std::size_t pos = num_groups;
    while (pos > 0) {
      --pos;
      counts[digits[pos]] -= weight[pos];
      if (++digits[pos] < static_cast<int>(classes)) {
        counts[digits[pos]] += weight[pos];
        break;
      }
      digits[pos] = 0;
      counts[0] += weight[pos];
      if (pos == 0) {
        pos = num_groups + 1;
        break;
      }
    }
    if (pos == num_groups + 1 || num_groups == 0) break;
  }

  SolveReport report;
  const bool found = !best_digits.empty();
  if (!found) best_digits.assign(num_groups, 0);
  report.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) report.labels[i] = best_digits[groups.group_of[i]];
  fill_report(report, p, k, cfg);
  report.feasible = found;
  report.certified_optimal = found;
  return report;
}

}  // namespace pkrect
