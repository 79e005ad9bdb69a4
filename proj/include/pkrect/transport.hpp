#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

// Weighted transportation with convex class costs, solved by successive
// shortest paths on the class graph. Sources are sample groups (supply = group
// weight), sinks are classes. Class costs are convex piecewise-linear functions
// of the class load, with a lexicographic "tier" component used for hard bounds.

namespace pkrect::transport {

/// Lexicographic quantity: tier dominates value.
struct Score {
  double tier = 0.0;
  double value = 0.0;

  Score operator+(const Score& o) const { return {tier + o.tier, value + o.value}; }
  Score operator-(const Score& o) const { return {tier - o.tier, value - o.value}; }
  Score operator*(double s) const { return {tier * s, value * s}; }
};

/// True when `a` exceeds `b` by more than the tolerance in the lexicographic order.
bool better(const Score& a, const Score& b, double value_eps = 1e-12);

/// Convex piecewise-linear cost of a class load (load >= 0).
class ClassCost {
 public:
  ClassCost() = default;

  /// Tier cost of one per unit below `lo` and above `hi`; zero inside the box.
  static ClassCost box(double lo, double hi);

  /// Value cost slope * |load - target|.
  static ClassCost penalty_box(double target, double slope);

  /// Linear interpolation of `f` between consecutive integer breakpoints. The
  /// breakpoints must contain every kink of `f` restricted to the integers.
  static ClassCost interpolate(const std::function<double(long long)>& f,
                               std::vector<long long> breakpoints);

  ClassCost operator+(const ClassCost& other) const;

  /// Cost slope for the next unit of flow entering at `load`.
  Score marginal(double load) const;
  /// Cost slope for the last unit of flow that reached `load` (load > 0).
  Score marginal_below(double load) const;
  /// Flow that can enter at `load` before the slope changes.
  double room(double load) const;
  /// Cost at `load`: the constant term plus the integral of the slope from 0.
  Score total(double load) const;

 private:
  std::size_t segment(double load) const;

  std::vector<double> breaks_;          // ascending
  std::vector<Score> slopes_ = {Score{}};  // slopes_[i] applies on [breaks_[i-1], breaks_[i])
  Score at_zero_;                          // total(0)
};

struct Problem {
  std::size_t num_classes = 0;
  std::vector<double> weights;            // per group, positive
  std::vector<double> unit_profit;        // groups x classes, row-major
  std::vector<std::uint8_t> allowed;      // groups x classes; empty means all allowed
  std::vector<ClassCost> class_costs;     // per class; empty means zero cost

  std::size_t num_groups() const { return weights.size(); }
  bool is_allowed(std::size_t g, std::size_t c) const {
    return allowed.empty() || allowed[g * num_classes + c] != 0;
  }
};

struct Solution {
  bool feasible = false;            // false if some group has no allowed class
  std::vector<double> flow;         // groups x classes
  std::vector<double> loads;        // per class
  double profit = 0.0;
  Score objective;                  // (-cost tier, profit - cost value)
  // Duals of the class-load rows. Each price lies in the value subgradient of
  // its class cost at the final load, and no group gains by moving at these
  // prices. So for any loads n, the best flow profit with loads n is at most
  // sum_g w_g max_c (p_gc - price_c) + price . n (a Lagrangian bound).
  std::vector<double> class_prices;
};

/// Optimal flow of the continuous relaxation (groups may split across classes).
Solution solve_relaxation(const Problem& problem);

struct IntegralSolution {
  std::vector<int> group_class;
  std::vector<double> loads;
  double profit = 0.0;
  Score objective;
  bool certified = true;  // false if the node limit stopped the search
};

/// Best assignment of every group to a single class. Branches on split groups.
std::optional<IntegralSolution> solve_integral(
    const Problem& problem, std::size_t node_limit = 200000);

}  // namespace pkrect::transport
