#include "pkrect/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pkrect::transport {

namespace {

constexpr double kAmountEps = 1e-9;
constexpr double kTierEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

const ClassCost& zero_cost() {
  static const ClassCost zero;
  return zero;
}

using Mask = std::vector<std::uint8_t>;

Solution solve_with_mask(const Problem& pb, const Mask& allowed) {
  const std::size_t groups = pb.num_groups();
  const std::size_t classes = pb.num_classes;
  auto profit = [&](std::size_t g, std::size_t c) { return pb.unit_profit[g * classes + c]; };
  auto ok = [&](std::size_t g, std::size_t c) {
    return allowed.empty() || allowed[g * classes + c] != 0;
  };
  auto cost = [&](std::size_t c) -> const ClassCost& {
    return pb.class_costs.empty() ? zero_cost() : pb.class_costs[c];
  };

  Solution s;
  s.flow.assign(groups * classes, 0.0);
  s.loads.assign(classes, 0.0);
  auto flow = [&](std::size_t g, std::size_t c) -> double& { return s.flow[g * classes + c]; };

  std::vector<double> move_gain(classes * classes);
  std::vector<int> move_group(classes * classes);
  // Best way to push one unit from class a to class b by relocating existing flow.
  auto compute_moves = [&](std::size_t inserted_upto) {
    std::fill(move_gain.begin(), move_gain.end(), -kInf);
    std::fill(move_group.begin(), move_group.end(), -1);
    for (std::size_t j = 0; j <= inserted_upto && j < groups; ++j) {
      for (std::size_t a = 0; a < classes; ++a) {
        if (flow(j, a) <= kAmountEps) continue;
        for (std::size_t b = 0; b < classes; ++b) {
          if (b == a || !ok(j, b)) continue;
          const double gain = profit(j, b) - profit(j, a);
          if (gain > move_gain[a * classes + b]) {
            move_gain[a * classes + b] = gain;
            move_group[a * classes + b] = static_cast<int>(j);
          }
        }
      }
    }
  };

  std::vector<Score> dist(classes);
  std::vector<int> pred(classes);
  std::vector<char> reached(classes);
  std::vector<int> path;

  for (std::size_t g = 0; g < groups; ++g) {
    double remaining = pb.weights[g];
    while (remaining > kAmountEps) {
      compute_moves(g);
      std::fill(reached.begin(), reached.end(), 0);
      bool any = false;
      for (std::size_t a = 0; a < classes; ++a) {
        if (!ok(g, a)) continue;
        dist[a] = {0.0, profit(g, a)};
        pred[a] = -1;
        reached[a] = 1;
        any = true;
      }
      if (!any) return s;  // infeasible: group cannot go anywhere

      for (std::size_t round = 0; round < classes; ++round) {
        bool changed = false;
        for (std::size_t a = 0; a < classes; ++a) {
          if (!reached[a]) continue;
          for (std::size_t b = 0; b < classes; ++b) {
            if (move_group[a * classes + b] < 0) continue;
            const Score candidate = dist[a] + Score{0.0, move_gain[a * classes + b]};
            if (!reached[b] || better(candidate, dist[b])) {
              dist[b] = candidate;
              pred[b] = static_cast<int>(a);
              reached[b] = 1;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }

      int sink = -1;
      Score best_gain;
      for (std::size_t z = 0; z < classes; ++z) {
        if (!reached[z]) continue;
        const Score gain = dist[z] - cost(z).marginal(s.loads[z]);
        if (sink < 0 || better(gain, best_gain)) {
          sink = static_cast<int>(z);
          best_gain = gain;
        }
      }

      path.clear();
      for (int c = sink; c >= 0; c = pred[c]) {
        path.push_back(c);
        if (path.size() > classes)
          throw std::logic_error("transport: positive cycle in residual class graph");
      }
      std::reverse(path.begin(), path.end());

      double amount = std::min(remaining, cost(sink).room(s.loads[sink]));
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const int j = move_group[path[k] * classes + path[k + 1]];
        amount = std::min(amount, flow(j, path[k]));
      }

      flow(g, path.front()) += amount;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const int j = move_group[path[k] * classes + path[k + 1]];
        double& from = flow(j, path[k]);
        from -= amount;
        if (from < kAmountEps) from = 0.0;
        flow(j, path[k + 1]) += amount;
      }
      s.loads[sink] += amount;
      remaining -= amount;
    }
  }

  s.feasible = true;
  Score total_cost;
  for (std::size_t c = 0; c < classes; ++c) total_cost = total_cost + cost(c).total(s.loads[c]);
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t c = 0; c < classes; ++c) s.profit += flow(g, c) * profit(g, c);
  s.objective = {-total_cost.tier, s.profit - total_cost.value};

  // Class prices: least potentials with price[c] >= left slope of cost c at its
  // load and price[b] >= price[a] + gain(a -> b) for every available move.
  // Optimality of the flow keeps them below the right slopes.
  compute_moves(groups);
  s.class_prices.assign(classes, -kInf);
  for (std::size_t c = 0; c < classes; ++c)
    if (s.loads[c] > kAmountEps) s.class_prices[c] = cost(c).marginal_below(s.loads[c]).value;
  for (std::size_t round = 0; round <= classes; ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < classes; ++a) {
      if (s.class_prices[a] == -kInf) continue;
      for (std::size_t b = 0; b < classes; ++b) {
        if (move_group[a * classes + b] < 0) continue;
        const double candidate = s.class_prices[a] + move_gain[a * classes + b];
        if (candidate > s.class_prices[b] + 1e-12) {
          s.class_prices[b] = candidate;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  // Empty classes nobody can move into: any price up to the right slope works.
  for (std::size_t c = 0; c < classes; ++c)
    if (s.class_prices[c] == -kInf) s.class_prices[c] = cost(c).marginal(s.loads[c]).value;
  return s;
}

}  // namespace

bool better(const Score& a, const Score& b, double value_eps) {
  if (a.tier > b.tier + kTierEps) return true;
  if (a.tier < b.tier - kTierEps) return false;
  return a.value > b.value + value_eps;
}

ClassCost ClassCost::box(double lo, double hi) {
  ClassCost c;
  c.slopes_.clear();
  c.at_zero_ = {std::max(0.0, lo), 0.0};
  if (lo > 0.0) {
    c.breaks_.push_back(lo);
    c.slopes_.push_back({-1.0, 0.0});
  }
  if (hi > lo) {
    c.breaks_.push_back(hi);
    c.slopes_.push_back({0.0, 0.0});
  }
  c.slopes_.push_back({1.0, 0.0});
  return c;
}

ClassCost ClassCost::penalty_box(double target, double slope) {
  ClassCost c;
  c.slopes_.clear();
  c.at_zero_ = {0.0, slope * std::max(0.0, target)};
  if (target > 0.0) {
    c.breaks_.push_back(target);
    c.slopes_.push_back({0.0, -slope});
  }
  c.slopes_.push_back({0.0, slope});
  return c;
}

ClassCost ClassCost::interpolate(const std::function<double(long long)>& f,
                                 std::vector<long long> breakpoints) {
  breakpoints.push_back(0);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  breakpoints.erase(breakpoints.begin(),
                    std::find_if(breakpoints.begin(), breakpoints.end(),
                                 [](long long b) { return b >= 0; }));
  ClassCost c;
  c.slopes_.clear();
  c.at_zero_ = {0.0, f(0)};
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const long long a = breakpoints[i];
    const long long b = breakpoints[i + 1];
    c.slopes_.push_back({0.0, (f(b) - f(a)) / static_cast<double>(b - a)});
    c.breaks_.push_back(static_cast<double>(b));
  }
  const long long last = breakpoints.back();
  c.slopes_.push_back({0.0, f(last + 1) - f(last)});
  return c;
}

ClassCost ClassCost::operator+(const ClassCost& other) const {
  std::vector<double> merged = breaks_;
  merged.insert(merged.end(), other.breaks_.begin(), other.breaks_.end());
  std::sort(merged.begin(), merged.end());
  ClassCost out;
  out.slopes_.clear();
  out.at_zero_ = at_zero_ + other.at_zero_;
  double start = 0.0;
  for (double b : merged) {
    if (b <= start + kAmountEps) continue;
    out.slopes_.push_back(marginal(start) + other.marginal(start));
    out.breaks_.push_back(b);
    start = b;
  }
  out.slopes_.push_back(marginal(start) + other.marginal(start));
  return out;
}

std::size_t ClassCost::segment(double load) const {
  return static_cast<std::size_t>(
      std::upper_bound(breaks_.begin(), breaks_.end(), load + kAmountEps) - breaks_.begin());
}

Score ClassCost::marginal(double load) const { return slopes_[segment(load)]; }

Score ClassCost::marginal_below(double load) const {
  return slopes_[segment(load - 2.0 * kAmountEps)];
}

double ClassCost::room(double load) const {
  const std::size_t i = segment(load);
  return i < breaks_.size() ? breaks_[i] - load : kInf;
}

Score ClassCost::total(double load) const {
  Score acc = at_zero_;
  double start = 0.0;
  for (std::size_t i = 0; i < breaks_.size() && start < load; ++i) {
    const double end = std::min(load, breaks_[i]);
    acc = acc + slopes_[i] * (end - start);
    start = breaks_[i];
  }
  if (start < load) acc = acc + slopes_.back() * (load - start);
  return acc;
}

Solution solve_relaxation(const Problem& problem) { return solve_with_mask(problem, problem.allowed); }

std::optional<IntegralSolution> solve_integral(const Problem& problem, std::size_t node_limit) {
  const std::size_t classes = problem.num_classes;
  const std::size_t groups = problem.num_groups();
  std::optional<IntegralSolution> best;
  bool certified = true;

  Mask root = problem.allowed;
  if (root.empty()) root.assign(groups * classes, 1);
  std::vector<Mask> stack{std::move(root)};
  std::size_t nodes = 0;

  while (!stack.empty()) {
    if (++nodes > node_limit) {
      certified = false;
      break;
    }
    Mask mask = std::move(stack.back());
    stack.pop_back();
    Solution relaxed = solve_with_mask(problem, mask);
    if (!relaxed.feasible) continue;
    if (best && !better(relaxed.objective, best->objective)) continue;

    int split = -1;
    std::size_t split_class = 0;
    for (std::size_t g = 0; g < groups && split < 0; ++g) {
      int used = 0;
      for (std::size_t c = 0; c < classes; ++c) used += relaxed.flow[g * classes + c] > kAmountEps;
      if (used > 1) {
        split = static_cast<int>(g);
        auto row = relaxed.flow.begin() + static_cast<std::ptrdiff_t>(g * classes);
        split_class = static_cast<std::size_t>(std::max_element(row, row + classes) - row);
      }
    }

    if (split < 0) {
      IntegralSolution sol;
      sol.group_class.resize(groups);
      for (std::size_t g = 0; g < groups; ++g) {
        auto row = relaxed.flow.begin() + static_cast<std::ptrdiff_t>(g * classes);
        sol.group_class[g] = static_cast<int>(std::max_element(row, row + classes) - row);
      }
      sol.loads = relaxed.loads;
      sol.profit = relaxed.profit;
      sol.objective = relaxed.objective;
      best = std::move(sol);
      continue;
    }

    Mask forbid = mask;
    forbid[split * classes + split_class] = 0;
    Mask force = std::move(mask);
    for (std::size_t c = 0; c < classes; ++c)
      if (c != split_class) force[split * classes + c] = 0;
    stack.push_back(std::move(forbid));
    stack.push_back(std::move(force));
  }
  if (best) best->certified = certified;
  return best;
}

}  // namespace pkrect::transport
