#include "pkrect/zop_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <string>

#include "pkrect/constraints.hpp"
#include "pkrect/error.hpp"
#include "pkrect/simplex.hpp"
#include "pkrect/transport.hpp"

namespace pkrect {

using transport::ClassCost;
using transport::Score;

ProbMatrix ProbMatrix::from_probabilities(Matrix values) {
  require(!values.empty() && values.cols() > 0, "probability matrix must be non-empty");
  for (std::size_t i = 0; i < values.rows(); ++i) {
    double total = 0.0;
    for (double v : values.row(i)) {
      require(std::isfinite(v), "probability matrix entries must be finite");
      total += v;
    }
    require(std::abs(total - 1.0) <= 1e-6,
            "row " + std::to_string(i) + " of the probability matrix does not sum to 1");
  }
  return ProbMatrix(std::move(values), false);
}

ProbMatrix ProbMatrix::from_scores(Matrix values) {
  require(!values.empty() && values.cols() > 0, "score matrix must be non-empty");
  for (double v : values.values()) require(std::isfinite(v), "score matrix entries must be finite");
  return ProbMatrix(std::move(values), true);
}

LabelAssignment argmax_labels(const ProbMatrix& p) {
  LabelAssignment labels(p.num_samples());
  for (std::size_t i = 0; i < p.num_samples(); ++i)
    labels[i] = static_cast<int>(argmax(p.row(i)));
  return labels;
}

void SmoothRegularization::validate(std::size_t num_samples) const {
  std::vector<char> is_member(num_samples, 0);
  for (const auto& [member, anchor] : pairs) {
    require(member >= 0 && static_cast<std::size_t>(member) < num_samples && anchor >= 0 &&
                static_cast<std::size_t>(anchor) < num_samples,
            "smooth-regularization index out of range");
    require(!is_member[member],
            "sample " + std::to_string(member) + " appears twice as a regularized member");
    is_member[member] = 1;
  }
  for (const auto& pr : pairs)
    require(!is_member[pr.second],
            "anchor " + std::to_string(pr.second) + " is itself a regularized member");
}

SampleGroups merge_groups(std::size_t num_samples, const SmoothRegularization& r) {
  std::vector<int> parent(num_samples);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [member, anchor] : r.pairs) {
    int a = find(member), b = find(anchor);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  SampleGroups groups;
  groups.group_of.assign(num_samples, -1);
  std::vector<int> root_group(num_samples, -1);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const int root = find(static_cast<int>(i));
    if (root_group[root] < 0) {
      root_group[root] = static_cast<int>(groups.members.size());
      groups.members.emplace_back();
    }
    groups.group_of[i] = root_group[root];
    groups.members[root_group[root]].push_back(static_cast<int>(i));
  }
  return groups;
}

namespace {

constexpr double kBoundTol = 1e-9;
constexpr std::size_t kMaxCutRounds = 200;
constexpr std::size_t kMaxNodes = 100000;

// max(0, max_i slope_i * s + intercept_i) with s = sum coef * n_c.
struct PenaltyTerm {
  std::vector<std::pair<int, double>> form;
  std::vector<std::pair<double, double>> pieces;
};

// M * max(0, a - s) interpolated between consecutive integers of s.
std::vector<std::pair<double, double>> shortfall_pieces(double M, double a) {
  std::vector<std::pair<double, double>> pieces{{-M, M * a}};
  const double fl = std::floor(a);
  if (a != fl) pieces.push_back({-M * (a - fl), M * (a - fl) * (fl + 1.0)});
  return pieces;
}

class Engine {
 public:
  Engine(const ProbMatrix& p, const PriorKnowledge& k, const SmoothRegularization& r,
         const SolverConfig& cfg)
      : p_(p), k_(k), cfg_(cfg), n_(p.num_samples()), classes_(p.num_classes()),
        groups_(merge_groups(n_, r)) {
    base_.num_classes = classes_;
    for (const auto& members : groups_.members) {
      const double w = static_cast<double>(members.size());
      base_.weights.push_back(w);
      for (std::size_t c = 0; c < classes_; ++c) {
        double sum = 0.0;
        for (int i : members) sum += p(i, c);
        base_.unit_profit.push_back(sum / w);
      }
    }
  }

  SolveReport run() {
    if (k_.empty()) return finish(group_argmax(), true);
    if (cfg_.mode == ConstraintMode::hard && !hard_box_consistent()) return infeasible_report();
    if (cfg_.optimality == Optimality::heuristic) return heuristic();
    if (k_.binary.empty()) return separable();
    return branch_and_bound();
  }

 private:
  double group_profit(std::size_t g, std::size_t c) const {
    return base_.unit_profit[g * classes_ + c] * base_.weights[g];
  }

  std::vector<int> group_argmax() const {
    std::vector<int> out(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < classes_; ++c)
        if (group_profit(g, c) > group_profit(g, best)) best = c;
      out[g] = static_cast<int>(best);
    }
    return out;
  }

  SolveReport finish(const std::vector<int>& group_class, bool certified) const {
    SolveReport report;
    report.labels.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) report.labels[i] = group_class[groups_.group_of[i]];
    fill_report(report, p_, k_, cfg_);
    report.certified_optimal = certified && report.feasible;
    return report;
  }

  SolveReport infeasible_report() const {
    SolveReport report = finish(group_argmax(), false);
    report.feasible = false;
    return report;
  }

  // Hard-mode count box implied by the unary bounds.
  void hard_box(std::vector<long long>& lo, std::vector<long long>& hi) const {
    lo.assign(classes_, 0);
    hi.assign(classes_, static_cast<long long>(n_));
    if (cfg_.mode != ConstraintMode::hard) return;
    for (const auto& u : k_.unary) {
      lo[u.class_index] = std::max(lo[u.class_index], ceil_count(u.lower, n_));
      hi[u.class_index] = std::min(hi[u.class_index], floor_count(u.upper, n_));
    }
  }

  bool hard_box_consistent() const {
    std::vector<long long> lo, hi;
    hard_box(lo, hi);
    long long sum_lo = 0, sum_hi = 0;
    for (std::size_t c = 0; c < classes_; ++c) {
      if (lo[c] > hi[c]) return false;
      sum_lo += lo[c];
      sum_hi += hi[c];
    }
    return sum_lo <= static_cast<long long>(n_) && sum_hi >= static_cast<long long>(n_);
  }

  // Soft unary penalties as convex class costs.
  std::vector<ClassCost> unary_costs() const {
    std::vector<ClassCost> costs(classes_);
    for (const auto& u : k_.unary) {
      const double a = count_rhs(u.lower, n_);
      const double b = count_rhs(u.upper, n_);
      const double M = cfg_.M;
      auto f = [=](long long cnt) {
        const double x = static_cast<double>(cnt);
        return M * (std::max(0.0, a - x) + std::max(0.0, x - b));
      };
      const std::vector<long long> breaks{static_cast<long long>(std::floor(a)),
                                          static_cast<long long>(std::ceil(a)),
                                          static_cast<long long>(std::floor(b)),
                                          static_cast<long long>(std::ceil(b))};
      costs[u.class_index] = costs[u.class_index] + ClassCost::interpolate(f, breaks);
    }
    return costs;
  }

  SolveReport separable() const {
    transport::Problem pb = base_;
    if (cfg_.mode == ConstraintMode::soft) {
      pb.class_costs = unary_costs();
    } else {
      std::vector<long long> lo, hi;
      hard_box(lo, hi);
      for (std::size_t c = 0; c < classes_; ++c)
        pb.class_costs.push_back(
            ClassCost::box(static_cast<double>(lo[c]), static_cast<double>(hi[c])));
    }
    auto sol = transport::solve_integral(pb, kMaxNodes);
    if (!sol || sol->objective.tier < -1e-9) return infeasible_report();
    return finish(sol->group_class, sol->certified);
  }

  // ---- branch and bound for binary relationships --------------------------
  //
  // A node restricts the class counts to a box and may pin or forbid classes
  // for merged groups. Its bound maximizes theta - penalty(n) over the box,
  // with theta capped by Lagrangian cuts of the transport relaxation. Counts
  // that the groups cannot realize are priced by a steep penalty box.

  using Mask = std::vector<std::uint8_t>;

  struct Cut {
    double offset;  // sum_g w_g max over allowed c of (p_gc - price_c)
    std::vector<double> prices;
  };

  struct Node {
    double bound = std::numeric_limits<double>::infinity();
    std::vector<long long> lo, hi;
    Mask allowed;  // empty: every class allowed
    std::vector<Cut> cuts;
    bool operator<(const Node& o) const { return bound < o.bound; }
  };

  bool allowed_in(const Mask& m, std::size_t g, std::size_t c) const {
    return m.empty() || m[g * classes_ + c] != 0;
  }

  Cut make_cut(const std::vector<double>& prices, const Mask& allowed) const {
    Cut cut{0.0, prices};
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < classes_; ++c)
        if (allowed_in(allowed, g, c))
          best = std::max(best, base_.unit_profit[g * classes_ + c] - prices[c]);
      cut.offset += base_.weights[g] * best;
    }
    return cut;
  }

  std::vector<PenaltyTerm> penalty_terms() const {
    std::vector<PenaltyTerm> terms;
    const double M = cfg_.M;
    const double n = static_cast<double>(n_);
    for (const auto& u : k_.unary) {
      const double a = count_rhs(u.lower, n_);
      const double b = count_rhs(u.upper, n_);
      if (a > 0.0) terms.push_back({{{u.class_index, 1.0}}, shortfall_pieces(M, a)});
      if (b < n) terms.push_back({{{u.class_index, -1.0}}, shortfall_pieces(M, -b)});
    }
    for (const auto& br : k_.binary)
      terms.push_back({{{br.greater, 1.0}, {br.lesser, -1.0}},
                       shortfall_pieces(M, count_rhs(br.delta, n_))});
    return terms;
  }

  // Variables: y = n - lo, theta - value_floor_, one penalty per term.
  lp::LinearProgram build_master(const Node& node, const std::vector<PenaltyTerm>& terms) const {
    const auto& lo = node.lo;
    const auto& hi = node.hi;
    const std::size_t theta = classes_;
    const std::size_t nvars = classes_ + 1 + terms.size();
    lp::LinearProgram lp(nvars);
    std::vector<double> obj(nvars, 0.0);
    obj[theta] = 1.0;
    for (std::size_t t = 0; t < terms.size(); ++t) obj[theta + 1 + t] = -1.0;
    lp.set_objective(obj);

    long long sum_lo = 0;
    std::vector<double> row(nvars, 0.0);
    for (std::size_t c = 0; c < classes_; ++c) {
      std::fill(row.begin(), row.end(), 0.0);
      row[c] = 1.0;
      lp.add_le(row, static_cast<double>(hi[c] - lo[c]));
      sum_lo += lo[c];
    }
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t c = 0; c < classes_; ++c) row[c] = 1.0;
    lp.add_eq(row, static_cast<double>(static_cast<long long>(n_) - sum_lo));

    for (const auto& cut : node.cuts) {
      std::fill(row.begin(), row.end(), 0.0);
      row[theta] = 1.0;
      double rhs = cut.offset - value_floor_;
      for (std::size_t c = 0; c < classes_; ++c) {
        row[c] = -cut.prices[c];
        rhs += cut.prices[c] * static_cast<double>(lo[c]);
      }
      lp.add_le(row, rhs);
    }

    for (std::size_t t = 0; t < terms.size(); ++t) {
      double base = 0.0;
      for (const auto& [c, coef] : terms[t].form) base += coef * static_cast<double>(lo[c]);
      for (const auto& [slope, intercept] : terms[t].pieces) {
        std::fill(row.begin(), row.end(), 0.0);
        for (const auto& [c, coef] : terms[t].form) row[c] += slope * coef;
        row[theta + 1 + t] = -1.0;
        lp.add_le(row, -intercept - slope * base);
      }
    }

    if (cfg_.mode == ConstraintMode::hard) {
      for (const auto& br : k_.binary) {
        std::fill(row.begin(), row.end(), 0.0);
        row[br.greater] += 1.0;
        row[br.lesser] -= 1.0;
        lp.add_ge(row, static_cast<double>(ceil_count(br.delta, n_) - lo[br.greater] +
                                           lo[br.lesser]));
      }
    }
    return lp;
  }

  // Transport relaxation with loads pulled toward x by a steep penalty; equals
  // the plain relaxation wherever the groups can realize x.
  transport::Solution relaxed_value(const std::vector<double>& x, const Mask& allowed) const {
    transport::Problem pb = base_;
    pb.allowed = allowed;
    for (std::size_t c = 0; c < classes_; ++c)
      pb.class_costs.push_back(ClassCost::penalty_box(x[c], realize_slope_));
    return transport::solve_relaxation(pb);
  }

  void offer(const std::vector<int>& group_class) {
    const auto counts = class_counts_of(group_class);
    const auto summary = evaluate_constraints(counts, k_, n_);
    if (cfg_.mode == ConstraintMode::hard && !summary.hard_feasible) return;
    double value = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g) value += group_profit(g, group_class[g]);
    if (cfg_.mode == ConstraintMode::soft) value -= cfg_.M * summary.slack_sum;
    if (!incumbent_ || value > incumbent_value_ + 1e-12) {
      incumbent_ = group_class;
      incumbent_value_ = value;
    }
  }

  // Largest share of each group; ties to the lowest class.
  std::vector<int> round_flow(const transport::Solution& flow) const {
    std::vector<int> out(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      auto row = flow.flow.begin() + static_cast<std::ptrdiff_t>(g * classes_);
      out[g] = static_cast<int>(std::max_element(row, row + classes_) - row);
    }
    return out;
  }

  // Split group with the most weight, or -1.
  int split_group(const transport::Solution& flow) const {
    int best = -1;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      int used = 0;
      for (std::size_t c = 0; c < classes_; ++c) used += flow.flow[g * classes_ + c] > 1e-9;
      if (used > 1 && (best < 0 || base_.weights[g] > base_.weights[best])) best = static_cast<int>(g);
    }
    return best;
  }

  void split_counts(Node node, std::size_t c, long long v, double bound,
                    std::priority_queue<Node>& open) const {
    node.bound = bound;
    if (v > node.lo[c]) {
      Node below = node;
      below.hi[c] = v - 1;
      open.push(std::move(below));
    }
    if (v < node.hi[c]) {
      Node above = node;
      above.lo[c] = v + 1;
      open.push(std::move(above));
    }
    node.lo[c] = node.hi[c] = v;
    open.push(std::move(node));
  }

  SolveReport branch_and_bound() {
    const auto terms = cfg_.mode == ConstraintMode::soft ? penalty_terms()
                                                         : std::vector<PenaltyTerm>{};
    value_floor_ = 0.0;
    double spread = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      double worst = std::numeric_limits<double>::infinity();
      double top = -worst;
      for (std::size_t c = 0; c < classes_; ++c) {
        worst = std::min(worst, base_.unit_profit[g * classes_ + c]);
        top = std::max(top, base_.unit_profit[g * classes_ + c]);
      }
      value_floor_ += base_.weights[g] * worst;
      spread = std::max(spread, top - worst);
    }
    realize_slope_ = static_cast<double>(classes_) * (spread + 1.0);

    if (cfg_.mode == ConstraintMode::soft) offer(group_argmax());

    Node root;
    hard_box(root.lo, root.hi);
    root.cuts.push_back(make_cut(std::vector<double>(classes_, 0.0), root.allowed));
    std::priority_queue<Node> open;
    open.push(std::move(root));
    std::size_t nodes = 0;

    while (!open.empty()) {
      Node node = open.top();
      open.pop();
      if (incumbent_ && node.bound <= incumbent_value_ + kBoundTol) continue;
      if (++nodes > kMaxNodes) {
        certified_ = false;
        break;
      }

      std::vector<double> x(classes_);
      transport::Solution flow;
      double bound = 0.0;
      bool pruned = false, tight = false;
      for (std::size_t round = 0; round < kMaxCutRounds; ++round) {
        const auto res = build_master(node, terms).maximize();
        if (res.status != lp::Status::optimal) {
          pruned = true;
          break;
        }
        bound = res.value + value_floor_;
        if (incumbent_ && bound <= incumbent_value_ + kBoundTol) {
          pruned = true;
          break;
        }
        for (std::size_t c = 0; c < classes_; ++c)
          x[c] = static_cast<double>(node.lo[c]) + std::max(0.0, res.x[c]);
        flow = relaxed_value(x, node.allowed);
        if (!flow.feasible) {
          pruned = true;
          break;
        }
        const double theta = res.x[classes_] + value_floor_;
        const double attained = flow.objective.value;
        if (theta <= attained + kBoundTol * (1.0 + std::abs(attained))) {
          tight = true;
          break;
        }
        node.cuts.push_back(make_cut(flow.class_prices, node.allowed));
      }
      if (pruned) continue;

      offer(round_flow(flow));
      if (incumbent_ && bound <= incumbent_value_ + kBoundTol) continue;

      std::size_t frac_class = classes_;
      double worst_frac = 1e-7;
      for (std::size_t c = 0; c < classes_; ++c) {
        const double f = x[c] - std::floor(x[c]);
        const double dist = std::min(f, 1.0 - f);
        if (dist > worst_frac) {
          worst_frac = dist;
          frac_class = c;
        }
      }
      if (frac_class < classes_) {
        Node left = node, right = std::move(node);
        left.hi[frac_class] = static_cast<long long>(std::floor(x[frac_class]));
        right.lo[frac_class] = static_cast<long long>(std::ceil(x[frac_class]));
        left.bound = right.bound = bound;
        open.push(std::move(left));
        open.push(std::move(right));
        continue;
      }

      std::size_t free_class = 0;
      while (free_class < classes_ && node.lo[free_class] == node.hi[free_class]) ++free_class;

      bool realized = true;
      for (std::size_t c = 0; c < classes_; ++c)
        realized = realized && std::abs(flow.loads[c] - x[c]) <= 1e-7;
      if (!realized) {
        // The groups cannot produce these counts under this node's restrictions.
        if (free_class < classes_)
          split_counts(std::move(node), free_class, std::llround(x[free_class]), bound, open);
        continue;
      }

      const int g = split_group(flow);
      if (g >= 0) {
        const std::size_t top = static_cast<std::size_t>(round_flow(flow)[g]);
        Node force = node, forbid = std::move(node);
        if (force.allowed.empty()) force.allowed.assign(groups_.size() * classes_, 1);
        if (forbid.allowed.empty()) forbid.allowed.assign(groups_.size() * classes_, 1);
        for (std::size_t c = 0; c < classes_; ++c) force.allowed[g * classes_ + c] = c == top;
        forbid.allowed[g * classes_ + top] = 0;
        force.bound = forbid.bound = bound;
        open.push(std::move(force));
        open.push(std::move(forbid));
        continue;
      }

      // Integral counts and an integral flow: the rounding above is this node's
      // optimum when the cuts were tight. Otherwise split a count coordinate.
      if (tight || free_class == classes_) continue;
      split_counts(std::move(node), free_class, std::llround(x[free_class]), bound, open);
    }

    if (!incumbent_) return infeasible_report();
    return finish(*incumbent_, certified_);
  }

  std::vector<int> class_counts_of(const std::vector<int>& group_class) const {
    std::vector<int> counts(classes_, 0);
    for (std::size_t g = 0; g < groups_.size(); ++g)
      counts[group_class[g]] += static_cast<int>(groups_.members[g].size());
    return counts;
  }

  // ---- heuristic: local search over count vectors --------------------------

  Score heuristic_score(const std::vector<int>& counts, double profit) const {
    const auto summary = evaluate_constraints(counts, k_, n_);
    if (cfg_.mode == ConstraintMode::hard) return {-summary.slack_sum, profit};
    return {0.0, profit - cfg_.M * summary.slack_sum};
  }

  SolveReport heuristic() {
    std::vector<int> counts = class_counts_of(group_argmax());
    std::vector<int> assign = group_argmax();
    double profit = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g) profit += group_profit(g, assign[g]);
    Score current = heuristic_score(counts, profit);

    const std::size_t C = classes_;
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    for (std::size_t step = 0; step < 100 * (n_ + C); ++step) {
      // Longest relocation chains between classes using unit-weight groups.
      std::vector<double> gain(C * C, kNegInf);
      std::vector<int> via(C * C, -1), next(C * C, -1);
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (base_.weights[g] != 1.0) continue;
        const std::size_t a = assign[g];
        for (std::size_t b = 0; b < C; ++b) {
          if (b == a) continue;
          const double d = group_profit(g, b) - group_profit(g, a);
          if (d > gain[a * C + b]) {
            gain[a * C + b] = d;
            via[a * C + b] = static_cast<int>(g);
            next[a * C + b] = static_cast<int>(b);
          }
        }
      }
      for (std::size_t m = 0; m < C; ++m)
        for (std::size_t a = 0; a < C; ++a)
          for (std::size_t b = 0; b < C; ++b) {
            if (a == b || gain[a * C + m] == kNegInf || gain[m * C + b] == kNegInf) continue;
            if (gain[a * C + m] + gain[m * C + b] > gain[a * C + b] + 1e-12) {
              gain[a * C + b] = gain[a * C + m] + gain[m * C + b];
              next[a * C + b] = next[a * C + m];
            }
          }

      Score best = current;
      int best_a = -1, best_b = -1, best_group = -1;
      for (std::size_t a = 0; a < C; ++a)
        for (std::size_t b = 0; b < C; ++b) {
          if (a == b || gain[a * C + b] == kNegInf) continue;
          auto trial = counts;
          --trial[a];
          ++trial[b];
          const Score s = heuristic_score(trial, profit + gain[a * C + b]);
          if (transport::better(s, best, 1e-12)) {
            best = s;
            best_a = static_cast<int>(a);
            best_b = static_cast<int>(b);
            best_group = -1;
          }
        }
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (base_.weights[g] == 1.0) continue;
        const int w = static_cast<int>(base_.weights[g]);
        for (std::size_t b = 0; b < C; ++b) {
          if (static_cast<int>(b) == assign[g]) continue;
          auto trial = counts;
          trial[assign[g]] -= w;
          trial[b] += w;
          const Score s =
              heuristic_score(trial, profit + group_profit(g, b) - group_profit(g, assign[g]));
          if (transport::better(s, best, 1e-12)) {
            best = s;
            best_a = assign[g];
            best_b = static_cast<int>(b);
            best_group = static_cast<int>(g);
          }
        }
      }
      if (best_a < 0) break;

      const auto saved_assign = assign;
      if (best_group >= 0) {
        assign[best_group] = best_b;
      } else {
        int a = best_a;
        for (std::size_t hops = 0; a != best_b && hops < C; ++hops) {
          const int b = next[a * C + best_b];
          assign[via[a * C + b]] = b;
          a = b;
        }
      }
      // Recompute exactly; chain bookkeeping is only trusted if it improves.
      double new_profit = 0.0;
      for (std::size_t g = 0; g < groups_.size(); ++g) new_profit += group_profit(g, assign[g]);
      const auto new_counts = class_counts_of(assign);
      const Score updated = heuristic_score(new_counts, new_profit);
      if (!transport::better(updated, current, 1e-12)) {
        assign = saved_assign;
        break;
      }
      counts = new_counts;
      profit = new_profit;
      current = updated;
    }
    return finish(assign, false);
  }

  const ProbMatrix& p_;
  const PriorKnowledge& k_;
  SolverConfig cfg_;
  std::size_t n_, classes_;
  SampleGroups groups_;
  transport::Problem base_;

  double value_floor_ = 0.0;
  double realize_slope_ = 1.0;
  std::optional<std::vector<int>> incumbent_;
  double incumbent_value_ = -std::numeric_limits<double>::infinity();
  bool certified_ = true;
};

void check_inputs(const ProbMatrix& p, const PriorKnowledge& k, const SmoothRegularization& r,
                  const SolverConfig& cfg) {
  require(p.num_samples() > 0, "probability matrix has no samples");
  require(k.num_classes == static_cast<int>(p.num_classes()),
          "prior knowledge class count (" + std::to_string(k.num_classes) +
              ") does not match the probability matrix (" + std::to_string(p.num_classes()) + ")");
  k.validate();
  r.validate(p.num_samples());
  require(std::isfinite(cfg.M) && cfg.M >= 0.0, "penalty constant M must be nonnegative");
}

}  // namespace

SolveReport solve(const ProbMatrix& p, const PriorKnowledge& k, const SmoothRegularization& r,
                  const SolverConfig& cfg) {
  check_inputs(p, k, r, cfg);
  return Engine(p, k, r, cfg).run();
}

FixedCountSolution solve_fixed_counts(const ProbMatrix& p, std::span<const int> counts,
                                      const SmoothRegularization& r) {
  require(counts.size() == p.num_classes(), "count vector length does not match the class count");
  long long total = 0;
  for (int c : counts) {
    require(c >= 0, "class counts must be nonnegative");
    total += c;
  }
  require(total == static_cast<long long>(p.num_samples()),
          "class counts must sum to the number of samples");
  r.validate(p.num_samples());

  const auto groups = merge_groups(p.num_samples(), r);
  transport::Problem pb;
  pb.num_classes = p.num_classes();
  for (const auto& members : groups.members) {
    const double w = static_cast<double>(members.size());
    pb.weights.push_back(w);
    for (std::size_t c = 0; c < p.num_classes(); ++c) {
      double sum = 0.0;
      for (int i : members) sum += p(i, c);
      pb.unit_profit.push_back(sum / w);
    }
  }
  for (int c : counts) pb.class_costs.push_back(ClassCost::box(c, c));
  auto sol = transport::solve_integral(pb);
  require(sol.has_value() && sol->objective.tier >= -1e-9,
          "group sizes cannot realize the requested class counts");

  FixedCountSolution out;
  out.labels.resize(p.num_samples());
  for (std::size_t i = 0; i < p.num_samples(); ++i)
    out.labels[i] = sol->group_class[groups.group_of[i]];
  for (std::size_t i = 0; i < p.num_samples(); ++i) out.objective += p(i, out.labels[i]);
  return out;
}

namespace detail {
void check_solver_inputs(const ProbMatrix& p, const PriorKnowledge& k,
                         const SmoothRegularization& r, const SolverConfig& cfg) {
  check_inputs(p, k, r, cfg);
}
}  // namespace detail

}  // namespace pkrect
