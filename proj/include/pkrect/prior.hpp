#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pkrect {

/// Per-class probability vector. Entries are nonnegative and sum to 1.
class ClassPrior {
 public:
  ClassPrior() = default;
  explicit ClassPrior(std::vector<double> probs);

  std::size_t num_classes() const { return probs_.size(); }
  double operator[](std::size_t c) const { return probs_[c]; }
  const std::vector<double>& probs() const { return probs_; }

  /// Classes sorted by probability, largest first; ties by ascending index.
  std::vector<int> descending_order() const;

 private:
  std::vector<double> probs_;
};

/// lower <= p(class) <= upper
struct UnaryBound {
  int class_index = 0;
  double lower = 0.0;
  double upper = 1.0;
  bool operator==(const UnaryBound&) const = default;
};

/// p(greater) - p(lesser) >= delta
struct BinaryRelationship {
  int greater = 0;
  int lesser = 0;
  double delta = 0.0;
  bool operator==(const BinaryRelationship&) const = default;
};

struct PriorKnowledge {
  int num_classes = 0;
  std::vector<UnaryBound> unary;
  std::vector<BinaryRelationship> binary;

  bool empty() const { return unary.empty() && binary.empty(); }
  std::size_t size() const { return unary.size() + binary.size(); }

  /// Throws InvalidArgument if any constraint is malformed.
  void validate() const;

  bool operator==(const PriorKnowledge&) const = default;
};

/// Bounds [q_c (1 - sigma), min(1, q_c (1 + sigma))] for every class.
PriorKnowledge make_unary_bounds(const ClassPrior& q, double sigma);

/// Chain p(c_i) - p(c_{i+1}) >= 0 along the descending order of q.
PriorKnowledge make_binary_relationships(const ClassPrior& q);

/// Chain along an explicit class ordering (e.g. one from perturb_ranking).
PriorKnowledge make_binary_relationships(std::span<const int> order);

/// Union of two knowledge sets over the same classes.
PriorKnowledge combine(const PriorKnowledge& a, const PriorKnowledge& b);

/// Multiplicative uniform noise q_c + q_c * phi * draw_c, centered so the total
/// stays 1, then clamped at 0 and renormalized. Draws must lie in [-1, 1].
ClassPrior perturb_unary(const ClassPrior& q, double phi, std::span<const double> noise_draws);

/// Re-sorts classes by (descending rank + varphi * draw). Ties keep the original rank.
std::vector<int> perturb_ranking(const ClassPrior& q, int varphi,
                                 std::span<const double> noise_draws);

enum class PartialMode { major, minor, random };

/// Keeps the constraints attached to `count` selected classes. A unary bound is
/// attached to its class; a binary relationship to its `greater` class. For
/// PartialMode::random the classes with the `count` smallest draws are chosen.
PriorKnowledge select_partial(const PriorKnowledge& k, const ClassPrior& q, PartialMode mode,
                              int count, std::span<const double> rng_draws = {});

/// Empirical class frequencies of a label list.
ClassPrior estimate_prior(std::span<const int> labels, int num_classes);

}  // namespace pkrect
