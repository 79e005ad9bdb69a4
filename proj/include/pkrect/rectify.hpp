#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pkrect/matrix.hpp"
#include "pkrect/prior.hpp"
#include "pkrect/zop_solver.hpp"

namespace pkrect {

enum class Metric { cosine, euclidean };

struct RectifyConfig {
  std::optional<double> M;  // defaults to 10 * n_t
  bool use_smooth = true;
  Metric neighbor_metric = Metric::cosine;
  ConstraintMode mode = ConstraintMode::soft;
  Optimality optimality = Optimality::exact;
  bool exhaustive = false;  // both stages by brute_force(); tiny instances only
};

/// Row-wise softmax of -D.
ProbMatrix probs_from_distances(const Matrix& distances);

/// Distance between two feature rows; cosine distance is 1 - cos on L2-normalized rows.
double feature_distance(std::span<const double> a, std::span<const double> b, Metric metric);

/// For each member, the closest non-member row. Distances within 1e-12 tie;
/// ties go to the lowest index.
std::vector<std::pair<int, int>> nearest_anchor(const Matrix& features,
                                                std::span<const int> members, Metric metric);

struct RectifyResult {
  LabelAssignment labels;          // final pseudo labels
  SolveReport stage1;              // knowledge only
  SolveReport stage2;              // knowledge + smooth regularization (copy of stage1 if skipped)
  std::vector<int> changed;        // samples whose label differs from the argmax
  SmoothRegularization regularization;
  bool smoothing_applied = false;
  bool no_anchor_warning = false;  // every sample changed, no anchors left
};

/// Two-stage rectification: solve with the knowledge, collect the samples whose
/// label moved away from the argmax, tie each to its nearest unchanged sample,
/// and solve again with those equalities.
RectifyResult rectify(const ProbMatrix& p, const PriorKnowledge& k, const Matrix* features,
                      const RectifyConfig& cfg);

}  // namespace pkrect
