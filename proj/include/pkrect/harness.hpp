#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pkrect/matrix.hpp"
#include "pkrect/prior.hpp"
#include "pkrect/rectify.hpp"
#include "pkrect/zop_solver.hpp"

// Desk-scale self-training harness: Gaussian class clusters with label shift
// between a labeled source and an unlabeled target, and a centroid-based
// pseudo-labeling loop standing in for network fine-tuning.

namespace pkrect::harness {

struct SyntheticDomainSpec {
  int num_classes = 0;
  int feature_dim = 0;
  Matrix class_means;                // C x d, source cluster centers
  std::vector<double> class_scales;  // per-class isotropic stddev
  ClassPrior source_prior;
  ClassPrior target_prior;
  int n_source = 0;
  int n_target = 0;
  Matrix mean_shift;                 // C x d, added to target centers

  void validate() const;
};

struct LabeledSet {
  Matrix features;
  std::vector<int> labels;
};

struct DomainPair {
  LabeledSet source;
  LabeledSet target;
};

/// Deterministic rounding of prior * n; leftover units go to the largest
/// fractional parts, ties to the lowest class index.
std::vector<int> largest_remainder_counts(const ClassPrior& prior, int n);

DomainPair generate_shifted_domains(const SyntheticDomainSpec& spec, std::uint64_t seed);

struct AdaptConfig {
  int iterations = 10;
  Metric centroid_metric = Metric::cosine;
  RectifyConfig rectify;
  double label_smoothing = 0.1;
};

struct IterationRecord {
  int iteration = 0;                    // 1-based
  double acc_argmax = 0.0;              // centroid argmax labels
  double acc_stage1 = 0.0;              // knowledge-only rectification
  double acc_pseudo = 0.0;              // labels fed to the next iteration
  double per_class_acc = 0.0;
  std::optional<double> kl_labels;      // pseudo-label histogram vs truth
  std::optional<double> kl_teacher;     // mean P vs truth
  std::optional<double> kl_blend;       // mean teacher_blend(P, labels) vs truth
  std::vector<int> histogram;
  std::size_t changed = 0;              // samples moved away from the argmax
  double slack_sum = 0.0;               // of the final labels
};

struct AdaptTrace {
  std::vector<IterationRecord> records;
};

/// Centroid self-training on the target. With knowledge, pseudo labels come
/// from rectify(); without, from the per-row argmax.
AdaptTrace shot_like_adapt(const LabeledSet& source, const LabeledSet& target,
                           const PriorKnowledge* k, const AdaptConfig& cfg);

/// Row i becomes (P_i + (1 - s) onehot(l_i) + s / C) / 2.
ProbMatrix teacher_blend(const ProbMatrix& teacher, const LabelAssignment& labels,
                         double smoothing = 0.1);

/// sum_c mean_c log(mean_c / truth_c), with 0 log 0 = 0.
double kl_to_truth(std::span<const double> mean_probs, const ClassPrior& truth);

double accuracy(std::span<const int> pred, std::span<const int> truth);

/// Mean over classes of per-class recall. Every class in [0, C) must occur in truth.
/// (The adaptation trace averages over the classes present instead.)
double per_class_avg_accuracy(std::span<const int> pred, std::span<const int> truth,
                              int num_classes);

/// Column means of a probability matrix.
std::vector<double> mean_probabilities(const ProbMatrix& p);

}  // namespace pkrect::harness
