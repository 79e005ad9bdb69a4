#include "pkrect/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pkrect/constraints.hpp"
#include "pkrect/error.hpp"

namespace pkrect::harness {

void SyntheticDomainSpec::validate() const {
  require(num_classes > 0 && feature_dim > 0, "class count and feature dimension must be positive");
  require(class_means.rows() == static_cast<std::size_t>(num_classes) &&
              class_means.cols() == static_cast<std::size_t>(feature_dim),
          "class_means must be num_classes x feature_dim");
  require(mean_shift.rows() == class_means.rows() && mean_shift.cols() == class_means.cols(),
          "mean_shift must be num_classes x feature_dim");
  require(class_scales.size() == static_cast<std::size_t>(num_classes),
          "need one scale per class");
  for (double s : class_scales) require(std::isfinite(s) && s > 0.0, "class scales must be positive");
  require(source_prior.num_classes() == static_cast<std::size_t>(num_classes) &&
              target_prior.num_classes() == static_cast<std::size_t>(num_classes),
          "priors must cover every class");
  require(n_source >= num_classes && n_target >= num_classes,
          "sample counts must be at least the class count");
}

std::vector<int> largest_remainder_counts(const ClassPrior& prior, int n) {
  require(n >= 0, "sample count must be nonnegative");
  const std::size_t classes = prior.num_classes();
  std::vector<int> counts(classes);
  std::vector<double> remainder(classes);
  int assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double exact = prior[c] * n;
    counts[c] = static_cast<int>(std::floor(exact + 1e-9));
    remainder[c] = exact - counts[c];
    assigned += counts[c];
  }
  std::vector<int> order(classes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % classes) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

namespace {

LabeledSet sample_domain(const SyntheticDomainSpec& spec, const ClassPrior& prior, int n,
                         bool shifted, std::mt19937_64& rng) {
  const auto counts = largest_remainder_counts(prior, n);
  LabeledSet set;
  for (int c = 0; c < spec.num_classes; ++c) set.labels.insert(set.labels.end(), counts[c], c);
  std::shuffle(set.labels.begin(), set.labels.end(), rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  set.features = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(spec.feature_dim));
  for (int i = 0; i < n; ++i) {
    const int c = set.labels[i];
    for (int j = 0; j < spec.feature_dim; ++j) {
      double center = spec.class_means(c, j);
      if (shifted) center += spec.mean_shift(c, j);
      set.features(i, j) = center + spec.class_scales[c] * normal(rng);
    }
  }
  return set;
}

Matrix normalized_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double norm = 0.0;
    for (double v : out.row(i)) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& v : out.row(i)) v /= norm;
  }
  return out;
}

Matrix distances_to(const Matrix& features, const Matrix& centroids, Metric metric) {
  Matrix d(features.rows(), centroids.rows());
  for (std::size_t i = 0; i < features.rows(); ++i)
    for (std::size_t k = 0; k < centroids.rows(); ++k)
      d(i, k) = feature_distance(features.row(i), centroids.row(k), metric);
  return d;
}

// Weighted class means; classes with no weight keep their previous centroid.
Matrix weighted_centroids(const Matrix& features, const Matrix& weights, const Matrix& previous) {
  Matrix out = previous;
  for (std::size_t k = 0; k < weights.cols(); ++k) {
    double total = 0.0;
    std::vector<double> acc(features.cols(), 0.0);
    for (std::size_t i = 0; i < features.rows(); ++i) {
      const double w = weights(i, k);
      if (w == 0.0) continue;
      total += w;
      for (std::size_t j = 0; j < features.cols(); ++j) acc[j] += w * features(i, j);
    }
    if (total <= 0.0) continue;
    for (std::size_t j = 0; j < features.cols(); ++j) out(k, j) = acc[j] / total;
  }
  return out;
}

Matrix one_hot(const LabelAssignment& labels, std::size_t classes) {
  Matrix m(labels.size(), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) m(i, labels[i]) = 1.0;
  return m;
}

std::optional<double> safe_kl(std::span<const double> mean, const ClassPrior& truth) {
  for (std::size_t c = 0; c < mean.size(); ++c)
    if (truth[c] == 0.0 && mean[c] > 0.0) return std::nullopt;
  return kl_to_truth(mean, truth);
}

// Mean recall over the classes that occur in truth.
double present_class_recall(std::span<const int> pred, std::span<const int> truth,
                            int num_classes) {
  std::vector<std::size_t> total(num_classes, 0), correct(num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++total[truth[i]];
    correct[truth[i]] += pred[i] == truth[i];
  }
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (total[c] == 0) continue;
    sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    ++present;
  }
  return sum / present;
}

}  // namespace

DomainPair generate_shifted_domains(const SyntheticDomainSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  DomainPair pair;
  pair.source = sample_domain(spec, spec.source_prior, spec.n_source, false, rng);
  pair.target = sample_domain(spec, spec.target_prior, spec.n_target, true, rng);
  return pair;
}

AdaptTrace shot_like_adapt(const LabeledSet& source, const LabeledSet& target,
                           const PriorKnowledge* k, const AdaptConfig& cfg) {
  require(source.features.cols() == target.features.cols(),
          "source and target feature dimensions differ");
  require(source.features.rows() == source.labels.size() &&
              target.features.rows() == target.labels.size(),
          "feature and label counts differ");
  require(cfg.iterations >= 1, "need at least one iteration");
  int classes = 0;
  for (int y : source.labels) classes = std::max(classes, y + 1);
  for (int y : target.labels) classes = std::max(classes, y + 1);
  if (k) {
    require(k->num_classes >= classes, "knowledge covers fewer classes than the data");
    classes = k->num_classes;
  }
  const std::size_t C = static_cast<std::size_t>(classes);

  const bool cosine = cfg.centroid_metric == Metric::cosine;
  const Matrix src = cosine ? normalized_rows(source.features) : source.features;
  const Matrix tgt = cosine ? normalized_rows(target.features) : target.features;
  const ClassPrior truth = estimate_prior(target.labels, classes);

  Matrix centroids(C, src.cols());
  centroids = weighted_centroids(src, one_hot(source.labels, C), centroids);

  AdaptTrace trace;
  for (int t = 1; t <= cfg.iterations; ++t) {
    const ProbMatrix soft = probs_from_distances(distances_to(tgt, centroids, cfg.centroid_metric));
    const Matrix weighted = weighted_centroids(tgt, soft.matrix(), centroids);
    const ProbMatrix p = probs_from_distances(distances_to(tgt, weighted, cfg.centroid_metric));

    IterationRecord rec;
    rec.iteration = t;
    const LabelAssignment plain = argmax_labels(p);
    LabelAssignment labels = plain;
    rec.acc_argmax = accuracy(plain, target.labels);
    rec.acc_stage1 = rec.acc_argmax;
    if (k) {
      const RectifyResult rr = rectify(p, *k, &target.features, cfg.rectify);
      labels = rr.labels;
      rec.acc_stage1 = accuracy(rr.stage1.labels, target.labels);
      rec.changed = rr.changed.size();
      rec.slack_sum = 0.0;
      for (const auto& s : rr.stage2.unary_slacks) rec.slack_sum += s.lower + s.upper;
      for (const auto& s : rr.stage2.binary_slacks) rec.slack_sum += s.slack;
    }
    rec.acc_pseudo = accuracy(labels, target.labels);
    rec.per_class_acc = present_class_recall(labels, target.labels, classes);
    rec.histogram = class_counts(labels, C);

    std::vector<double> hist(C);
    for (std::size_t c = 0; c < C; ++c)
      hist[c] = static_cast<double>(rec.histogram[c]) / static_cast<double>(labels.size());
    rec.kl_labels = safe_kl(hist, truth);
    rec.kl_teacher = safe_kl(mean_probabilities(p), truth);
    rec.kl_blend = safe_kl(mean_probabilities(teacher_blend(p, labels, cfg.label_smoothing)), truth);
    trace.records.push_back(std::move(rec));

    centroids = weighted_centroids(tgt, one_hot(labels, C), weighted);
  }
  return trace;
}

ProbMatrix teacher_blend(const ProbMatrix& teacher, const LabelAssignment& labels,
                         double smoothing) {
  require(labels.size() == teacher.num_samples(), "label count does not match the teacher rows");
  require(smoothing >= 0.0 && smoothing < 1.0, "smoothing must lie in [0, 1)");
  const std::size_t C = teacher.num_classes();
  const double floor = smoothing / static_cast<double>(C);
  Matrix out(teacher.num_samples(), C);
  for (std::size_t i = 0; i < teacher.num_samples(); ++i) {
    require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < C, "label out of range");
    for (std::size_t c = 0; c < C; ++c) {
      const double target = (static_cast<std::size_t>(labels[i]) == c ? 1.0 - smoothing : 0.0) + floor;
      out(i, c) = (teacher(i, c) + target) / 2.0;
    }
  }
  return teacher.raw_scores() ? ProbMatrix::from_scores(std::move(out))
                              : ProbMatrix::from_probabilities(std::move(out));
}

double kl_to_truth(std::span<const double> mean_probs, const ClassPrior& truth) {
  require(mean_probs.size() == truth.num_classes(), "distribution lengths differ");
  double total = 0.0;
  for (double v : mean_probs) {
    require(std::isfinite(v) && v >= 0.0, "mean probabilities must be nonnegative");
    total += v;
  }
  require(std::abs(total - 1.0) <= 1e-6, "mean probabilities must sum to 1");
  double kl = 0.0;
  for (std::size_t c = 0; c < mean_probs.size(); ++c) {
    if (mean_probs[c] == 0.0) continue;
    require(truth[c] > 0.0, "K-L undefined: truth has zero mass on class " + std::to_string(c));
    kl += mean_probs[c] * std::log(mean_probs[c] / truth[c]);
  }
  return std::max(0.0, kl);
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  require(pred.size() == truth.size() && !pred.empty(), "prediction and truth lengths differ");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i];
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double per_class_avg_accuracy(std::span<const int> pred, std::span<const int> truth,
                              int num_classes) {
  require(pred.size() == truth.size() && !pred.empty(), "prediction and truth lengths differ");
  std::vector<std::size_t> total(num_classes, 0);
  for (int y : truth) {
    require(y >= 0 && y < num_classes, "truth label out of range");
    ++total[y];
  }
  for (int c = 0; c < num_classes; ++c)
    require(total[c] > 0, "class " + std::to_string(c) + " has no samples in truth");
  return present_class_recall(pred, truth, num_classes);
}

std::vector<double> mean_probabilities(const ProbMatrix& p) {
  std::vector<double> mean(p.num_classes(), 0.0);
  for (std::size_t i = 0; i < p.num_samples(); ++i)
    for (std::size_t c = 0; c < p.num_classes(); ++c) mean[c] += p(i, c);
  for (double& v : mean) v /= static_cast<double>(p.num_samples());
  return mean;
}

}  // namespace pkrect::harness
