#pragma once

// Probabilistic OPF: OPF costs signed by label are mapped to P(y = +1 | x)
// through the sigmoid 1 / (1 + exp(A * s + B)); (A, B) minimize the
// regularized negative log-likelihood evaluated in overflow-safe form.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "popf/core.hpp"
#include "popf/opf.hpp"
#include "popf/optim.hpp"

namespace popf {

struct ScoredSample {
  double score = 0.0;   // y_i * C_i
  double target = 0.5;  // regularized label
};

struct CalibrationModel {
  double a = 0.0;
  double b = 0.0;
  double theta = 0.5;
  double final_nll = 0.0;
  std::string optimizer_used;
  std::size_t evaluations = 0;
  std::vector<std::string> diagnostics;
};

/// 1 / (1 + exp(q)) with q = a * score + b, never overflowing.
inline double sigmoid_probability(double a, double b, double score) {
  const double q = a * score + b;
  if (q >= 0.0) {
    const double e = std::exp(-q);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(q));
}

/// 1 - sigmoid_probability, computed without cancellation.
inline double sigmoid_complement(double a, double b, double score) {
  const double q = a * score + b;
  if (q >= 0.0) return 1.0 / (1.0 + std::exp(-q));
  const double e = std::exp(q);
  return e / (1.0 + e);
}

/// Positives get (N+ + 1)/(N+ + 2), negatives 1/(N- + 2).
inline std::vector<double> make_targets(std::span<const int> labels) {
  if (labels.empty()) throw error(error_kind::invalid_input, "no labels to build targets from");
  double positives = 0.0, negatives = 0.0;
  for (int y : labels) {
    if (y == +1) positives += 1.0;
    else if (y == -1) negatives += 1.0;
    else throw error(error_kind::invalid_input, "targets need labels in {-1, +1}, got " + std::to_string(y));
  }
  const double hi = (positives + 1.0) / (positives + 2.0);
  const double lo = 1.0 / (negatives + 2.0);
  std::vector<double> out;
  out.reserve(labels.size());
  for (int y : labels) out.push_back(y == +1 ? hi : lo);
  return out;
}

inline std::vector<ScoredSample> make_scored(std::span<const double> costs, std::span<const int> labels) {
  if (costs.size() != labels.size()) throw error(error_kind::invalid_input, "costs and labels differ in length");
  const auto targets = make_targets(labels);
  std::vector<ScoredSample> out(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) out[i] = {labels[i] * costs[i], targets[i]};
  return out;
}

/// Regularized negative log-likelihood of the sigmoid on the scored set.
///   q >= 0:  t q + log(1 + e^-q)
///   q <  0:  (t - 1) q + log(1 + e^q)
inline double objective(double a, double b, std::span<const ScoredSample> scored) {
  if (scored.empty()) throw error(error_kind::invalid_input, "objective needs at least one sample");
  if (!std::isfinite(a) || !std::isfinite(b)) throw error(error_kind::invalid_input, "non-finite sigmoid parameters");
  double sum = 0.0;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) throw error(error_kind::invalid_input, "non-finite score");
    const double q = a * s.score + b;
    sum += q >= 0.0 ? s.target * q + std::log1p(std::exp(-q)) : (s.target - 1.0) * q + std::log1p(std::exp(q));
  }
  return sum;
}

/// Partial derivatives of `objective`: dF/dq_i = t_i - p_i.
inline Point objective_gradient(double a, double b, std::span<const ScoredSample> scored) {
  Point g{0.0, 0.0};
  for (const auto& s : scored) {
    const double r = s.target - sigmoid_probability(a, b, s.score);
    g.a += s.score * r;
    g.b += r;
  }
  return g;
}

enum class ScoreSource {
  training_costs,  // final costs of the forest's own training nodes
  cross_validated  // costs from classifying each fold with a forest trained on the others
};

struct FitOptions {
  ScoreSource source = ScoreSource::training_costs;
  int folds = 3;
};

namespace detail {

inline void require_binary(const Dataset& d) {
  if (!d.label_map) throw error(error_kind::invalid_input, "dataset has no binary label mapping");
}

inline std::vector<double> cross_validated_costs(const Dataset& train, DistanceMetric metric, int folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw error(error_kind::invalid_input, "cross-validated costs need at least 2 folds");
  Rng rng(seed);
  std::vector<int> fold_of(train.size(), 0);
  for (int cls : {-1, +1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (train.samples[i].binary_label == cls) members.push_back(i);
    rng.shuffle(members);
    for (std::size_t k = 0; k < members.size(); ++k) fold_of[members[k]] = static_cast<int>(k % folds);
  }
  std::vector<double> costs(train.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> in, out;
    for (std::size_t i = 0; i < train.size(); ++i) (fold_of[i] == f ? out : in).push_back(i);
    if (out.empty()) continue;
    const auto forest = popf::train(train.subset(in), metric);
    for (auto i : out) costs[i] = classify(forest, train.samples[i], ClassifyMode::early_stop).cost;
  }
  return costs;
}

}  // namespace detail

inline std::vector<ScoredSample> fitting_scores(const TrainedForest& forest, const Dataset& train,
                                                const FitOptions& options = {}, std::uint64_t seed = 0) {
  detail::require_binary(train);
  if (forest.size() != train.size()) throw error(error_kind::invalid_input, "forest was not trained on this dataset");
  const auto labels = train.binary_labels();
  if (options.source == ScoreSource::training_costs) return make_scored(forest.cost, labels);
  const auto costs = detail::cross_validated_costs(train, forest.metric, options.folds, seed);
  return make_scored(costs, labels);
}

/// Fits (A, B) on `train`, the dataset `forest` was trained on.
inline CalibrationModel fit(const TrainedForest& forest, const Dataset& train, OptimizerConfig optimizer,
                            std::uint64_t seed, const FitOptions& options = {}) {
  optimizer.seed = seed;
  const auto scored = fitting_scores(forest, train, options, seed);
  const Objective f = [&scored](double a, double b) { return objective(a, b, scored); };
  const auto result = minimize(f, optimizer);

  CalibrationModel model;
  model.optimizer_used = std::string(to_string(optimizer.algorithm));
  model.evaluations = result.evaluations;
  Point p = result.point;
  if (!optimizer.box.contains(p)) {
    p = optimizer.box.clamp(p);
    model.diagnostics.push_back("optimizer returned a point outside the search box; clamped");
  }
  model.a = p.a;
  model.b = p.b;
  model.final_nll = objective(p.a, p.b, scored);
  return model;
}

inline void validate_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw error(error_kind::invalid_input, "threshold must lie in [0, 1], got " + std::to_string(theta));
}

struct ProbabilisticPrediction {
  double probability = 0.5;
  Prediction prediction;
};

/// Estimate of P(y = +1 | t); the score sign comes from the OPF-predicted label.
inline ProbabilisticPrediction predict_proba(const TrainedForest& forest, const CalibrationModel& model,
                                             std::span<const double> t) {
  if (!forest.label_map) throw error(error_kind::invalid_input, "forest has no binary label mapping");
  const auto pred = classify(forest, t, ClassifyMode::early_stop);
  const int sign = forest.label_map->to_binary(pred.label);
  return {sigmoid_probability(model.a, model.b, sign * pred.cost), pred};
}

inline ProbabilisticPrediction predict_proba(const TrainedForest& forest, const CalibrationModel& model, const Sample& t) {
  return predict_proba(forest, model, std::span<const double>(t.features));
}

inline int decide(double probability, double theta) { return probability >= theta ? +1 : -1; }

inline int predict_label(const TrainedForest& forest, const CalibrationModel& model, const Sample& t) {
  validate_theta(model.theta);
  return decide(predict_proba(forest, model, t).probability, model.theta);
}

struct SweepRow {
  double theta = 0.5;
  double accuracy = 0.0;
};

/// Balanced accuracy of the thresholded probabilities on `test` for each
/// threshold. Classes absent from `test` contribute zero error rates.
inline std::vector<SweepRow> threshold_sweep(const TrainedForest& forest, const CalibrationModel& model,
                                             const Dataset& test, std::span<const double> grid) {
  if (grid.empty()) throw error(error_kind::invalid_input, "threshold grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    validate_theta(grid[i]);
    if (i > 0 && grid[i] < grid[i - 1]) throw error(error_kind::invalid_input, "threshold grid must be ascending");
  }
  if (test.empty()) throw error(error_kind::invalid_input, "test set is empty");
  detail::require_binary(test);

  std::vector<double> probs;
  probs.reserve(test.size());
  for (const auto& s : test.samples) probs.push_back(predict_proba(forest, model, s).probability);
  const auto truth = test.binary_labels();
  static constexpr int classes[] = {-1, +1};

  std::vector<SweepRow> rows;
  std::vector<int> predicted(probs.size());
  for (double theta : grid) {
    for (std::size_t i = 0; i < probs.size(); ++i) predicted[i] = decide(probs[i], theta);
    rows.push_back({theta, detail::balanced_accuracy_over(classes, truth, predicted, true)});
  }
  return rows;
}

/// `steps` evenly spaced thresholds from `start` to `end` inclusive.
inline std::vector<double> threshold_grid(double start, double end, std::size_t steps) {
  if (steps == 0) throw error(error_kind::invalid_input, "threshold grid is empty");
  if (steps == 1) return {start};
  return lattice(start, end, steps);
}

}  // namespace popf
