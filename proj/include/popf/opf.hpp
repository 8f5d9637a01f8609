#pragma once

// Supervised optimum-path forest over the complete graph of training
// samples, with prototypes taken from inter-class MST edges and the f_max
// (largest arc along the path) connectivity cost.

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <span>
#include <vector>

#include "popf/core.hpp"

namespace popf {

struct TrainedForest {
  std::vector<Sample> training_samples;
  std::vector<double> cost;
  std::vector<int> assigned_label;
  std::vector<bool> is_prototype;
  DistanceMetric metric = DistanceMetric::euclidean;
  std::size_t dimension = 0;
  std::optional<LabelMap> label_map;
  // Node indices ordered by (cost, index); drives the early-stopping classifier.
  std::vector<std::size_t> order;

  std::size_t size() const noexcept { return training_samples.size(); }
  std::size_t prototype_count() const { return static_cast<std::size_t>(std::count(is_prototype.begin(), is_prototype.end(), true)); }

  void rebuild_order() {
    order.resize(cost.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
  }
};

struct Prediction {
  int label = 0;
  double cost = 0.0;
  std::size_t conqueror_index = 0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

namespace detail {

inline void require_trainable(const Dataset& train) {
  if (train.empty()) throw error(error_kind::invalid_input, "training set is empty");
  train.validate();
  if (train.distinct_labels().size() < 2)
    throw error(error_kind::invalid_input, "training set needs at least 2 classes");
}

}  // namespace detail

/// Marks both endpoints of every MST edge that joins two classes.
/// Prim's algorithm from node 0; equal keys resolve to the lowest index.
inline std::vector<bool> find_prototypes(const Dataset& train, DistanceMetric metric) {
  detail::require_trainable(train);
  const std::size_t n = train.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> key(n, inf);
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> in_tree(n, false);
  std::vector<bool> proto(n, false);
  key[0] = 0.0;

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!in_tree[v] && (u == n || key[v] < key[u])) u = v;
    in_tree[u] = true;
    if (parent[u] != n && train.samples[u].label != train.samples[parent[u]].label) {
      proto[u] = true;
      proto[parent[u]] = true;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double w = distance(train.samples[u], train.samples[v], metric);
      if (w < key[v]) {
        key[v] = w;
        parent[v] = u;
      }
    }
  }
  return proto;
}

/// Computes the optimum-path forest rooted at the given prototype set.
/// Exposed separately so callers (and tests) can supply their own roots.
inline TrainedForest train_from_prototypes(const Dataset& train, DistanceMetric metric, std::vector<bool> prototypes) {
  const std::size_t n = train.size();
  if (prototypes.size() != n) throw error(error_kind::invalid_input, "prototype mask size mismatch");
  if (std::none_of(prototypes.begin(), prototypes.end(), [](bool b) { return b; }))
    throw error(error_kind::invalid_input, "at least one prototype is required");

  TrainedForest forest;
  forest.training_samples = train.samples;
  forest.metric = metric;
  forest.dimension = train.dimension;
  forest.label_map = train.label_map;
  forest.is_prototype = std::move(prototypes);
  forest.cost.assign(n, std::numeric_limits<double>::infinity());
  forest.assigned_label.resize(n);

  using entry = std::pair<double, std::size_t>;
  // min-heap on (cost, index): equal costs pop lowest index first
  std::priority_queue<entry, std::vector<entry>, std::greater<>> queue;
  for (std::size_t v = 0; v < n; ++v) {
    forest.assigned_label[v] = train.samples[v].label;
    if (forest.is_prototype[v]) {
      forest.cost[v] = 0.0;
      queue.emplace(0.0, v);
    }
  }

  std::vector<bool> done(n, false);
  while (!queue.empty()) {
    const auto [c, s] = queue.top();
    queue.pop();
    if (done[s] || c > forest.cost[s]) continue;
    done[s] = true;
    for (std::size_t t = 0; t < n; ++t) {
      if (done[t]) continue;
      const double tmp = std::max(forest.cost[s], distance(train.samples[s], train.samples[t], metric));
      if (tmp < forest.cost[t]) {
        forest.cost[t] = tmp;
        forest.assigned_label[t] = forest.assigned_label[s];
        queue.emplace(tmp, t);
      }
    }
  }
  forest.rebuild_order();
  return forest;
}

inline TrainedForest train(const Dataset& train, DistanceMetric metric = DistanceMetric::euclidean) {
  return train_from_prototypes(train, metric, find_prototypes(train, metric));
}

enum class ClassifyMode { full_scan, early_stop };

/// Conquest of `t` by the training node minimizing max(C_v, d(v, t)).
/// Ties go to the lowest training index in both modes.
inline Prediction classify(const TrainedForest& forest, std::span<const double> t,
                           ClassifyMode mode = ClassifyMode::full_scan) {
  if (t.size() != forest.dimension)
    throw error(error_kind::invalid_input, "sample has " + std::to_string(t.size()) + " features, forest expects " +
                                               std::to_string(forest.dimension));
  if (forest.size() == 0) throw error(error_kind::invalid_input, "forest is empty");

  Prediction best{0, std::numeric_limits<double>::infinity(), forest.size()};
  auto consider = [&](std::size_t v) {
    const double c = std::max(forest.cost[v], distance(forest.training_samples[v].features, t, forest.metric));
    if (c < best.cost || (c == best.cost && v < best.conqueror_index)) {
      best.cost = c;
      best.conqueror_index = v;
    }
  };

  if (mode == ClassifyMode::full_scan || forest.order.size() != forest.size()) {
    for (std::size_t v = 0; v < forest.size(); ++v) consider(v);
  } else {
    for (auto v : forest.order) {
      if (forest.cost[v] > best.cost) break;
      consider(v);
    }
  }
  best.label = forest.assigned_label[best.conqueror_index];
  return best;
}

inline Prediction classify(const TrainedForest& forest, const Sample& t, ClassifyMode mode = ClassifyMode::full_scan) {
  return classify(forest, std::span<const double>(t.features), mode);
}

inline std::vector<Prediction> classify_all(const TrainedForest& forest, const Dataset& test,
                                            ClassifyMode mode = ClassifyMode::early_stop) {
  std::vector<Prediction> out;
  out.reserve(test.size());
  for (const auto& s : test.samples) out.push_back(classify(forest, s, mode));
  return out;
}

namespace detail {

// Accuracy over a fixed class set. With `lenient`, a rate whose
// denominator is zero contributes 0 instead of raising.
inline double balanced_accuracy_over(std::span<const int> classes, std::span<const int> truth,
                                     std::span<const int> predicted, bool lenient) {
  const std::size_t total = truth.size();
  double sum = 0.0;
  for (int c : classes) {
    std::size_t members = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < total; ++i) {
      if (truth[i] == c) {
        ++members;
        if (predicted[i] != c) ++fn;
      } else if (predicted[i] == c) {
        ++fp;
      }
    }
    const std::size_t others = total - members;
    if ((members == 0 || others == 0) && !lenient)
      throw error(error_kind::degenerate_class, "class " + std::to_string(c) + " has " + std::to_string(members) +
                                                    " of " + std::to_string(total) + " samples");
    const double false_pos = others == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(others);
    const double false_neg = members == 0 ? 0.0 : static_cast<double>(fn) / static_cast<double>(members);
    sum += false_pos + false_neg;
  }
  return 1.0 - sum / (2.0 * static_cast<double>(classes.size()));
}

}  // namespace detail

/// Class-imbalance aware accuracy: 1 - sum_i (FP_i/(N-n_i) + FN_i/n_i) / 2c.
inline double balanced_accuracy(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.empty() || truth.size() != predicted.size())
    throw error(error_kind::invalid_input, "label lists must be non-empty and of equal length");
  std::set<int> classes(truth.begin(), truth.end());
  for (int p : predicted)
    if (!classes.contains(p))
      throw error(error_kind::invalid_input, "predicted class " + std::to_string(p) + " absent from true labels");
  const std::vector<int> cls(classes.begin(), classes.end());
  return detail::balanced_accuracy_over(cls, truth, predicted, false);
}

}  // namespace popf
