#pragma once

// Dataset representation, label conventions, distances and the seeded
// randomness shared by the rest of the toolkit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace popf {

enum class error_kind {
  invalid_input,
  unsupported_dataset,
  degenerate_class,
  parse_error,
  load_error,
  optimization_error,
};

class error : public std::runtime_error {
 public:
  error(error_kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  error_kind kind() const noexcept { return kind_; }

 private:
  error_kind kind_;
};

struct Sample {
  std::vector<double> features;
  int label = 0;
  // -1 or +1 once the owning dataset carries a LabelMap; 0 before that.
  int binary_label = 0;
};

struct LabelMap {
  int positive_label = 1;
  int negative_label = -1;

  int to_binary(int label) const {
    if (label == positive_label) return +1;
    if (label == negative_label) return -1;
    throw error(error_kind::invalid_input, "label " + std::to_string(label) + " is not covered by the label map");
  }
  int from_binary(int binary) const { return binary > 0 ? positive_label : negative_label; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  std::size_t dimension = 0;
  std::optional<LabelMap> label_map;
  std::string name;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  std::vector<int> distinct_labels() const {
    std::set<int> s;
    for (const auto& x : samples) s.insert(x.label);
    return {s.begin(), s.end()};
  }

  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& x : samples) out.push_back(x.label);
    return out;
  }

  std::vector<int> binary_labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& x : samples) out.push_back(x.binary_label);
    return out;
  }

  // Subset in the order of `indices`, keeping name, dimension and label map.
  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out{{}, dimension, label_map, name};
    out.samples.reserve(indices.size());
    for (auto i : indices) out.samples.push_back(samples.at(i));
    return out;
  }

  void validate() const {
    if (dimension == 0) throw error(error_kind::invalid_input, "dataset dimension must be positive");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].features.size() != dimension)
        throw error(error_kind::invalid_input,
                    "sample " + std::to_string(i) + " has " + std::to_string(samples[i].features.size()) +
                        " features, expected " + std::to_string(dimension));
    }
  }
};

enum class DistanceMetric { euclidean, squared_euclidean, manhattan };

inline std::string_view to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::euclidean: return "euclidean";
    case DistanceMetric::squared_euclidean: return "squared_euclidean";
    case DistanceMetric::manhattan: return "manhattan";
  }
  return "euclidean";
}

inline DistanceMetric parse_metric(std::string_view s) {
  if (s == "euclidean") return DistanceMetric::euclidean;
  if (s == "squared_euclidean") return DistanceMetric::squared_euclidean;
  if (s == "manhattan") return DistanceMetric::manhattan;
  throw error(error_kind::invalid_input, "unknown distance metric '" + std::string(s) + "'");
}

inline double distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric) {
  if (a.size() != b.size())
    throw error(error_kind::invalid_input, "dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                               std::to_string(b.size()));
  double acc = 0.0;
  switch (metric) {
    case DistanceMetric::manhattan:
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
      return acc;
    case DistanceMetric::squared_euclidean:
    case DistanceMetric::euclidean:
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
      }
      return metric == DistanceMetric::euclidean ? std::sqrt(acc) : acc;
  }
  return acc;
}

inline double distance(const Sample& a, const Sample& b, DistanceMetric metric) {
  return distance(a.features, b.features, metric);
}

/// Assigns binary labels: +1 for `positive_label`, -1 for the other class.
/// Requires exactly two distinct original labels.
inline Dataset to_binary(Dataset dataset, int positive_label) {
  const auto classes = dataset.distinct_labels();
  if (classes.size() != 2)
    throw error(error_kind::unsupported_dataset,
                "binary mapping needs exactly 2 classes, found " + std::to_string(classes.size()));
  if (positive_label != classes[0] && positive_label != classes[1])
    throw error(error_kind::invalid_input, "positive label " + std::to_string(positive_label) + " not present");
  const LabelMap map{positive_label, positive_label == classes[0] ? classes[1] : classes[0]};
  for (auto& s : dataset.samples) s.binary_label = map.to_binary(s.label);
  dataset.label_map = map;
  return dataset;
}

// With no explicit choice the larger label is positive ({-1,+1} -> +1, {2,4} -> 4).
inline int default_positive_label(const Dataset& dataset) {
  const auto classes = dataset.distinct_labels();
  if (classes.size() != 2)
    throw error(error_kind::unsupported_dataset,
                "binary mapping needs exactly 2 classes, found " + std::to_string(classes.size()));
  return classes[1];
}

/// Seeded random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the conversions to doubles and
/// indices are done here because the std distributions are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw error(error_kind::invalid_input, "empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; one value per call.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline Dataset shuffled(Dataset dataset, std::uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(dataset.samples);
  return dataset;
}

}  // namespace popf
