#pragma once

// Independent oracles and fixtures shared by the test suites. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "popf/core.hpp"

namespace popf::testing {

// Four points: (0,0)+, (0,1)+, (2,0)-, (2,1)-.
inline Dataset four_points() {
  Dataset d;
  d.name = "four_points";
  d.dimension = 2;
  d.samples = {{{0.0, 0.0}, 1, 1}, {{0.0, 1.0}, 1, 1}, {{2.0, 0.0}, -1, -1}, {{2.0, 1.0}, -1, -1}};
  d.label_map = LabelMap{1, -1};
  return d;
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Random binary dataset with both classes present. Coordinates are drawn
// from a continuous distribution, so pairwise distances are distinct
// with probability one.
inline Dataset random_dataset(std::mt19937_64& gen, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dataset d;
  d.dimension = dim;
  d.label_map = LabelMap{1, -1};
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    for (std::size_t k = 0; k < dim; ++k) s.features.push_back(u(gen));
    s.label = i == 0 ? 1 : (i == 1 ? -1 : (gen() % 2 == 0 ? 1 : -1));
    s.binary_label = s.label;
    d.samples.push_back(std::move(s));
  }
  return d;
}

inline bool all_distances_distinct(const Dataset& d) {
  std::vector<double> w;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) w.push_back(euclid(d.samples[i].features, d.samples[j].features));
  std::sort(w.begin(), w.end());
  return std::adjacent_find(w.begin(), w.end()) == w.end();
}

// Minimum spanning tree by enumerating every (n-1)-edge subset of the
// complete graph. Among equal-weight trees, the one whose sorted edge list
// is lexicographically smallest wins. Only for tiny n.
inline std::vector<std::pair<std::size_t, std::size_t>> brute_force_mst(const Dataset& d) {
  const std::size_t n = d.size();
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  const std::size_t m = edges.size();
  double best_w = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, std::size_t>> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != n - 1) continue;
    std::vector<std::size_t> comp(n);
    for (std::size_t i = 0; i < n; ++i) comp[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
    bool acyclic = true;
    double w = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    for (std::size_t e = 0; e < m; ++e) {
      if (!(mask >> e & 1U)) continue;
      auto [a, b] = edges[e];
      const auto ra = find(a), rb = find(b);
      if (ra == rb) {
        acyclic = false;
        break;
      }
      comp[ra] = rb;
      w += euclid(d.samples[a].features, d.samples[b].features);
      chosen.push_back(edges[e]);
    }
    if (!acyclic) continue;
    if (w < best_w - 1e-12 || (std::abs(w - best_w) <= 1e-12 && chosen < best)) {
      best_w = w;
      best = chosen;
    }
  }
  return best;
}

// Minimax path cost from any root in `roots` to every node, by enumerating
// every simple path that starts at a root.
inline std::vector<double> brute_force_minimax(const Dataset& d, const std::vector<bool>& roots) {
  const std::size_t n = d.size();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<bool> on_path(n, false);
  std::function<void(std::size_t, double)> walk = [&](std::size_t v, double cost) {
    best[v] = std::min(best[v], cost);
    for (std::size_t t = 0; t < n; ++t) {
      if (on_path[t]) continue;
      on_path[t] = true;
      walk(t, std::max(cost, euclid(d.samples[v].features, d.samples[t].features)));
      on_path[t] = false;
    }
  };
  for (std::size_t r = 0; r < n; ++r) {
    if (!roots[r]) continue;
    on_path[r] = true;
    walk(r, 0.0);
    on_path[r] = false;
  }
  return best;
}

// Negative log-likelihood straight from its definition, in extended
// precision. Only meaningful where exp(q) does not overflow.
inline long double naive_nll(double a, double b, const std::vector<double>& scores, const std::vector<double>& targets) {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const long double q = static_cast<long double>(a) * scores[i] + b;
    const long double e = std::exp(q);
    const long double p = 1.0L / (1.0L + e);
    const long double not_p = e / (1.0L + e);  // 1 - p without subtracting
    sum -= targets[i] * std::log(p) + (1.0L - targets[i]) * std::log(not_p);
  }
  return sum;
}

// Same formula in plain double arithmetic; overflows for large |q|.
inline double naive_nll_double(double a, double b, const std::vector<double>& scores, const std::vector<double>& targets) {
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(a * scores[i] + b));
    sum -= targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p);
  }
  return sum;
}

}  // namespace popf::testing
