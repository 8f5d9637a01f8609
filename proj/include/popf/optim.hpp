#pragma once

// Derivative-free minimizers over a 2-D box: Nelder-Mead, particle swarm,
// bat algorithm and firefly algorithm, plus a lattice evaluator for
// landscape plots.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "popf/core.hpp"

namespace popf {

struct Point {
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct SearchBox {
  double a_min = -10.0;
  double a_max = 10.0;
  double b_min = -10.0;
  double b_max = 10.0;

  void validate() const {
    if (!(a_min < a_max) || !(b_min < b_max))
      throw error(error_kind::invalid_input, "search box bounds must satisfy min < max on both axes");
  }
  Point clamp(Point p) const { return {std::clamp(p.a, a_min, a_max), std::clamp(p.b, b_min, b_max)}; }
  bool contains(Point p) const { return p.a >= a_min && p.a <= a_max && p.b >= b_min && p.b <= b_max; }
  Point center() const { return {0.5 * (a_min + a_max), 0.5 * (b_min + b_max)}; }
  double span_a() const { return a_max - a_min; }
  double span_b() const { return b_max - b_min; }
};

enum class Algorithm { nelder_mead, pso, bat, firefly };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::nelder_mead: return "nm";
    case Algorithm::pso: return "pso";
    case Algorithm::bat: return "ba";
    case Algorithm::firefly: return "ffa";
  }
  return "nm";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "nm") return Algorithm::nelder_mead;
  if (s == "pso") return Algorithm::pso;
  if (s == "ba") return Algorithm::bat;
  if (s == "ffa") return Algorithm::firefly;
  throw error(error_kind::invalid_input, "unknown optimizer '" + std::string(s) + "' (expected nm, pso, ba or ffa)");
}

struct NelderMeadParams {
  // Stops once both the simplex diameter and the spread of vertex values
  // fall below this.
  double tolerance = 0.001;
  int max_iterations = 1000;
  // Initial simplex edge as a fraction of the box span on each axis.
  double initial_step = 0.1;
};

struct PsoParams {
  double c1 = 2.0;
  double c2 = 2.0;
  double w = 0.5;
};

struct BatParams {
  double q_min = 0.0;
  double q_max = 1.0;
  double alpha = 1.0;  // loudness decay
  double gamma = 1.0;  // pulse-rate growth
  double initial_loudness = 1.0;
  double initial_pulse_rate = 0.5;
};

struct FireflyParams {
  double gamma = 1.0;  // light absorption
  double beta = 0.9;   // attractiveness at distance 0
  double alpha = 0.7;  // random step, fixed across iterations
};

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::nelder_mead;
  int agents = 20;
  int iterations = 400;
  SearchBox box{};
  NelderMeadParams nm{};
  PsoParams pso{};
  BatParams bat{};
  FireflyParams ffa{};
  std::uint64_t seed = 0;
  // Nelder-Mead start; box center when empty.
  std::optional<Point> start;
  // Fraction of the box span that bounds each velocity component (PSO, BA).
  double velocity_limit = 0.5;

  void validate() const {
    box.validate();
    if (agents <= 0 || iterations <= 0) throw error(error_kind::invalid_input, "agents and iterations must be positive");
    if (nm.max_iterations <= 0 || !(nm.tolerance > 0.0))
      throw error(error_kind::invalid_input, "Nelder-Mead needs positive tolerance and iteration cap");
  }
};

struct OptimResult {
  Point point;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  // Best value after each iteration.
  std::vector<double> trace;
  int iterations = 0;
};

using Objective = std::function<double(double a, double b)>;

namespace detail {

class Evaluator {
 public:
  Evaluator(const Objective& f, const SearchBox& box) : f_(f), box_(box) {}

  double operator()(Point& p) {
    p = box_.clamp(p);
    const double v = f_(p.a, p.b);
    ++count_;
    if (!std::isfinite(v))
      throw error(error_kind::optimization_error, "objective is not finite at (" + std::to_string(p.a) + ", " +
                                                      std::to_string(p.b) + ")");
    return v;
  }
  std::size_t count() const noexcept { return count_; }

 private:
  const Objective& f_;
  const SearchBox& box_;
  std::size_t count_ = 0;
};

inline Point random_point(Rng& rng, const SearchBox& box) {
  const double a = rng.uniform(box.a_min, box.a_max);
  const double b = rng.uniform(box.b_min, box.b_max);
  return {a, b};
}

inline double clamp_velocity(double v, double limit) { return std::clamp(v, -limit, limit); }

inline OptimResult nelder_mead(const Objective& f, const OptimizerConfig& cfg) {
  const auto& box = cfg.box;
  Evaluator eval(f, box);
  const Point start = box.clamp(cfg.start.value_or(box.center()));
  const double step_a = cfg.nm.initial_step * box.span_a();
  const double step_b = cfg.nm.initial_step * box.span_b();
  // Step away from the upper bound when the start sits on it.
  const double da = start.a + step_a <= box.a_max ? step_a : -step_a;
  const double db = start.b + step_b <= box.b_max ? step_b : -step_b;

  std::array<Point, 3> x{start, Point{start.a + da, start.b}, Point{start.a, start.b + db}};
  std::array<double, 3> fx{};
  for (std::size_t i = 0; i < 3; ++i) fx[i] = eval(x[i]);

  auto sort_simplex = [&] {
    std::array<std::size_t, 3> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return fx[i] < fx[j]; });
    const auto xs = x;
    const auto fs = fx;
    for (std::size_t i = 0; i < 3; ++i) {
      x[i] = xs[idx[i]];
      fx[i] = fs[idx[i]];
    }
  };
  auto along = [](Point from, Point to, double t) { return Point{from.a + t * (to.a - from.a), from.b + t * (to.b - from.b)}; };

  OptimResult res;
  int it = 0;
  for (; it < cfg.nm.max_iterations; ++it) {
    sort_simplex();
    double diameter = 0.0;
    for (std::size_t i = 1; i < 3; ++i) diameter = std::max(diameter, std::hypot(x[i].a - x[0].a, x[i].b - x[0].b));
    if (diameter < cfg.nm.tolerance && fx[2] - fx[0] < cfg.nm.tolerance) break;

    const Point centroid{0.5 * (x[0].a + x[1].a), 0.5 * (x[0].b + x[1].b)};
    Point xr = along(x[2], centroid, 2.0);
    const double fr = eval(xr);
    if (fr < fx[0]) {
      Point xe = along(x[2], centroid, 3.0);
      const double fe = eval(xe);
      if (fe < fr) {
        x[2] = xe;
        fx[2] = fe;
      } else {
        x[2] = xr;
        fx[2] = fr;
      }
    } else if (fr < fx[1]) {
      x[2] = xr;
      fx[2] = fr;
    } else {
      bool shrink = false;
      if (fr < fx[2]) {
        Point xc = along(centroid, xr, 0.5);
        const double fc = eval(xc);
        if (fc <= fr) {
          x[2] = xc;
          fx[2] = fc;
        } else {
          shrink = true;
        }
      } else {
        Point xc = along(centroid, x[2], 0.5);
        const double fc = eval(xc);
        if (fc < fx[2]) {
          x[2] = xc;
          fx[2] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i < 3; ++i) {
          x[i] = along(x[0], x[i], 0.5);
          fx[i] = eval(x[i]);
        }
      }
    }
    res.trace.push_back(std::min({fx[0], fx[1], fx[2]}));
  }
  sort_simplex();
  res.point = x[0];
  res.value = fx[0];
  res.evaluations = eval.count();
  res.iterations = it;
  return res;
}

inline OptimResult particle_swarm(const Objective& f, const OptimizerConfig& cfg) {
  const auto& box = cfg.box;
  const auto& p = cfg.pso;
  Evaluator eval(f, box);
  Rng rng(cfg.seed);
  const auto n = static_cast<std::size_t>(cfg.agents);
  const double vmax_a = cfg.velocity_limit * box.span_a();
  const double vmax_b = cfg.velocity_limit * box.span_b();

  std::vector<Point> x(n), v(n), pbest(n);
  std::vector<double> fx(n), fbest(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = random_point(rng, box);
  std::size_t g = 0;
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = eval(x[i]);
    pbest[i] = x[i];
    fbest[i] = fx[i];
    if (fx[i] < fbest[g]) g = i;
  }
  Point gbest = pbest[g];
  double gval = fbest[g];

  OptimResult res;
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r1a = rng.uniform(), r1b = rng.uniform();
      const double r2a = rng.uniform(), r2b = rng.uniform();
      v[i].a = clamp_velocity(p.w * v[i].a + p.c1 * r1a * (pbest[i].a - x[i].a) + p.c2 * r2a * (gbest.a - x[i].a), vmax_a);
      v[i].b = clamp_velocity(p.w * v[i].b + p.c1 * r1b * (pbest[i].b - x[i].b) + p.c2 * r2b * (gbest.b - x[i].b), vmax_b);
      x[i] = {x[i].a + v[i].a, x[i].b + v[i].b};
      fx[i] = eval(x[i]);
      if (fx[i] < fbest[i]) {
        fbest[i] = fx[i];
        pbest[i] = x[i];
      }
      if (fx[i] < gval) {
        gval = fx[i];
        gbest = x[i];
      }
    }
    res.trace.push_back(gval);
  }
  res.point = gbest;
  res.value = gval;
  res.evaluations = eval.count();
  res.iterations = cfg.iterations;
  return res;
}

inline OptimResult bat_algorithm(const Objective& f, const OptimizerConfig& cfg) {
  const auto& box = cfg.box;
  const auto& p = cfg.bat;
  Evaluator eval(f, box);
  Rng rng(cfg.seed);
  const auto n = static_cast<std::size_t>(cfg.agents);
  const double vmax_a = cfg.velocity_limit * box.span_a();
  const double vmax_b = cfg.velocity_limit * box.span_b();

  std::vector<Point> x(n), v(n);
  std::vector<double> fx(n), loudness(n, p.initial_loudness), pulse(n, p.initial_pulse_rate);
  for (std::size_t i = 0; i < n; ++i) x[i] = random_point(rng, box);
  std::size_t g = 0;
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = eval(x[i]);
    if (fx[i] < fx[g]) g = i;
  }
  Point best = x[g];
  double fbest = fx[g];

  OptimResult res;
  for (int it = 1; it <= cfg.iterations; ++it) {
    double mean_loudness = 0.0;
    for (double l : loudness) mean_loudness += l;
    mean_loudness /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
      const double freq = p.q_min + (p.q_max - p.q_min) * rng.uniform();
      v[i].a = clamp_velocity(v[i].a + (x[i].a - best.a) * freq, vmax_a);
      v[i].b = clamp_velocity(v[i].b + (x[i].b - best.b) * freq, vmax_b);
      Point candidate{x[i].a + v[i].a, x[i].b + v[i].b};
      if (rng.uniform() > pulse[i]) {
        // local walk around the current best
        candidate = {best.a + rng.uniform(-1.0, 1.0) * mean_loudness, best.b + rng.uniform(-1.0, 1.0) * mean_loudness};
      }
      const double fc = eval(candidate);
      if (fc <= fx[i] && rng.uniform() < loudness[i]) {
        x[i] = candidate;
        fx[i] = fc;
        loudness[i] *= p.alpha;
        pulse[i] = p.initial_pulse_rate * (1.0 - std::exp(-p.gamma * it));
      }
      if (fc < fbest) {
        fbest = fc;
        best = candidate;
      }
    }
    res.trace.push_back(fbest);
  }
  res.point = best;
  res.value = fbest;
  res.evaluations = eval.count();
  res.iterations = cfg.iterations;
  return res;
}

inline OptimResult firefly(const Objective& f, const OptimizerConfig& cfg) {
  const auto& box = cfg.box;
  const auto& p = cfg.ffa;
  Evaluator eval(f, box);
  Rng rng(cfg.seed);
  const auto n = static_cast<std::size_t>(cfg.agents);

  std::vector<Point> x(n);
  std::vector<double> fx(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = random_point(rng, box);
  std::size_t g = 0;
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = eval(x[i]);
    if (fx[i] < fx[g]) g = i;
  }
  Point best = x[g];
  double fbest = fx[g];

  OptimResult res;
  for (int it = 0; it < cfg.iterations; ++it) {
    const auto old_x = x;
    const auto old_f = fx;
    for (std::size_t i = 0; i < n; ++i) {
      bool moved = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (!(old_f[j] < old_f[i])) continue;
        const double da = old_x[j].a - x[i].a;
        const double db = old_x[j].b - x[i].b;
        const double attraction = p.beta * std::exp(-p.gamma * (da * da + db * db));
        x[i] = box.clamp({x[i].a + attraction * da + p.alpha * (rng.uniform() - 0.5),
                          x[i].b + attraction * db + p.alpha * (rng.uniform() - 0.5)});
        moved = true;
      }
      if (!moved) {
        // brightest firefly: random walk
        x[i] = box.clamp({x[i].a + p.alpha * (rng.uniform() - 0.5), x[i].b + p.alpha * (rng.uniform() - 0.5)});
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      fx[i] = eval(x[i]);
      if (fx[i] < fbest) {
        fbest = fx[i];
        best = x[i];
      }
    }
    res.trace.push_back(fbest);
  }
  res.point = best;
  res.value = fbest;
  res.evaluations = eval.count();
  res.iterations = cfg.iterations;
  return res;
}

}  // namespace detail

/// Minimizes `objective` over the configured box. Every evaluated point is
/// clamped to the box; results depend only on the config (including seed).
inline OptimResult minimize(const Objective& objective, const OptimizerConfig& config) {
  config.validate();
  switch (config.algorithm) {
    case Algorithm::nelder_mead: return detail::nelder_mead(objective, config);
    case Algorithm::pso: return detail::particle_swarm(objective, config);
    case Algorithm::bat: return detail::bat_algorithm(objective, config);
    case Algorithm::firefly: return detail::firefly(objective, config);
  }
  throw error(error_kind::invalid_input, "unknown optimizer");
}

struct Grid {
  std::vector<double> a_values;
  std::vector<double> b_values;
  // values[i * b_values.size() + j] = objective(a_values[i], b_values[j])
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * b_values.size() + j]; }

  std::pair<std::size_t, std::size_t> argmin() const {
    const auto k = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    return {k / b_values.size(), k % b_values.size()};
  }
  double min() const { return *std::min_element(values.begin(), values.end()); }

  void write_csv(std::ostream& os) const {
    os << "A,B,F\n";
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < a_values.size(); ++i)
      for (std::size_t j = 0; j < b_values.size(); ++j)
        os << a_values[i] << ',' << b_values[j] << ',' << at(i, j) << '\n';
    os.precision(old);
  }
};

inline std::vector<double> lattice(double lo, double hi, std::size_t steps) {
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i)
    out[i] = i + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  return out;
}

/// Evaluates the objective on a steps x steps lattice that includes the box corners.
inline Grid grid_evaluate(const Objective& objective, const SearchBox& box, std::size_t steps) {
  box.validate();
  if (steps < 2) throw error(error_kind::invalid_input, "grid needs at least 2 steps per axis");
  Grid g{lattice(box.a_min, box.a_max, steps), lattice(box.b_min, box.b_max, steps), {}};
  g.values.reserve(steps * steps);
  for (double a : g.a_values)
    for (double b : g.b_values) g.values.push_back(objective(a, b));
  return g;
}

}  // namespace popf
