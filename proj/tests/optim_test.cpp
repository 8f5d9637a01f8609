#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "popf/optim.hpp"

using namespace popf;

namespace {

const Objective sphere = [](double a, double b) { return (a - 1.0) * (a - 1.0) + (b + 2.0) * (b + 2.0); };

OptimizerConfig config_for(Algorithm alg) {
  OptimizerConfig cfg;
  cfg.algorithm = alg;
  cfg.seed = 2024;
  return cfg;
}

constexpr Algorithm all_algorithms[] = {Algorithm::nelder_mead, Algorithm::pso, Algorithm::bat, Algorithm::firefly};

}  // namespace

TEST(Minimize, NelderMeadFindsShiftedSphere) {
  const auto r = minimize(sphere, config_for(Algorithm::nelder_mead));
  EXPECT_NEAR(r.point.a, 1.0, 1e-3);
  EXPECT_NEAR(r.point.b, -2.0, 1e-3);
  EXPECT_LT(r.value, 1e-6);
}

TEST(Minimize, SwarmsApproachShiftedSphere) {
  for (auto alg : {Algorithm::pso, Algorithm::bat, Algorithm::firefly}) {
    const auto r = minimize(sphere, config_for(alg));
    EXPECT_NEAR(r.point.a, 1.0, 0.1) << to_string(alg);
    EXPECT_NEAR(r.point.b, -2.0, 0.1) << to_string(alg);
    EXPECT_LT(r.value, 1e-2) << to_string(alg);
  }
}

TEST(Minimize, DefaultParameters) {
  const OptimizerConfig c;
  EXPECT_EQ(c.agents, 20);
  EXPECT_EQ(c.iterations, 400);
  EXPECT_EQ(c.nm.tolerance, 0.001);
  EXPECT_EQ(c.nm.max_iterations, 1000);
  EXPECT_EQ(c.pso.c1, 2.0);
  EXPECT_EQ(c.pso.c2, 2.0);
  EXPECT_EQ(c.pso.w, 0.5);
  EXPECT_EQ(c.bat.q_min, 0.0);
  EXPECT_EQ(c.bat.q_max, 1.0);
  EXPECT_EQ(c.bat.alpha, 1.0);
  EXPECT_EQ(c.bat.gamma, 1.0);
  EXPECT_EQ(c.ffa.gamma, 1.0);
  EXPECT_EQ(c.ffa.beta, 0.9);
  EXPECT_EQ(c.ffa.alpha, 0.7);
  EXPECT_EQ(c.box.a_min, -10.0);
  EXPECT_EQ(c.box.b_max, 10.0);
}

TEST(Minimize, ConstantObjective) {
  const Objective seven = [](double, double) { return 7.0; };
  for (auto alg : all_algorithms) {
    auto cfg = config_for(alg);
    cfg.iterations = 20;
    const auto r = minimize(seven, cfg);
    EXPECT_EQ(r.value, 7.0);
    EXPECT_TRUE(cfg.box.contains(r.point));
  }
}

TEST(Minimize, SameSeedSameResult) {
  for (auto alg : all_algorithms) {
    const auto r1 = minimize(sphere, config_for(alg));
    const auto r2 = minimize(sphere, config_for(alg));
    EXPECT_EQ(r1.point, r2.point);
    EXPECT_EQ(r1.trace, r2.trace);
    EXPECT_EQ(r1.evaluations, r2.evaluations);
  }
}

TEST(Minimize, EveryEvaluationInsideBox) {
  // minimum outside the box pulls agents against the boundary
  const Objective outside = [](double a, double b) { return (a - 50.0) * (a - 50.0) + (b + 50.0) * (b + 50.0); };
  for (auto alg : all_algorithms) {
    auto cfg = config_for(alg);
    cfg.box = {-3.0, 2.0, -1.0, 4.0};
    cfg.iterations = 50;
    bool inside = true;
    const Objective probe = [&](double a, double b) {
      inside = inside && cfg.box.contains({a, b});
      return outside(a, b);
    };
    const auto r = minimize(probe, cfg);
    EXPECT_TRUE(inside) << to_string(alg);
    EXPECT_TRUE(cfg.box.contains(r.point));
    EXPECT_NEAR(r.point.a, 2.0, 0.05) << to_string(alg);
    EXPECT_NEAR(r.point.b, -1.0, 0.05) << to_string(alg);
  }
}

TEST(Minimize, TraceIsNonIncreasing) {
  for (auto alg : all_algorithms) {
    const auto r = minimize(sphere, config_for(alg));
    ASSERT_FALSE(r.trace.empty());
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
    EXPECT_EQ(r.trace.back(), r.value);
  }
}

TEST(Minimize, NonFiniteObjectiveIsOptimizationError) {
  const Objective bad = [](double a, double) { return a > 0.5 ? std::nan("") : a * a; };
  auto cfg = config_for(Algorithm::pso);
  try {
    minimize(bad, cfg);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.kind(), error_kind::optimization_error);
  }
}

TEST(Minimize, InvalidConfig) {
  auto cfg = config_for(Algorithm::pso);
  cfg.agents = 0;
  EXPECT_THROW(minimize(sphere, cfg), error);
  cfg = config_for(Algorithm::nelder_mead);
  cfg.box = {1.0, 1.0, 0.0, 1.0};
  EXPECT_THROW(minimize(sphere, cfg), error);
  EXPECT_THROW(parse_algorithm("sa"), error);
  EXPECT_EQ(parse_algorithm("ffa"), Algorithm::firefly);
}

TEST(Minimize, NelderMeadNoWorseThanCoarseGrid) {
  const Objective rosen = [](double a, double b) { return (1 - a) * (1 - a) + 5 * (b - a * a) * (b - a * a); };
  const auto grid = grid_evaluate(rosen, SearchBox{}, 21);
  const auto r = minimize(rosen, config_for(Algorithm::nelder_mead));
  EXPECT_LE(r.value, grid.min() + 1e-6);
}

TEST(Grid, TwoStepsAreCorners) {
  const auto g = grid_evaluate(sphere, SearchBox{}, 2);
  EXPECT_EQ(g.a_values, (std::vector<double>{-10.0, 10.0}));
  EXPECT_EQ(g.b_values, (std::vector<double>{-10.0, 10.0}));
  EXPECT_EQ(g.values.size(), 4U);
}

TEST(Grid, SeparableFunction) {
  const auto g = grid_evaluate([](double a, double) { return a; }, SearchBox{}, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(g.at(i, j), (static_cast<double>(i) - 1.0) * 10.0);
}

TEST(Grid, LatticeIncludesCornersAndWritesCsv) {
  const auto g = grid_evaluate(sphere, SearchBox{-1.0, 1.0, -2.0, 2.0}, 3);
  EXPECT_EQ(g.a_values, (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_EQ(g.b_values, (std::vector<double>{-2.0, 0.0, 2.0}));
  EXPECT_DOUBLE_EQ(g.at(2, 0), 0.0);
  EXPECT_EQ(g.argmin(), (std::pair<std::size_t, std::size_t>{2, 0}));
  std::ostringstream os;
  g.write_csv(os);
  const auto text = os.str();
  EXPECT_EQ(text.substr(0, 6), "A,B,F\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
  EXPECT_THROW(grid_evaluate(sphere, SearchBox{}, 1), error);
}
