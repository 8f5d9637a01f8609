// Acceptance checks. Prints one status line per criterion followed by
// indented detail lines.
//
// exit status: 0 all passed, 1 at least one FAIL, 77 nothing failed but
// some criterion could not run (missing data).
//
// Datasets are read from $POPF_DATA_DIR (default: data/libsvm in the source tree).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "popf/popf.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace popf;

namespace {

enum class Status { pass, fail, blocked, excluded, info };

const char* label(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::blocked: return "BLOCKED";
    case Status::excluded: return "EXCLUDED";
    case Status::info: return "info";
  }
  return "?";
}

struct Part {
  Status status;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  std::vector<Part> parts;

  void add(Status s, std::string detail) { parts.push_back({s, std::move(detail)}); }
  void check(bool ok, std::string detail) { add(ok ? Status::pass : Status::fail, std::move(detail)); }
  void note(std::string detail) { add(Status::info, std::move(detail)); }

  Status overall() const {
    bool blocked = false;
    for (const auto& p : parts) {
      if (p.status == Status::fail) return Status::fail;
      if (p.status == Status::blocked) blocked = true;
      if (p.status == Status::excluded) return Status::excluded;
    }
    return blocked ? Status::blocked : Status::pass;
  }
};

std::string fixed(double v, int prec = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

fs::path data_dir() {
  if (const char* env = std::getenv("POPF_DATA_DIR"); env && *env) return env;
  return POPF_LIBSVM_DIR;
}

// First existing file among the usual names of a public dataset.
std::optional<fs::path> find_dataset(const std::vector<std::string>& names) {
  for (const auto& n : names)
    if (fs::path p = data_dir() / n; fs::is_regular_file(p)) return p;
  return std::nullopt;
}

std::optional<Dataset> load_named(const std::vector<std::string>& names) {
  const auto p = find_dataset(names);
  if (!p) return std::nullopt;
  auto d = load_libsvm(*p);
  d.name = names.front();
  return d;
}

std::string missing(const std::vector<std::string>& names) {
  std::string s = "no file named";
  for (const auto& n : names) s += " '" + n + "'";
  return s + " in " + data_dir().string();
}

SplitSpec holdout(bool stratified, int runs = 20) {
  SplitSpec spec;
  spec.train_fraction = 0.25;
  spec.runs = runs;
  spec.stratified = stratified;
  spec.seed = 0;
  return spec;
}

Criterion ingestion() {
  Criterion c{1, "LIBSVM ingestion reproduces the published dataset sizes", {}};
  struct expected {
    std::vector<std::string> names;
    std::size_t n, d;
  };
  const std::vector<expected> table = {
      {{"australian"}, 690, 14},          {{"breast", "breast-cancer"}, 683, 10},
      {{"colon_cancer", "colon-cancer"}, 62, 2000}, {{"diabetes"}, 768, 8},
      {{"fourclass"}, 862, 2},            {{"heart"}, 270, 13},
      {{"ionosphere"}, 351, 34},          {{"ionosphere_scale"}, 351, 34},
      {{"liver", "liver-disorders"}, 345, 6},
  };
  for (const auto& e : table) {
    const auto path = find_dataset(e.names);
    if (!path) {
      c.add(Status::blocked, e.names.front() + ": " + missing(e.names));
      continue;
    }
    const auto d = load_libsvm(*path);
    c.check(d.size() == e.n && d.dimension == e.d, e.names.front() + ": " + std::to_string(d.size()) + "x" +
                                                       std::to_string(d.dimension) + " (expected " +
                                                       std::to_string(e.n) + "x" + std::to_string(e.d) + ")");
  }
  return c;
}

double opf_mean_accuracy(const Dataset& d, DistanceMetric metric) {
  const std::vector<MethodConfig> methods{method_from_tag("opf")};
  return run_benchmark(d, methods, holdout(false), metric).methods[0].accuracy.mean;
}

Criterion reproduction() {
  Criterion c{2, "naive OPF mean balanced accuracy within 4 points of the published values", {}};
  const auto t0 = std::chrono::steady_clock::now();
  struct row {
    std::vector<std::string> names;
    double published;
  };
  // breast: the raw file carries the sample code number as feature 1, which
  // swamps every distance; the [-1, 1]-scaled copy is used instead.
  const std::vector<row> rows = {{{"breast_scale", "breast-cancer_scale"}, 95.83},
                                 {{"ionosphere"}, 85.64},
                                 {{"heart", "heart_scale"}, 65.32},
                                 {{"liver", "liver-disorders"}, 61.00}};
  for (const auto& r : rows) {
    const auto d = load_named(r.names);
    if (!d) {
      c.add(Status::blocked, r.names.front() + ": " + missing(r.names));
      continue;
    }
    const double acc = 100.0 * opf_mean_accuracy(*d, DistanceMetric::euclidean);
    c.check(std::abs(acc - r.published) <= 4.0, r.names.front() + ": " + fixed(acc) + "% vs " + fixed(r.published) +
                                                    "% (euclidean, 20 unstratified 25/75 runs)");
    c.note(r.names.front() + " with manhattan distance: " +
           fixed(100.0 * opf_mean_accuracy(*d, DistanceMetric::manhattan)) + "%");
  }
  if (const auto raw = load_named({"breast", "breast-cancer"}))
    c.note("unscaled breast file (sample id as a feature): " +
           fixed(100.0 * opf_mean_accuracy(*raw, DistanceMetric::euclidean)) + "%");
  c.note("elapsed " + fixed(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
  return c;
}

Criterion tied_rows() {
  Criterion c{3, "P-OPF-NM not significantly different from OPF where published values tie", {}};
  const std::vector<MethodConfig> methods{method_from_tag("opf"), method_from_tag("popf-nm")};
  for (const auto& names : {std::vector<std::string>{"breast_scale", "breast-cancer_scale"},
                            std::vector<std::string>{"fourclass"}}) {
    const auto d = load_named(names);
    if (!d) {
      c.add(Status::blocked, names.front() + ": " + missing(names));
      continue;
    }
    const auto report = run_benchmark(*d, methods, holdout(false));
    const auto& other = report.methods[1 - report.top];
    const auto& w = *other.versus_top;
    c.check(!w.reject, names.front() + ": OPF " + fixed(100 * report.methods[0].accuracy.mean) + "%, P-OPF-NM " +
                           fixed(100 * report.methods[1].accuracy.mean) + "%, Wilcoxon p=" + fixed(w.p_value, 4) +
                           (w.no_decision ? " (" + w.note + ")" : ""));
  }
  return c;
}

Criterion calibration_cost() {
  Criterion c{4, "Nelder-Mead calibration faster than every swarm optimizer", {}};
  std::vector<Dataset> sets;
  for (const auto& names : {std::vector<std::string>{"breast_scale", "breast-cancer_scale"},
                            std::vector<std::string>{"ionosphere"}, std::vector<std::string>{"ionosphere_scale"},
                            std::vector<std::string>{"australian"}, std::vector<std::string>{"diabetes"},
                            std::vector<std::string>{"fourclass"}, std::vector<std::string>{"heart"},
                            std::vector<std::string>{"liver", "liver-disorders"},
                            std::vector<std::string>{"colon_cancer", "colon-cancer"}})
    if (auto d = load_named(names)) sets.push_back(std::move(*d));
  for (const char* preset : {"synthetic0", "synthetic2", "synthetic3"}) {
    auto d = generate_synthetic(synthetic_preset(preset));
    d.name = preset;
    sets.push_back(std::move(d));
  }
  const std::vector<MethodConfig> methods{method_from_tag("popf-nm"), method_from_tag("popf-pso"),
                                          method_from_tag("popf-ba"), method_from_tag("popf-ffa")};
  for (const auto& d : sets) {
    const auto report = run_benchmark(d, methods, holdout(false, 10));
    const double nm = report.methods[0].calibration_time.mean;
    double fastest_swarm = report.methods[1].calibration_time.mean;
    for (std::size_t k = 2; k < report.methods.size(); ++k)
      fastest_swarm = std::min(fastest_swarm, report.methods[k].calibration_time.mean);
    c.check(nm < fastest_swarm, d.name + ": NM " + sci(nm) + " s, fastest swarm " + sci(fastest_swarm) +
                                    " s (mean of 10 runs)");
  }
  return c;
}

Criterion numerics() {
  Criterion c{5, "overflow-safe objective and complement", {}};
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ab(-10.0, 10.0), unit(-1.0, 1.0), tgt(0.01, 0.99);
  double worst = 0.0;
  for (int inst = 0; inst < 10000; ++inst) {
    std::vector<double> s(8), t(8);
    std::vector<ScoredSample> scored;
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = unit(gen);
      t[i] = tgt(gen);
      scored.push_back({s[i], t[i]});
    }
    const double a = ab(gen), b = ab(gen);  // |q| <= 20
    const auto oracle = static_cast<double>(popf::testing::naive_nll(a, b, s, t));
    worst = std::max(worst, std::abs(objective(a, b, scored) - oracle));
  }
  c.check(worst <= 1e-9, "10^4 instances with |q| <= 20: max |objective - extended-precision oracle| = " + sci(worst));

  const std::vector<ScoredSample> one{{1.0, 0.75}};
  const double hi = objective(800.0, 0.0, one), lo = objective(-800.0, 0.0, one);
  const bool naive_overflows = !std::isfinite(popf::testing::naive_nll_double(800.0, 0.0, {1.0}, {0.75})) &&
                               !std::isfinite(popf::testing::naive_nll_double(-800.0, 0.0, {1.0}, {0.75}));
  c.check(std::isfinite(hi) && std::isfinite(lo) && std::abs(hi - 600.0) < 1e-9 && std::abs(lo - 200.0) < 1e-9,
          "q = +800 -> " + fixed(hi, 6) + ", q = -800 -> " + fixed(lo, 6) +
              (naive_overflows ? " (direct formula overflows at both)" : ""));

  const double naive_complement = 1.0 - sigmoid_probability(-64.0, 0.0, 1.0);
  const double complement = sigmoid_complement(-64.0, 0.0, 1.0);
  const double exact = std::exp(-64.0) / (1.0 + std::exp(-64.0));
  c.check(complement > 0.0 && std::abs(complement / exact - 1.0) < 1e-12,
          "(A,B) = (-64,0), f = 1: 1 - p = " + sci(complement) + " (subtraction gives " + sci(naive_complement) + ")");
  return c;
}

Criterion forest_oracles() {
  Criterion c{6, "OPF costs equal brute-force minimax paths; errorless training", {}};
  std::mt19937_64 gen(6);
  int cost_mismatch = 0, checked_errorless = 0, training_errors = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = popf::testing::random_dataset(gen, 2 + trial % 7, 2);
    const auto forest = train(d);
    if (forest.cost != popf::testing::brute_force_minimax(d, forest.is_prototype)) ++cost_mismatch;
    if (popf::testing::all_distances_distinct(d)) {
      ++checked_errorless;
      for (const auto& s : d.samples)
        if (classify(forest, s).label != s.label) ++training_errors;
    }
  }
  c.check(cost_mismatch == 0, "200 datasets of 2..8 samples: " + std::to_string(cost_mismatch) + " cost mismatches");
  c.check(training_errors == 0 && checked_errorless > 0,
          std::to_string(checked_errorless) + " datasets with distinct distances: " + std::to_string(training_errors) +
              " training-set misclassifications");
  return c;
}

std::vector<std::pair<std::string, std::vector<ScoredSample>>> calibration_landscapes() {
  std::vector<Dataset> sets;
  for (const auto& names : {std::vector<std::string>{"breast_scale", "breast-cancer_scale"},
                            std::vector<std::string>{"ionosphere"}, std::vector<std::string>{"ionosphere_scale"},
                            std::vector<std::string>{"diabetes"}})
    if (auto d = load_named(names)) sets.push_back(std::move(*d));
  for (const char* preset : {"synthetic0", "synthetic3"}) {
    auto d = generate_synthetic(synthetic_preset(preset));
    d.name = preset;
    sets.push_back(std::move(d));
  }
  std::vector<std::pair<std::string, std::vector<ScoredSample>>> out;
  for (auto& d : sets) {
    if (!d.label_map) d = to_binary(d, default_positive_label(d));
    const auto s = split(d, holdout(false, 1), 0);
    out.emplace_back(d.name, fitting_scores(train(s.train), s.train));
  }
  return out;
}

Criterion optimizers() {
  Criterion c{7, "optimizer suite", {}};
  const Objective sphere = [](double a, double b) { return (a - 1.0) * (a - 1.0) + (b + 2.0) * (b + 2.0); };
  OptimizerConfig nm;
  const auto r = minimize(sphere, nm);
  c.check(std::abs(r.point.a - 1.0) <= 1e-3 && std::abs(r.point.b + 2.0) <= 1e-3,
          "NM on shifted sphere: (" + fixed(r.point.a, 6) + ", " + fixed(r.point.b, 6) + "), value " + sci(r.value));

  const auto landscapes = calibration_landscapes();
  for (auto alg : {Algorithm::nelder_mead, Algorithm::pso, Algorithm::bat, Algorithm::firefly}) {
    OptimizerConfig cfg;
    cfg.algorithm = alg;
    cfg.seed = 1234;
    bool deterministic = true, contained = true;
    for (const auto& [name, scored] : landscapes) {
      const Objective f = [&](double a, double b) {
        contained = contained && cfg.box.contains({a, b});
        return objective(a, b, scored);
      };
      const auto r1 = minimize(f, cfg), r2 = minimize(f, cfg);
      deterministic = deterministic && r1.point == r2.point && r1.trace == r2.trace;
      contained = contained && cfg.box.contains(r1.point);
    }
    c.check(deterministic && contained, std::string(to_string(alg)) + ": repeat runs identical " +
                                            (deterministic ? "yes" : "NO") + ", every evaluation inside box " +
                                            (contained ? "yes" : "NO"));
  }
  for (const auto& [name, scored] : landscapes) {
    const Objective f = [&](double a, double b) { return objective(a, b, scored); };
    const auto grid = grid_evaluate(f, nm.box, 21);
    const auto best = minimize(f, nm);
    c.check(best.value <= grid.min() + 1e-6,
            name + ": NM " + fixed(best.value, 6) + " vs 21x21 grid minimum " + fixed(grid.min(), 6));
  }
  return c;
}

Criterion wilcoxon_fixtures() {
  Criterion c{8, "Wilcoxon p-values match reference fixtures to 1e-6", {}};
  std::ifstream in(std::string(POPF_TEST_DATA_DIR) + "/wilcoxon_fixtures.json");
  if (!in) {
    c.add(Status::fail, "fixture file missing");
    return c;
  }
  const auto doc = nlohmann::json::parse(in);
  double worst = 0.0;
  std::string worst_case;
  for (const auto& k : doc["cases"]) {
    const auto x = k["x"].get<std::vector<double>>(), y = k["y"].get<std::vector<double>>();
    const auto r = wilcoxon_signed_rank(x, y, 0.05, WilcoxonMethod::automatic, 1);
    const double err = std::abs(r.p_value - k["p_value"].get<double>());
    if (err >= worst) {
      worst = err;
      worst_case = k["name"];
    }
  }
  c.check(worst <= 1e-6, std::to_string(doc["cases"].size()) + " cases from " + doc["generator"].get<std::string>() +
                             ": max |dp| = " + sci(worst) + " (" + worst_case + ")");
  return c;
}

Criterion threshold_plateau() {
  Criterion c{9, "breast accuracy varies by under 5 points for thresholds in [0.4, 0.6]", {}};
  const std::vector<std::string> names{"breast_scale", "breast-cancer_scale"};
  auto d = load_named(names);
  if (!d) {
    c.add(Status::blocked, missing(names));
    return c;
  }
  *d = to_binary(*d, default_positive_label(*d));
  const auto grid = threshold_grid(0.4, 0.6, 21);
  const auto spec = holdout(false);
  double widest = 0.0;
  int widest_run = 0;
  for (int run = 0; run < spec.runs; ++run) {
    const auto s = split(*d, spec, run);
    const auto forest = train(s.train);
    const auto model = fit(forest, s.train, OptimizerConfig{}, run_seed(spec.seed, run));
    const auto rows = threshold_sweep(forest, model, s.test, grid);
    double lo = 1.0, hi = 0.0;
    for (const auto& row : rows) {
      lo = std::min(lo, row.accuracy);
      hi = std::max(hi, row.accuracy);
    }
    if (hi - lo >= widest) {
      widest = hi - lo;
      widest_run = run;
    }
  }
  c.check(widest < 0.05, "widest accuracy range over 20 fitted splits: " + fixed(100 * widest) + " points (run " +
                             std::to_string(widest_run) + ")");
  return c;
}

Criterion excluded() {
  Criterion c{10, "synthetic and energy dataset rows", {}};
  c.add(Status::excluded, "generators and data are not available; not attempted");
  return c;
}

}  // namespace

int main() {
  std::vector<Criterion (*)()> all = {ingestion, reproduction, tied_rows, calibration_cost, numerics,
                                      forest_oracles, optimizers, wilcoxon_fixtures, threshold_plateau, excluded};
  bool failed = false, blocked = false;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Criterion c{static_cast<int>(i + 1), "(aborted)", {}};
    try {
      c = all[i]();
    } catch (const std::exception& e) {
      c.add(Status::fail, std::string("exception: ") + e.what());
    }
    const auto s = c.overall();
    failed = failed || s == Status::fail;
    blocked = blocked || s == Status::blocked;
    std::cout << std::left << std::setw(11) << ("[" + std::string(label(s)) + "]") << std::setw(3) << c.id << c.title
              << '\n';
    for (const auto& p : c.parts) std::cout << "              " << std::setw(9) << label(p.status) << p.detail << '\n';
    std::cout.flush();
  }
  return failed ? 1 : blocked ? 77 : 0;
}
