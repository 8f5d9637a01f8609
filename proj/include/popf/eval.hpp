#pragma once

// Repeated-holdout evaluation: seeded (optionally stratified) splits,
// Wilcoxon signed-rank comparisons and benchmark report assembly.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "popf/calibration.hpp"
#include "popf/core.hpp"
#include "popf/opf.hpp"
#include "popf/optim.hpp"

namespace popf {

struct SplitSpec {
  double train_fraction = 0.25;
  int runs = 20;
  bool stratified = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw error(error_kind::invalid_input, "train fraction must lie in (0, 1)");
    if (runs <= 0) throw error(error_kind::invalid_input, "runs must be positive");
  }
};

inline std::uint64_t run_seed(std::uint64_t seed, int run_index) { return seed ^ static_cast<std::uint64_t>(run_index); }

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;

  // FNV-1a over both index lists; equal hashes mean identical partitions.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    };
    for (auto i : train_indices) mix(i);
    mix(~std::uint64_t{0});
    for (auto i : test_indices) mix(i);
    return h;
  }
};

/// Disjoint train/test partition for one run. Both index lists keep the
/// original dataset order.
inline Split split(const Dataset& dataset, const SplitSpec& spec, int run_index) {
  spec.validate();
  if (run_index < 0 || run_index >= spec.runs) throw error(error_kind::invalid_input, "run index out of range");
  const std::size_t n = dataset.size();
  if (n < 2) throw error(error_kind::invalid_input, "splitting needs at least 2 samples");
  Rng rng(run_seed(spec.seed, run_index));
  std::vector<bool> in_train(n, false);

  if (spec.stratified) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[dataset.samples[i].label].push_back(i);
    for (const auto& [label, members] : by_class)
      if (members.size() < 2)
        throw error(error_kind::degenerate_class,
                    "class " + std::to_string(label) + " has fewer than 2 samples; cannot stratify");

    const auto target = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    // Largest-remainder allocation of the train quota across classes.
    struct quota {
      int label;
      std::size_t take;
      double remainder;
    };
    std::vector<quota> quotas;
    std::size_t assigned = 0;
    for (const auto& [label, members] : by_class) {
      const double exact = spec.train_fraction * static_cast<double>(members.size());
      const auto base = static_cast<std::size_t>(std::floor(exact));
      quotas.push_back({label, base, exact - static_cast<double>(base)});
      assigned += base;
    }
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
    for (std::size_t k = 0; assigned < target && k < order.size(); ++k, ++assigned) ++quotas[order[k]].take;
    for (auto& q : quotas) {
      const auto size = by_class[q.label].size();
      q.take = std::clamp<std::size_t>(q.take, 1, size - 1);
    }
    for (const auto& q : quotas) {
      auto members = by_class[q.label];
      rng.shuffle(members);
      for (std::size_t k = 0; k < q.take; ++k) in_train[members[k]] = true;
    }
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    rng.shuffle(all);
    auto take = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    take = std::clamp<std::size_t>(take, 1, n - 1);
    for (std::size_t k = 0; k < take; ++k) in_train[all[k]] = true;
  }

  Split out;
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? out.train_indices : out.test_indices).push_back(i);
  out.train = dataset.subset(out.train_indices);
  out.test = dataset.subset(out.test_indices);
  return out;
}

enum class WilcoxonMethod { automatic, exact, normal };

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double p_value = 1.0;
  bool reject = false;
  // Set when the test cannot decide (no or too few non-zero differences).
  bool no_decision = false;
  bool exact = false;
  std::size_t n = 0;  // non-zero differences
  std::string note;
};

namespace detail {

// P(W+ = k) counts for untied ranks 1..n.
inline std::vector<double> signed_rank_counts(std::size_t n) {
  const std::size_t max_sum = n * (n + 1) / 2;
  std::vector<double> counts(max_sum + 1, 0.0);
  counts[0] = 1.0;
  for (std::size_t r = 1; r <= n; ++r)
    for (std::size_t k = max_sum; k >= r; --k) counts[k] += counts[k - r];
  return counts;
}

}  // namespace detail

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped and tied magnitudes share average ranks. With fewer than 10
/// non-zero differences (or WilcoxonMethod::exact) the exact null
/// distribution is used; otherwise the normal approximation with tie
/// corrected variance and continuity correction.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, double alpha = 0.05,
                                           WilcoxonMethod method = WilcoxonMethod::automatic,
                                           std::size_t min_pairs = 5) {
  if (x.size() != y.size() || x.empty())
    throw error(error_kind::invalid_input, "paired samples must be non-empty and of equal length");

  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (const double v = x[i] - y[i]; v != 0.0) d.push_back(v);

  WilcoxonResult res;
  res.n = d.size();
  if (d.empty()) {
    res.no_decision = true;
    res.note = "all differences are zero";
    return res;
  }

  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> rank(d.size());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && std::abs(d[idx[j + 1]]) == std::abs(d[idx[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    const auto t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? w_plus : w_minus) += rank[i];
  res.w_plus = w_plus;
  res.statistic = std::min(w_plus, w_minus);

  const auto n = static_cast<double>(d.size());
  const bool use_exact = method == WilcoxonMethod::exact || (method == WilcoxonMethod::automatic && d.size() < 10);
  if (use_exact) {
    res.exact = true;
    const auto counts = detail::signed_rank_counts(d.size());
    const double total = std::ldexp(1.0, static_cast<int>(d.size()));
    // Tied ranks can make W+ non-integral: round conservatively on each tail.
    const auto lo = static_cast<std::size_t>(std::ceil(w_plus));
    const auto hi = static_cast<std::size_t>(std::floor(w_plus));
    double cdf = 0.0, sf = 0.0;
    for (std::size_t k = 0; k <= lo && k < counts.size(); ++k) cdf += counts[k];
    for (std::size_t k = hi; k < counts.size(); ++k) sf += counts[k];
    res.p_value = std::min(1.0, 2.0 * std::min(cdf, sf) / total);
  } else {
    const double mean = n * (n + 1.0) / 4.0;
    const double se = std::sqrt((n * (n + 1.0) * (2.0 * n + 1.0) - tie_term / 2.0) / 24.0);
    double z = (w_plus - mean) / se;
    if (z > 0) z -= 0.5 / se;
    else if (z < 0) z += 0.5 / se;
    res.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  }

  if (d.size() < min_pairs) {
    res.no_decision = true;
    res.note = "fewer than " + std::to_string(min_pairs) + " non-zero differences";
    return res;
  }
  res.reject = res.p_value < alpha;
  return res;
}

enum class MethodKind { opf, popf };

struct MethodConfig {
  std::string name;
  MethodKind kind = MethodKind::opf;
  OptimizerConfig optimizer{};
  FitOptions fit{};
  double theta = 0.5;
};

/// "opf", "popf-nm", "popf-pso", "popf-ba" or "popf-ffa" with default settings.
inline MethodConfig method_from_tag(std::string_view tag) {
  if (tag == "opf") return {"OPF", MethodKind::opf};
  constexpr std::string_view prefix = "popf-";
  if (tag.starts_with(prefix)) {
    MethodConfig m;
    m.kind = MethodKind::popf;
    m.optimizer.algorithm = parse_algorithm(tag.substr(prefix.size()));
    std::string suffix(tag.substr(prefix.size()));
    std::transform(suffix.begin(), suffix.end(), suffix.begin(), [](unsigned char c) { return std::toupper(c); });
    m.name = "P-OPF-" + suffix;
    return m;
  }
  throw error(error_kind::invalid_input, "unknown method '" + std::string(tag) + "'");
}

struct RunRecord {
  int run_index = 0;
  std::size_t method_index = 0;
  std::string method;
  double accuracy = 0.0;
  double train_time_s = 0.0;        // forest + calibration
  double calibration_time_s = 0.0;  // calibration only
  double test_time_s = 0.0;
  std::uint64_t split_hash = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

struct MethodSummary {
  std::string name;
  MeanStd accuracy;
  MeanStd train_time;
  MeanStd calibration_time;
  MeanStd test_time;
  std::optional<WilcoxonResult> versus_top;
  bool best = false;
};

struct BenchmarkReport {
  std::string dataset;
  SplitSpec spec;
  std::vector<RunRecord> records;
  std::vector<MethodSummary> methods;
  std::size_t top = 0;
  bool wilcoxon_skipped = false;
  std::string notice;

  std::vector<double> accuracies(std::size_t method_index) const {
    std::vector<double> out;
    for (const auto& r : records)
      if (r.method_index == method_index) out.push_back(r.accuracy);
    return out;
  }

  void write_runs_csv(std::ostream& os) const {
    os << "run,method,accuracy,train_time_s,calibration_time_s,test_time_s,split_hash\n";
    const auto old = os.precision(17);
    for (const auto& r : records)
      os << r.run_index << ',' << r.method << ',' << r.accuracy << ',' << r.train_time_s << ','
         << r.calibration_time_s << ',' << r.test_time_s << ',' << std::hex << r.split_hash << std::dec << '\n';
    os.precision(old);
  }

  void write_summary_csv(std::ostream& os) const {
    os << "dataset,method,accuracy_mean,accuracy_std,train_time_mean,train_time_std,calibration_time_mean,"
          "test_time_mean,p_value_vs_top,best\n";
    const auto old = os.precision(10);
    for (const auto& m : methods) {
      os << dataset << ',' << m.name << ',' << m.accuracy.mean << ',' << m.accuracy.std << ',' << m.train_time.mean
         << ',' << m.train_time.std << ',' << m.calibration_time.mean << ',' << m.test_time.mean << ',';
      if (m.versus_top) os << m.versus_top->p_value;
      os << ',' << (m.best ? 1 : 0) << '\n';
    }
    os.precision(old);
  }

  /// Accuracy (%) and time (s) tables; '*' marks methods not significantly
  /// worse than the top mean.
  void write_summary_table(std::ostream& os) const {
    std::ostringstream out;
    out << std::fixed;
    out << "dataset: " << dataset << "  (repeated holdout: " << spec.runs << " runs, train fraction "
        << std::setprecision(2) << spec.train_fraction << (spec.stratified ? ", stratified" : ", unstratified")
        << ")\n";
    if (!notice.empty()) out << "note: " << notice << '\n';
    out << '\n' << std::left << std::setw(14) << "method" << std::setw(18) << "accuracy (%)" << std::setw(18)
        << "train (s)" << std::setw(18) << "calibration (s)" << std::setw(18) << "test (s)" << "p vs top\n";
    for (const auto& m : methods) {
      auto pm = [](double mean, double sd, int prec) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(prec) << mean << "+-" << sd;
        return s.str();
      };
      out << std::setw(14) << m.name
          << std::setw(18) << (pm(100.0 * m.accuracy.mean, 100.0 * m.accuracy.std, 2) + (m.best ? " *" : ""))
          << std::setw(18) << pm(m.train_time.mean, m.train_time.std, 4) << std::setw(18)
          << pm(m.calibration_time.mean, m.calibration_time.std, 4) << std::setw(18)
          << pm(m.test_time.mean, m.test_time.std, 4);
      if (m.versus_top) out << std::setprecision(4) << m.versus_top->p_value;
      else out << "-";
      out << '\n';
    }
    os << out.str();
  }
};

/// Per-method means, standard deviations and Wilcoxon marks from `records`.
inline void summarize(BenchmarkReport& report, std::span<const MethodConfig> methods, double alpha = 0.05) {
  report.methods.clear();
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const auto& m = methods[k];
    std::vector<double> acc, tr, cal, te;
    for (const auto& r : report.records) {
      if (r.method_index != k) continue;
      acc.push_back(r.accuracy);
      tr.push_back(r.train_time_s);
      cal.push_back(r.calibration_time_s);
      te.push_back(r.test_time_s);
    }
    report.methods.push_back({m.name, mean_std(acc), mean_std(tr), mean_std(cal), mean_std(te), std::nullopt, false});
  }
  if (report.methods.empty()) return;
  std::size_t top = 0;
  for (std::size_t i = 1; i < report.methods.size(); ++i)
    if (report.methods[i].accuracy.mean > report.methods[top].accuracy.mean) top = i;
  report.top = top;

  constexpr int min_runs = 5;
  report.wilcoxon_skipped = report.spec.runs < min_runs;
  if (report.wilcoxon_skipped)
    report.notice = "Wilcoxon test skipped: " + std::to_string(report.spec.runs) + " run(s), need at least " +
                    std::to_string(min_runs);

  const auto top_acc = report.accuracies(top);
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    auto& m = report.methods[i];
    if (i == top) {
      m.best = true;
      continue;
    }
    if (report.wilcoxon_skipped) {
      m.best = m.accuracy.mean == report.methods[top].accuracy.mean;
      continue;
    }
    const auto acc = report.accuracies(i);
    m.versus_top = wilcoxon_signed_rank(top_acc, acc, alpha);
    m.best = !m.versus_top->reject;
  }
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline RunRecord evaluate_method(const MethodConfig& method, std::size_t method_index, const Split& s, int run,
                                 std::uint64_t optimizer_seed, DistanceMetric metric) {
  using clock = std::chrono::steady_clock;
  RunRecord rec;
  rec.run_index = run;
  rec.method_index = method_index;
  rec.method = method.name;
  rec.split_hash = s.hash();

  auto t0 = clock::now();
  const auto forest = train(s.train, metric);
  std::optional<CalibrationModel> model;
  if (method.kind == MethodKind::popf) {
    const auto tc = clock::now();
    model = fit(forest, s.train, method.optimizer, optimizer_seed, method.fit);
    model->theta = method.theta;
    rec.calibration_time_s = seconds_since(tc);
  }
  rec.train_time_s = seconds_since(t0);

  t0 = clock::now();
  std::vector<int> predicted;
  predicted.reserve(s.test.size());
  for (const auto& t : s.test.samples) {
    if (model) {
      const auto p = predict_proba(forest, *model, t);
      predicted.push_back(forest.label_map->from_binary(decide(p.probability, model->theta)));
    } else {
      predicted.push_back(classify(forest, t, ClassifyMode::early_stop).label);
    }
  }
  rec.test_time_s = seconds_since(t0);
  const auto truth = s.test.labels();
  rec.accuracy = balanced_accuracy(truth, predicted);
  return rec;
}

}  // namespace detail

/// Runs every method on the same split per run and assembles the report.
/// Any failure aborts the whole benchmark.
inline BenchmarkReport run_benchmark(const Dataset& dataset, std::span<const MethodConfig> methods,
                                     const SplitSpec& spec, DistanceMetric metric = DistanceMetric::euclidean) {
  spec.validate();
  if (methods.empty()) throw error(error_kind::invalid_input, "no methods to benchmark");
  const bool needs_binary =
      std::any_of(methods.begin(), methods.end(), [](const MethodConfig& m) { return m.kind == MethodKind::popf; });
  Dataset data = dataset;
  if (needs_binary && !data.label_map) data = to_binary(std::move(data), default_positive_label(data));

  BenchmarkReport report;
  report.dataset = dataset.name;
  report.spec = spec;
  for (int run = 0; run < spec.runs; ++run) {
    const auto s = split(data, spec, run);
    const auto opt_seed = run_seed(spec.seed, run) ^ 0x9e3779b97f4a7c15ULL;
    for (std::size_t k = 0; k < methods.size(); ++k)
      report.records.push_back(detail::evaluate_method(methods[k], k, s, run, opt_seed, metric));
  }
  summarize(report, methods);
  return report;
}

}  // namespace popf
