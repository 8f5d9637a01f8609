#pragma once

// Command-line front end. run_cli() takes the arguments (without the
// program name) and two streams so tests can drive it in-process.
//
// exit codes: 0 ok, 1 usage, 2 data error, 3 runtime failure

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "popf/popf.hpp"

namespace popf::cli {

enum exit_code : int { ok = 0, usage = 1, data_error = 2, runtime_failure = 3 };

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int exit_code_for(error_kind k) {
  switch (k) {
    case error_kind::optimization_error: return runtime_failure;
    default: return data_error;
  }
}

struct DataOptions {
  std::string path;
  std::string format = "auto";
  int label_column = -1;
  bool header = false;
};

inline void add_data_options(CLI::App* cmd, DataOptions& d, bool required = true) {
  auto* opt = cmd->add_option("--data", d.path, "dataset file (LIBSVM or CSV) or synthetic0/2/3");
  if (required) opt->required();
  cmd->add_option("--format", d.format, "input format")->check(CLI::IsMember({"auto", "libsvm", "csv"}));
  cmd->add_option("--label-column", d.label_column, "CSV label column; negative counts from the end");
  cmd->add_flag("--header", d.header, "CSV file has a header row");
}

inline Dataset load_dataset(const DataOptions& o) {
  namespace fs = std::filesystem;
  const fs::path p(o.path);
  if (!fs::exists(p) && p.parent_path().empty() && o.path.starts_with("synthetic")) {
    auto d = generate_synthetic(synthetic_preset(o.path));
    d.name = o.path;
    return d;
  }
  std::string fmt = o.format;
  if (fmt == "auto") fmt = p.extension() == ".csv" ? "csv" : "libsvm";
  auto d = fmt == "csv" ? load_csv(p, {o.label_column, o.header}) : load_libsvm(p);
  d.name = p.stem().string();
  return d;
}

// Applies the model's label mapping to data read for prediction.
inline Dataset with_model_labels(Dataset d, const TrainedForest& forest) {
  if (d.dimension != forest.dimension)
    throw error(error_kind::invalid_input, "data has " + std::to_string(d.dimension) + " features, model expects " +
                                               std::to_string(forest.dimension));
  if (!forest.label_map) return d;
  for (auto& s : d.samples) s.binary_label = forest.label_map->to_binary(s.label);
  d.label_map = forest.label_map;
  return d;
}

inline std::uint64_t default_seed() {
  const char* env = std::getenv("POPF_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used, 0);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw usage_error("POPF_SEED must be an unsigned integer, got '" + std::string(env) + "'");
  }
}

// Writes to `path`, or to `out` when the path is empty or "-".
template <typename F>
void emit(const std::string& path, std::ostream& out, F&& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw error(error_kind::load_error, "cannot write '" + path + "'");
  write(f);
}

struct OptimizerOptions {
  std::string name = "nm";
  int agents = 20;
  int iterations = 400;
};

inline void add_optimizer_options(CLI::App* cmd, OptimizerOptions& o) {
  cmd->add_option("--optimizer", o.name, "calibration optimizer")->check(CLI::IsMember({"nm", "pso", "ba", "ffa"}));
  cmd->add_option("--agents", o.agents, "swarm size")->check(CLI::PositiveNumber);
  cmd->add_option("--iterations", o.iterations, "swarm iterations")->check(CLI::PositiveNumber);
}

inline OptimizerConfig make_optimizer(const OptimizerOptions& o) {
  OptimizerConfig c;
  c.algorithm = parse_algorithm(o.name);
  c.agents = o.agents;
  c.iterations = o.iterations;
  return c;
}

inline Dataset binarize(Dataset d, std::optional<int> positive) {
  if (d.label_map && !positive) return d;
  return to_binary(std::move(d), positive.value_or(default_positive_label(d)));
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimum-path forest classifier with probabilistic calibration", "popf"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_flag;

  // train
  auto* train_cmd = app.add_subcommand("train", "train a forest, optionally calibrate, save the model");
  DataOptions train_data;
  std::string train_metric = "euclidean", train_out, score_source = "train";
  bool calibrate = false;
  std::optional<int> train_positive;
  double train_theta = 0.5;
  OptimizerOptions train_opt;
  add_data_options(train_cmd, train_data);
  train_cmd->add_option("--metric", train_metric)->check(CLI::IsMember({"euclidean", "squared_euclidean", "manhattan"}));
  train_cmd->add_option("--out", train_out, "model JSON path")->required();
  train_cmd->add_flag("--calibrate", calibrate, "fit the sigmoid on training scores");
  add_optimizer_options(train_cmd, train_opt);
  train_cmd->add_option("--positive-label", train_positive, "original label mapped to +1");
  train_cmd->add_option("--theta", train_theta, "decision threshold stored in the model")->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--scores", score_source, "calibration scores: training costs or cross-validated costs")
      ->check(CLI::IsMember({"train", "cv"}));
  train_cmd->add_option("--seed", seed_flag);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "classify a dataset with a saved model");
  std::string predict_model;
  DataOptions predict_data;
  bool proba = false;
  std::optional<double> predict_theta;
  predict_cmd->add_option("--model", predict_model)->required();
  add_data_options(predict_cmd, predict_data);
  predict_cmd->add_flag("--proba", proba, "add probability and cost columns");
  predict_cmd->add_option("--theta", predict_theta, "override the model threshold")->check(CLI::Range(0.0, 1.0));

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "repeated holdout comparison of methods");
  DataOptions bench_data;
  std::string methods_arg = "opf,popf-nm", bench_metric = "euclidean", out_dir;
  int runs = 20;
  double train_frac = 0.25;
  bool unstratified = false, timed = false;
  std::optional<int> bench_positive;
  add_data_options(bench_cmd, bench_data);
  bench_cmd->add_option("--methods", methods_arg, "comma-separated: opf, popf-nm, popf-pso, popf-ba, popf-ffa");
  bench_cmd->add_option("--runs", runs)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--train-frac", train_frac)->check(CLI::Range(0.0, 1.0));
  bench_cmd->add_flag("--unstratified", unstratified, "plain random splits instead of per-class quotas");
  bench_cmd->add_flag("--timed", timed, "sequential runs (always the case in this build)");
  bench_cmd->add_option("--metric", bench_metric)->check(CLI::IsMember({"euclidean", "squared_euclidean", "manhattan"}));
  bench_cmd->add_option("--positive-label", bench_positive);
  bench_cmd->add_option("--out-dir", out_dir, "directory for runs.csv, summary.csv and summary.txt");
  bench_cmd->add_option("--seed", seed_flag);

  // landscape
  auto* land_cmd = app.add_subcommand("landscape", "objective values over the default search box");
  DataOptions land_data;
  std::size_t steps = 21;
  std::string land_out;
  std::optional<int> land_positive;
  double land_frac = 0.25;
  add_data_options(land_cmd, land_data);
  land_cmd->add_option("--steps", steps, "lattice points per axis")->check(CLI::Range(2, 100000));
  land_cmd->add_option("--out", land_out, "CSV path (stdout when omitted)");
  land_cmd->add_option("--train-frac", land_frac)->check(CLI::Range(0.0, 1.0));
  land_cmd->add_option("--positive-label", land_positive);
  land_cmd->add_option("--seed", seed_flag);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "balanced accuracy across decision thresholds");
  std::string sweep_model;
  DataOptions sweep_data;
  double grid_start = 0.0, grid_end = 1.0;
  std::size_t grid_steps = 101;
  sweep_cmd->add_option("--model", sweep_model)->required();
  add_data_options(sweep_cmd, sweep_data);
  sweep_cmd->add_option("--grid-start", grid_start)->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--grid-end", grid_end)->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--grid-steps", grid_steps)->check(CLI::PositiveNumber);

  // gen-synthetic
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "write a two-blob Gaussian dataset as CSV");
  SyntheticSpec synth;
  std::string gen_out, preset;
  gen_cmd->add_option("--n", synth.n_samples, "sample count (even)");
  gen_cmd->add_option("--d", synth.n_features, "feature count");
  gen_cmd->add_option("--separation", synth.class_separation);
  gen_cmd->add_option("--preset", preset)->check(CLI::IsMember({"synthetic0", "synthetic2", "synthetic3"}));
  gen_cmd->add_option("--out", gen_out, "CSV path (stdout when omitted)");
  gen_cmd->add_option("--seed", seed_flag);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const auto sub = app.get_subcommands();
    err << (sub.empty() ? app.help() : sub.front()->help());
    return usage;
  }

  try {
    const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();

    if (train_cmd->parsed()) {
      auto d = load_dataset(train_data);
      const auto metric = parse_metric(train_metric);
      if (calibrate || train_positive) d = binarize(std::move(d), train_positive);
      ModelDocument doc{train(d, metric), std::nullopt};
      err << "trained on " << d.size() << " samples, " << d.dimension << " features, "
          << doc.forest.prototype_count() << " prototypes\n";
      if (calibrate) {
        const FitOptions fo{score_source == "cv" ? ScoreSource::cross_validated : ScoreSource::training_costs, 3};
        auto model = fit(doc.forest, d, make_optimizer(train_opt), seed, fo);
        model.theta = train_theta;
        for (const auto& note : model.diagnostics) err << "warning: " << note << '\n';
        err << "calibrated with " << model.optimizer_used << ": A=" << model.a << " B=" << model.b
            << " NLL=" << model.final_nll << '\n';
        doc.calibration = std::move(model);
      }
      emit(train_out, out, [&](std::ostream& os) { os << model_to_string(doc); });
      return ok;
    }

    if (predict_cmd->parsed()) {
      const auto doc = load_model(predict_model);
      if ((proba || predict_theta) && !doc.calibration)
        throw error(error_kind::invalid_input, "--proba and --theta need a calibrated model");
      const auto d = with_model_labels(load_dataset(predict_data), doc.forest);
      std::ostringstream buf;
      buf.precision(17);
      buf << (proba ? "index,label,probability,cost\n" : "index,label\n");
      for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& s = d.samples[i];
        if (doc.calibration) {
          const double theta = predict_theta.value_or(doc.calibration->theta);
          const auto p = predict_proba(doc.forest, *doc.calibration, s);
          buf << i << ',' << doc.forest.label_map->from_binary(decide(p.probability, theta));
          if (proba) buf << ',' << p.probability << ',' << p.prediction.cost;
        } else {
          buf << i << ',' << classify(doc.forest, s).label;
        }
        buf << '\n';
      }
      out << buf.str();
      return ok;
    }

    if (bench_cmd->parsed()) {
      auto d = load_dataset(bench_data);
      std::vector<MethodConfig> methods;
      std::stringstream list(methods_arg);
      for (std::string tag; std::getline(list, tag, ',');) {
        try {
          methods.push_back(method_from_tag(tag));
        } catch (const error& e) {
          throw usage_error(e.what());
        }
      }
      if (methods.empty()) throw usage_error("--methods is empty");
      const bool any_popf =
          std::any_of(methods.begin(), methods.end(), [](const auto& m) { return m.kind == MethodKind::popf; });
      if (any_popf || bench_positive) d = binarize(std::move(d), bench_positive);
      SplitSpec spec;
      spec.train_fraction = train_frac;
      spec.runs = runs;
      spec.stratified = !unstratified;
      spec.seed = seed;
      const auto report = run_benchmark(d, methods, spec, parse_metric(bench_metric));
      for (int r = 0; r < runs; ++r) {
        std::uint64_t h = 0;
        bool same = true;
        for (const auto& rec : report.records) {
          if (rec.run_index != r) continue;
          if (rec.method_index == 0) h = rec.split_hash;
          else same = same && rec.split_hash == h;
        }
        err << "run " << r << " split " << std::hex << h << std::dec << (same ? " shared by all methods" : " MISMATCH")
            << '\n';
      }
      if (!report.notice.empty()) err << "note: " << report.notice << '\n';
      report.write_summary_table(err);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);
        emit((dir / "runs.csv").string(), out, [&](std::ostream& os) { report.write_runs_csv(os); });
        emit((dir / "summary.csv").string(), out, [&](std::ostream& os) { report.write_summary_csv(os); });
        emit((dir / "summary.txt").string(), out, [&](std::ostream& os) { report.write_summary_table(os); });
      }
      report.write_summary_csv(out);
      return ok;
    }

    if (land_cmd->parsed()) {
      const auto d = binarize(load_dataset(land_data), land_positive);
      SplitSpec spec;
      spec.train_fraction = land_frac;
      spec.runs = 1;
      spec.seed = seed;
      const auto s = split(d, spec, 0);
      const auto forest = train(s.train);
      const auto scored = fitting_scores(forest, s.train);
      const Objective f = [&scored](double a, double b) { return objective(a, b, scored); };
      OptimizerConfig cfg;
      const auto grid = grid_evaluate(f, cfg.box, steps);
      const auto nm = minimize(f, cfg);
      const auto [i, j] = grid.argmin();
      err << "grid minimum " << grid.min() << " at A=" << grid.a_values[i] << " B=" << grid.b_values[j] << "\n";
      err << "Nelder-Mead " << nm.value << " at A=" << nm.point.a << " B=" << nm.point.b << "\n";
      emit(land_out, out, [&](std::ostream& os) { grid.write_csv(os); });
      return ok;
    }

    if (sweep_cmd->parsed()) {
      const auto doc = load_model(sweep_model);
      if (!doc.calibration) throw error(error_kind::invalid_input, "sweep needs a calibrated model");
      if (grid_end < grid_start) throw usage_error("--grid-end must not be below --grid-start");
      const auto d = with_model_labels(load_dataset(sweep_data), doc.forest);
      const auto grid = threshold_grid(grid_start, grid_end, grid_steps);
      const auto rows = threshold_sweep(doc.forest, *doc.calibration, d, grid);
      std::ostringstream buf;
      buf.precision(17);
      buf << "theta,accuracy\n";
      for (const auto& r : rows) buf << r.theta << ',' << r.accuracy << '\n';
      out << buf.str();
      return ok;
    }

    if (gen_cmd->parsed()) {
      if (!preset.empty()) {
        const auto p = synthetic_preset(preset);
        synth.n_samples = p.n_samples;
        synth.n_features = p.n_features;
        synth.class_separation = p.class_separation;
        synth.seed = seed_flag ? *seed_flag : p.seed;
      } else {
        synth.seed = seed;
      }
      const auto d = generate_synthetic(synth);
      emit(gen_out, out, [&](std::ostream& os) { write_csv(d, os); });
      return ok;
    }
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_failure;
  }
  return usage;
}

}  // namespace popf::cli
