#pragma once

// Dataset ingestion (LIBSVM sparse text, CSV), the synthetic Gaussian-blob
// generator and the JSON model document.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "popf/calibration.hpp"
#include "popf/core.hpp"
#include "popf/opf.hpp"

namespace popf {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Labels are integers; integral-valued decimals such as "2.000000" are accepted.
inline std::optional<int> parse_label(std::string_view s) {
  const auto v = parse_double(s);
  if (!v || *v != std::floor(*v) || std::abs(*v) > 2147483647.0) return std::nullopt;
  return static_cast<int>(*v);
}

[[noreturn]] inline void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw error(error_kind::parse_error, source + ":" + std::to_string(line) + ": " + what);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw error(error_kind::load_error, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace detail

/// Parses "label idx:val idx:val ..." lines with 1-based, strictly
/// ascending indices. The dimension is the largest index in the whole
/// input; absent entries are 0.
inline Dataset parse_libsvm(std::istream& in, const std::string& name = "libsvm") {
  struct sparse_row {
    int label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<sparse_row> rows;
  std::size_t dimension = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;

    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < view.size()) {
      const auto start = view.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      const auto end = view.find_first_of(" \t", start);
      tokens.push_back(view.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
      pos = end == std::string_view::npos ? view.size() : end;
    }

    const auto label = detail::parse_label(tokens[0]);
    if (!label) detail::parse_fail(name, line_no, "label '" + std::string(tokens[0]) + "' is not an integer");
    sparse_row row{*label, {}};
    std::size_t last = 0;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto colon = tokens[k].find(':');
      if (colon == std::string_view::npos)
        detail::parse_fail(name, line_no, "expected index:value, got '" + std::string(tokens[k]) + "'");
      const auto idx_text = tokens[k].substr(0, colon);
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
      if (ec != std::errc{} || ptr != idx_text.data() + idx_text.size() || idx == 0)
        detail::parse_fail(name, line_no, "bad feature index '" + std::string(idx_text) + "'");
      if (idx <= last) detail::parse_fail(name, line_no, "feature indices must be strictly ascending");
      const auto value = detail::parse_double(tokens[k].substr(colon + 1));
      if (!value) detail::parse_fail(name, line_no, "bad feature value in '" + std::string(tokens[k]) + "'");
      row.entries.emplace_back(idx, *value);
      last = idx;
    }
    dimension = std::max(dimension, last);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw error(error_kind::parse_error, name + ": no samples");
  if (dimension == 0) dimension = 1;

  Dataset d;
  d.name = name;
  d.dimension = dimension;
  d.samples.reserve(rows.size());
  for (auto& r : rows) {
    Sample s{std::vector<double>(dimension, 0.0), r.label, 0};
    for (const auto& [idx, v] : r.entries) s.features[idx - 1] = v;
    d.samples.push_back(std::move(s));
  }
  return d;
}

inline Dataset load_libsvm(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_libsvm(in, path.filename().string());
}

struct CsvOptions {
  // Column holding the class label; negative counts from the end (-1 = last).
  int label_column = -1;
  bool has_header = false;
};

inline Dataset parse_csv(std::istream& in, const CsvOptions& options = {}, const std::string& name = "csv") {
  Dataset d;
  d.name = name;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool header_pending = options.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
      const auto comma = view.find(',', pos);
      cells.push_back(view.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (columns == 0) {
      columns = cells.size();
      if (columns < 2) detail::parse_fail(name, line_no, "need at least one feature column and a label column");
    } else if (cells.size() != columns) {
      detail::parse_fail(name, line_no,
                         "expected " + std::to_string(columns) + " columns, found " + std::to_string(cells.size()));
    }
    const int lc = options.label_column < 0 ? static_cast<int>(columns) + options.label_column : options.label_column;
    if (lc < 0 || lc >= static_cast<int>(columns))
      detail::parse_fail(name, line_no, "label column " + std::to_string(options.label_column) + " out of range");

    Sample s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<int>(c) == lc) {
        const auto label = detail::parse_label(cells[c]);
        if (!label) detail::parse_fail(name, line_no, "label '" + std::string(cells[c]) + "' is not an integer");
        s.label = *label;
      } else {
        const auto v = detail::parse_double(cells[c]);
        if (!v) detail::parse_fail(name, line_no, "non-numeric value '" + std::string(detail::trim(cells[c])) + "'");
        s.features.push_back(*v);
      }
    }
    d.samples.push_back(std::move(s));
  }
  if (d.samples.empty()) throw error(error_kind::parse_error, name + ": no samples");
  d.dimension = columns - 1;
  return d;
}

inline Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {}) {
  auto in = detail::open_input(path);
  return parse_csv(in, options, path.filename().string());
}

/// Features first, label last; doubles written with round-trip precision.
inline void write_csv(const Dataset& d, std::ostream& os) {
  const auto old = os.precision(17);
  for (const auto& s : d.samples) {
    for (double v : s.features) os << v << ',';
    os << s.label << '\n';
  }
  os.precision(old);
}

struct SyntheticSpec {
  std::size_t n_samples = 200;
  std::size_t n_features = 2;
  double class_separation = 1.0;
  std::uint64_t seed = 0;
};

// Stand-ins for the synthetic benchmark sets: sizes only; the original
// generators are unknown.
inline SyntheticSpec synthetic_preset(std::string_view name) {
  if (name == "synthetic0") return {500, 2, 1.0, 0};
  if (name == "synthetic2") return {1000, 2, 1.0, 2};
  if (name == "synthetic3") return {200, 2, 1.0, 3};
  throw error(error_kind::invalid_input, "unknown synthetic preset '" + std::string(name) + "'");
}

/// Two equal-sized unit-variance Gaussian blobs centred at
/// +-(separation / 2) on every axis, labels +1 and -1, interleaved.
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_samples == 0 || spec.n_samples % 2 != 0)
    throw error(error_kind::invalid_input, "synthetic sample count must be even and positive");
  if (spec.n_features == 0) throw error(error_kind::invalid_input, "synthetic feature count must be positive");
  Rng rng(spec.seed);
  Dataset d;
  d.name = "synthetic";
  d.dimension = spec.n_features;
  d.label_map = LabelMap{1, -1};
  d.samples.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const int y = i % 2 == 0 ? 1 : -1;
    Sample s{std::vector<double>(spec.n_features), y, y};
    for (auto& v : s.features) v = y * spec.class_separation / 2.0 + rng.normal();
    d.samples.push_back(std::move(s));
  }
  return d;
}

inline constexpr int model_format_version = 1;

struct ModelDocument {
  TrainedForest forest;
  std::optional<CalibrationModel> calibration;
};

inline nlohmann::json to_json(const ModelDocument& doc) {
  using nlohmann::json;
  const auto& f = doc.forest;
  json features = json::array();
  json labels = json::array();
  for (const auto& s : f.training_samples) {
    features.push_back(s.features);
    labels.push_back(s.label);
  }
  json forest = {
      {"dimension", f.dimension},
      {"features", std::move(features)},
      {"labels", std::move(labels)},
      {"cost", f.cost},
      {"assigned_label", f.assigned_label},
      {"is_prototype", f.is_prototype},
  };
  json j = {
      {"format_version", model_format_version},
      {"metric", std::string(to_string(f.metric))},
      {"forest", std::move(forest)},
      {"label_map", nullptr},
  };
  if (f.label_map) j["label_map"] = {{"positive", f.label_map->positive_label}, {"negative", f.label_map->negative_label}};
  if (doc.calibration) {
    const auto& c = *doc.calibration;
    j["calibration"] = {{"A", c.a},
                        {"B", c.b},
                        {"theta", c.theta},
                        {"final_nll", c.final_nll},
                        {"optimizer", c.optimizer_used},
                        {"evaluations", c.evaluations},
                        {"diagnostics", c.diagnostics}};
  }
  return j;
}

inline ModelDocument model_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) -> void { throw error(error_kind::load_error, "invalid model: " + what); };
  try {
    if (!j.is_object()) fail("not a JSON object");
    const int version = j.at("format_version").get<int>();
    if (version != model_format_version)
      fail("unsupported format_version " + std::to_string(version) + " (expected " +
           std::to_string(model_format_version) + ")");

    ModelDocument doc;
    auto& f = doc.forest;
    f.metric = parse_metric(j.at("metric").get<std::string>());
    if (const auto& lm = j.at("label_map"); !lm.is_null())
      f.label_map = LabelMap{lm.at("positive").get<int>(), lm.at("negative").get<int>()};

    const auto& jf = j.at("forest");
    f.dimension = jf.at("dimension").get<std::size_t>();
    const auto features = jf.at("features").get<std::vector<std::vector<double>>>();
    const auto labels = jf.at("labels").get<std::vector<int>>();
    f.cost = jf.at("cost").get<std::vector<double>>();
    f.assigned_label = jf.at("assigned_label").get<std::vector<int>>();
    f.is_prototype = jf.at("is_prototype").get<std::vector<bool>>();
    const auto n = features.size();
    if (n == 0 || labels.size() != n || f.cost.size() != n || f.assigned_label.size() != n || f.is_prototype.size() != n)
      fail("forest arrays are empty or differ in length");
    if (f.dimension == 0) fail("dimension must be positive");
    for (std::size_t i = 0; i < n; ++i) {
      if (features[i].size() != f.dimension) fail("sample " + std::to_string(i) + " has the wrong dimension");
      if (!(f.cost[i] >= 0.0) || !std::isfinite(f.cost[i])) fail("cost of node " + std::to_string(i) + " is invalid");
      Sample s{features[i], labels[i], 0};
      if (f.label_map) s.binary_label = f.label_map->to_binary(s.label);
      f.training_samples.push_back(std::move(s));
    }
    f.rebuild_order();

    if (j.contains("calibration")) {
      const auto& c = j.at("calibration");
      CalibrationModel m;
      m.a = c.at("A").get<double>();
      m.b = c.at("B").get<double>();
      m.theta = c.at("theta").get<double>();
      m.final_nll = c.at("final_nll").get<double>();
      m.optimizer_used = c.at("optimizer").get<std::string>();
      m.evaluations = c.at("evaluations").get<std::size_t>();
      m.diagnostics = c.at("diagnostics").get<std::vector<std::string>>();
      if (!f.label_map) fail("calibration present without a binary label map");
      validate_theta(m.theta);
      doc.calibration = std::move(m);
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw error(error_kind::load_error, std::string("invalid model: ") + e.what());
  } catch (const error& e) {
    if (e.kind() == error_kind::load_error) throw;
    throw error(error_kind::load_error, std::string("invalid model: ") + e.what());
  }
}

inline std::string model_to_string(const ModelDocument& doc) { return to_json(doc).dump(1) + "\n"; }

inline ModelDocument model_from_string(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw error(error_kind::load_error, std::string("model is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline void save_model(const ModelDocument& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(error_kind::load_error, "cannot write '" + path.string() + "'");
  out << model_to_string(doc);
  if (!out) throw error(error_kind::load_error, "failed writing '" + path.string() + "'");
}

inline ModelDocument load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(error_kind::load_error, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_string(buf.str());
}

}  // namespace popf
