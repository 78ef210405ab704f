#pragma once

// End-to-end detection runs: data -> split -> features -> train -> evaluate
// -> report, plus the simulate and kde commands built on the same config.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "htdetect/classifiers.hpp"
#include "htdetect/error.hpp"
#include "htdetect/features.hpp"
#include "htdetect/kde.hpp"
#include "htdetect/metrics.hpp"
#include "htdetect/random.hpp"
#include "htdetect/report.hpp"
#include "htdetect/trace_io.hpp"

namespace htdetect {

inline constexpr const char* kVersion = "1.0.0";

struct CsvSource {
  std::vector<std::filesystem::path> files;
  CsvOptions options;
};

struct DataSource {
  std::string trojan_id;
  std::variant<SyntheticConfig, CsvSource> source;
  bool seed_explicit = false;  // synthetic only
};

struct ModelSpec {
  TrainConfig config;
  bool seed_explicit = false;
};

struct KdeRequest {
  std::string trojan_id;
  std::string feature;
  std::size_t grid_points = 512;
  bool svg = true;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "htdetect-out";
  std::vector<DataSource> datasets;
  SplitSpec split;
  bool split_seed_explicit = false;
  std::vector<ModelSpec> models;
  std::vector<KdeRequest> kde;
  bool save_models = true;
};

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace detail {

inline CsvLayout csv_layout_from_string(const std::string& s, const std::string& where) {
  if (s == "row_per_trace") return CsvLayout::RowPerTrace;
  if (s == "column_per_trace") return CsvLayout::ColumnPerTrace;
  throw ConfigError(where + ": expected row_per_trace or column_per_trace, got '" + s + "'");
}

inline LabelSource label_source_from_string(const std::string& s, const std::string& where) {
  if (s == "filename") return LabelSource::Filename;
  if (s == "directory") return LabelSource::Directory;
  if (s == "column") return LabelSource::Column;
  throw ConfigError(where + ": expected filename, directory or column, got '" + s + "'");
}

inline DataSource data_source_from_json(const nlohmann::json& j, const std::string& where,
                                        const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  DataSource ds;
  read_field(j, where, "trojan_id", ds.trojan_id);
  if (j.contains("synthetic") == j.contains("csv"))
    throw ConfigError(where + ": exactly one of 'synthetic' or 'csv' is required");
  if (j.contains("synthetic")) {
    const auto& s = j["synthetic"];
    auto cfg = synthetic_config_from_json(s, where + ".synthetic");
    if (!ds.trojan_id.empty() && !s.contains("trojan_id")) cfg.trojan_id = ds.trojan_id;
    ds.trojan_id = cfg.trojan_id;
    ds.seed_explicit = s.contains("seed");
    ds.source = std::move(cfg);
    return ds;
  }
  const auto& c = j["csv"];
  const std::string cw = where + ".csv";
  if (!c.is_object()) throw ConfigError(cw + ": expected an object");
  CsvSource src;
  std::vector<std::string> files;
  read_field(c, cw, "files", files);
  if (files.empty()) throw ConfigError(cw + ".files must list at least one file");
  for (const auto& f : files) {
    std::filesystem::path p(f);
    if (p.is_relative()) p = base_dir / p;
    src.files.push_back(p);
  }
  std::string layout = "row_per_trace", labeling = "filename";
  read_field(c, cw, "layout", layout);
  read_field(c, cw, "labeling", labeling);
  src.options.layout = csv_layout_from_string(layout, cw + ".layout");
  src.options.labeling = label_source_from_string(labeling, cw + ".labeling");
  read_field(c, cw, "label_index", src.options.label_index);
  read_field(c, cw, "has_header", src.options.has_header);
  read_field(c, cw, "temperature_c", src.options.temperature_c);
  std::string mode = "fixed_input";
  read_field(c, cw, "input_mode", mode);
  if (mode == "fixed_input") src.options.input_mode = InputMode::FixedInput;
  else if (mode == "chained_input") src.options.input_mode = InputMode::ChainedInput;
  else throw ConfigError(cw + ".input_mode: expected fixed_input or chained_input");
  if (ds.trojan_id.empty()) throw ConfigError(where + ".trojan_id is required for csv sources");
  src.options.trojan_id = ds.trojan_id;
  ds.source = std::move(src);
  return ds;
}

}  // namespace detail

/// Relative csv paths resolve against `base_dir` (normally the config's directory).
inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                                const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  PipelineConfig c;
  detail::read_field(j, "config", "seed", c.seed);
  std::string out;
  detail::read_field(j, "config", "output_dir", out);
  if (!out.empty()) c.output_dir = out;

  if (!j.contains("datasets") || !j["datasets"].is_array() || j["datasets"].empty())
    throw ConfigError("config.datasets must be a non-empty array");
  for (std::size_t i = 0; i < j["datasets"].size(); ++i)
    c.datasets.push_back(detail::data_source_from_json(
        j["datasets"][i], "datasets[" + std::to_string(i) + "]", base_dir));
  for (std::size_t a = 0; a < c.datasets.size(); ++a)
    for (std::size_t b = a + 1; b < c.datasets.size(); ++b)
      if (c.datasets[a].trojan_id == c.datasets[b].trojan_id)
        throw ConfigError("datasets[" + std::to_string(b) + "]: duplicate trojan_id '" +
                          c.datasets[b].trojan_id + "'");

  if (j.contains("split")) {
    c.split = split_spec_from_json(j["split"], "split");
    c.split_seed_explicit = j["split"].contains("seed");
  }

  if (j.contains("models")) {
    if (!j["models"].is_array()) throw ConfigError("config.models must be an array");
    for (std::size_t i = 0; i < j["models"].size(); ++i) {
      const auto& m = j["models"][i];
      ModelSpec spec;
      spec.config = train_config_from_json(m, "models[" + std::to_string(i) + "]");
      spec.seed_explicit = m.is_object() && m.contains("seed");
      c.models.push_back(spec);
    }
  } else {
    for (auto k : kAllModelKinds) {
      ModelSpec spec;
      spec.config.model_kind = k;
      c.models.push_back(spec);
    }
  }

  if (j.contains("kde")) {
    for (std::size_t i = 0; i < j["kde"].size(); ++i) {
      const std::string w = "kde[" + std::to_string(i) + "]";
      KdeRequest k;
      detail::read_field(j["kde"][i], w, "trojan_id", k.trojan_id);
      detail::read_field(j["kde"][i], w, "feature", k.feature);
      detail::read_field(j["kde"][i], w, "grid_points", k.grid_points);
      detail::read_field(j["kde"][i], w, "svg", k.svg);
      try {
        feature_index(k.feature);
      } catch (const ConfigError& e) {
        throw ConfigError(w + ".feature: " + e.what());
      }
      if (k.grid_points < 2) throw ConfigError(w + ".grid_points must be at least 2");
      c.kde.push_back(k);
    }
  }
  detail::read_field(j, "config", "save_models", c.save_models);
  return c;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  return pipeline_config_from_json(j, path.parent_path());
}

/// Every csv input must exist; IoError names the first missing path.
inline void validate_paths(const PipelineConfig& c) {
  for (const auto& ds : c.datasets)
    if (const auto* csv = std::get_if<CsvSource>(&ds.source))
      for (const auto& f : csv->files)
        if (!std::filesystem::exists(f)) throw IoError("input file not found: " + f.string());
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Rethrows with the stage name prefixed, keeping the error category.
template <typename F>
auto run_stage(std::string_view stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.category(), "[" + std::string(stage) + "] " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::Internal, "[" + std::string(stage) + "] " + e.what());
  }
}

inline SyntheticConfig effective_synthetic(const PipelineConfig& c, const DataSource& ds) {
  auto cfg = std::get<SyntheticConfig>(ds.source);
  if (!ds.seed_explicit) cfg.seed = derive_seed(c.seed, "simulate/" + ds.trojan_id);
  return cfg;
}

inline Dataset load_data_source(const PipelineConfig& c, const DataSource& ds) {
  if (std::holds_alternative<SyntheticConfig>(ds.source))
    return generate_synthetic(effective_synthetic(c, ds));
  const auto& csv = std::get<CsvSource>(ds.source);
  Dataset out;
  for (const auto& f : csv.files) out.append(load_csv_dataset(f, csv.options));
  return out;
}

inline SplitSpec effective_split(const PipelineConfig& c, const std::string& trojan_id) {
  SplitSpec s = c.split;
  if (!c.split_seed_explicit) s.seed = derive_seed(c.seed, "split/" + trojan_id);
  return s;
}

inline TrainConfig effective_train_config(const PipelineConfig& c, const ModelSpec& m,
                                          const std::string& trojan_id) {
  TrainConfig t = m.config;
  if (!m.seed_explicit)
    t.seed = derive_seed(c.seed, "train/" + trojan_id + "/" + std::string(to_string(t.model_kind)));
  return t;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

struct RunResult {
  BenchmarkResults results;
  BenchmarkReport report;
  std::vector<std::filesystem::path> artifacts;
};

inline constexpr const char* kIncompleteMarker = "INCOMPLETE";

inline KdePair write_kde(const std::vector<FeatureVector>& vectors, const KdeRequest& req,
                         const std::filesystem::path& out_dir,
                         std::vector<std::filesystem::path>* written = nullptr) {
  const auto kde = kde_export(vectors, req.feature, req.grid_points);
  const auto stem = out_dir / "kde" / (req.trojan_id + "_" + req.feature);
  write_kde_csv(kde, stem.string() + ".csv");
  if (written) written->push_back(stem.string() + ".csv");
  if (req.svg) {
    detail::write_text(stem.string() + ".svg",
                       render_kde_svg(kde, req.trojan_id + ": " + req.feature));
    if (written) written->push_back(stem.string() + ".svg");
  }
  return kde;
}

/// Runs every configured dataset and model. Deterministic given the config:
/// report.json carries no timestamps (those go to metadata.json).
inline RunResult run_pipeline(const PipelineConfig& c, std::ostream* log = nullptr) {
  run_stage("validate", [&] { validate_paths(c); });
  std::filesystem::create_directories(c.output_dir);
  const auto marker = c.output_dir / kIncompleteMarker;
  detail::write_text(marker, "run in progress or failed\n");

  RunResult run;
  for (const auto& ds : c.datasets) {
    const std::string& id = ds.trojan_id;
    auto say = [&](const std::string& msg) {
      if (log) *log << "[" << id << "] " << msg << '\n';
    };
    const Dataset data = run_stage("data", [&] { return load_data_source(c, ds); });
    say("loaded " + std::to_string(data.size()) + " traces (" +
        std::to_string(data.count(TrojanState::Disabled)) + " disabled, " +
        std::to_string(data.count(TrojanState::Triggered)) + " triggered)");
    const auto parts = run_stage("split", [&] { return split(data, effective_split(c, id)); });
    const auto train_set = run_stage("extract", [&] { return extract_all(parts.train); });
    const auto test_set = run_stage("extract", [&] { return extract_all(parts.test); });

    for (const auto& spec : c.models) {
      const auto cfg = effective_train_config(c, spec, id);
      const std::string kind(to_string(cfg.model_kind));
      const auto model = run_stage("train", [&] { return train(train_set, cfg); });
      auto report = run_stage("evaluate", [&] { return evaluate(model, test_set); });
      report.trojan_id = id;
      say(kind + ": accuracy " + percent(report.accuracy) + "%, auc " + percent(report.auc) + "%");
      if (c.save_models) {
        const auto path = c.output_dir / "models" / (id + "_" + kind + ".json");
        run_stage("save", [&] { save_model(model, path); });
        run.artifacts.push_back(path);
      }
      run.results[id][kind] = std::move(report);
    }

    for (const auto& req : c.kde) {
      if (req.trojan_id != id) continue;
      run_stage("kde", [&] {
        std::vector<FeatureVector> all = train_set;
        all.insert(all.end(), test_set.begin(), test_set.end());
        write_kde(all, req, c.output_dir, &run.artifacts);
      });
    }
  }
  for (const auto& req : c.kde) {
    if (!run.results.contains(req.trojan_id))
      throw ConfigError("kde request names unknown trojan_id '" + req.trojan_id + "'");
  }

  run_stage("report", [&] {
    run.report = benchmark_report(run.results);
    const auto& out = c.output_dir;
    detail::write_text(out / "report.json", run.report.json.dump(2) + "\n");
    detail::write_text(out / "metrics_table.txt", run.report.metrics_table);
    detail::write_text(out / "metrics_table.csv", run.report.metrics_csv);
    detail::write_text(out / "comparison_table.txt", run.report.comparison_table);
    detail::write_text(out / "comparison_table.csv", run.report.comparison_csv);
    const nlohmann::json meta = {{"tool", "htdetect"},
                                 {"version", kVersion},
                                 {"finished_at", detail::utc_timestamp()},
                                 {"seed", c.seed}};
    detail::write_text(out / "metadata.json", meta.dump(2) + "\n");
    for (const char* f : {"report.json", "metrics_table.txt", "metrics_table.csv",
                          "comparison_table.txt", "comparison_table.csv", "metadata.json"})
      run.artifacts.push_back(out / f);
  });
  std::filesystem::remove(marker);
  return run;
}

/// Writes <out>/data/<trojan>_{disabled,triggered}.csv for each synthetic
/// source; loadable with LabelSource::Filename.
inline std::vector<std::filesystem::path> simulate_to_csv(const PipelineConfig& c) {
  std::vector<std::filesystem::path> written;
  for (const auto& ds : c.datasets) {
    if (!std::holds_alternative<SyntheticConfig>(ds.source)) continue;
    const Dataset data = run_stage("simulate", [&] { return generate_synthetic(effective_synthetic(c, ds)); });
    for (auto state : {TrojanState::Disabled, TrojanState::Triggered}) {
      Dataset part;
      for (const auto& t : data.traces)
        if (t.state == state) part.traces.push_back(t);
      const auto path = c.output_dir / "data" / (ds.trojan_id + "_" + std::string(to_string(state)) + ".csv");
      run_stage("write", [&] { write_csv_dataset(part, path, CsvLayout::RowPerTrace, false); });
      written.push_back(path);
    }
  }
  return written;
}

/// KDE of one feature over every trace of one configured trojan.
inline KdePair kde_for(const PipelineConfig& c, const std::string& trojan_id,
                       const std::string& feature, std::size_t grid_points = 512, bool svg = true,
                       std::vector<std::filesystem::path>* written = nullptr) {
  run_stage("validate", [&] { feature_index(feature); });
  const DataSource* source = nullptr;
  for (const auto& ds : c.datasets)
    if (ds.trojan_id == trojan_id) source = &ds;
  if (!source) throw ConfigError("no dataset with trojan_id '" + trojan_id + "' in config");
  run_stage("validate", [&] { validate_paths(c); });
  const Dataset data = run_stage("data", [&] { return load_data_source(c, *source); });
  const auto vectors = run_stage("extract", [&] { return extract_all(data); });
  return run_stage("kde", [&] {
    return write_kde(vectors, KdeRequest{trojan_id, feature, grid_points, svg}, c.output_dir, written);
  });
}

}  // namespace htdetect
