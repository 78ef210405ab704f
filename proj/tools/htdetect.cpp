// htdetect: power side-channel hardware trojan detection from the command line.
//
// Exit codes: 0 success, 2 config/validation error, 3 data error, 4 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "htdetect/htdetect.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int exit_code_for(htdetect::ErrorCategory c) {
  switch (c) {
    case htdetect::ErrorCategory::Config: return kExitConfig;
    case htdetect::ErrorCategory::Data: return kExitData;
    case htdetect::ErrorCategory::Internal: return kExitInternal;
  }
  return kExitInternal;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

// Precedence for the output directory: flag, then HTDETECT_OUTPUT_DIR, then file.
void apply(htdetect::PipelineConfig& cfg, const Overrides& o) {
  if (const char* env = std::getenv("HTDETECT_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  if (o.seed) cfg.seed = *o.seed;
}

// simulate also accepts a bare synthetic config document.
htdetect::PipelineConfig load_simulate_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw htdetect::ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw htdetect::ConfigError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  if (j.is_object() && !j.contains("datasets")) {
    const bool explicit_seed = j.contains("seed");
    htdetect::PipelineConfig cfg;
    htdetect::DataSource ds;
    auto sc = htdetect::synthetic_config_from_json(j, "synthetic");
    ds.trojan_id = sc.trojan_id;
    ds.seed_explicit = explicit_seed;
    if (explicit_seed) cfg.seed = sc.seed;
    ds.source = std::move(sc);
    cfg.datasets.push_back(std::move(ds));
    return cfg;
  }
  return htdetect::pipeline_config_from_json(j, path.parent_path());
}

void print_model_summary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw htdetect::IoError("cannot open " + path.string());
  const auto model = htdetect::load_model(path);
  std::cout << "file:               " << path.string() << '\n'
            << "format_version:     " << htdetect::kModelFormatVersion << '\n'
            << "kind:               " << htdetect::to_string(model.kind) << '\n'
            << "features:           " << model.n_features << '\n'
            << "schema_fingerprint: " << htdetect::detail::hex64(model.schema)
            << (model.schema == htdetect::canonical_schema_fingerprint() ? " (canonical)" : "")
            << '\n'
            << "checksum:           ok\n";
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, htdetect::RandomForestModel>) {
          std::size_t nodes = 0, depth = 0;
          for (const auto& t : m.trees) {
            nodes += t.nodes().size();
            depth = std::max(depth, t.depth());
          }
          std::cout << "trees:              " << m.trees.size() << " (" << nodes
                    << " nodes, max depth " << depth << ")\n";
        } else if constexpr (std::is_same_v<M, htdetect::GradientBoostingModel>) {
          std::cout << "trees:              " << m.trees.size() << '\n'
                    << "learning_rate:      " << m.learning_rate << '\n'
                    << "initial_log_odds:   " << m.initial_score << '\n';
        } else if constexpr (std::is_same_v<M, htdetect::NaiveBayesModel>) {
          std::cout << "class_priors:       " << std::exp(m.log_prior[0]) << " / "
                    << std::exp(m.log_prior[1]) << '\n';
        } else {
          std::cout << "hidden_units:       " << m.weights.hidden << '\n';
        }
      },
      model.params);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardware trojan detection from power side-channel traces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(htdetect::kVersion));

  Overrides overrides;
  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", overrides.output_dir,
                    "output directory (overrides HTDETECT_OUTPUT_DIR and the config)");
    sub->add_option("-s,--seed", overrides.seed, "global seed (overrides the config)");
  };

  auto* simulate = app.add_subcommand("simulate", "write synthetic trace datasets as CSV");
  add_common(simulate);

  bool quiet = false;
  auto* run = app.add_subcommand("run", "simulate/load, split, extract, train, evaluate and report");
  add_common(run);
  run->add_flag("-q,--quiet", quiet, "suppress progress output");

  std::string trojan, feature;
  std::size_t grid_points = 512;
  bool no_svg = false;
  auto* kde = app.add_subcommand("kde", "export per-state kernel density curves of one feature");
  add_common(kde);
  kde->add_option("-t,--trojan", trojan, "trojan id from the config")->required();
  kde->add_option("-f,--feature", feature, "canonical feature name")->required();
  kde->add_option("-g,--grid-points", grid_points, "grid resolution")->check(CLI::Range(2, 1000000));
  kde->add_flag("--no-svg", no_svg, "write the CSV only");

  std::string model_path;
  auto* inspect = app.add_subcommand("inspect-model", "validate a saved model and print a summary");
  inspect->add_option("model", model_path, "model JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) {
      auto cfg = load_simulate_config(config_path);
      apply(cfg, overrides);
      for (const auto& p : htdetect::simulate_to_csv(cfg)) std::cout << p.string() << '\n';
    } else if (*run) {
      auto cfg = htdetect::load_pipeline_config(config_path);
      apply(cfg, overrides);
      const auto result = htdetect::run_pipeline(cfg, quiet ? nullptr : &std::cerr);
      if (!quiet) std::cout << result.report.metrics_table << '\n' << result.report.comparison_table;
    } else if (*kde) {
      auto cfg = htdetect::load_pipeline_config(config_path);
      apply(cfg, overrides);
      std::vector<std::filesystem::path> written;
      const auto curves = htdetect::kde_for(cfg, trojan, feature, grid_points, !no_svg, &written);
      for (const auto& p : written) std::cout << p.string() << '\n';
      std::cout << "overlap coefficient: " << htdetect::overlap_coefficient(curves.disabled, curves.triggered)
                << '\n';
    } else if (*inspect) {
      print_model_summary(model_path);
    }
  } catch (const htdetect::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
