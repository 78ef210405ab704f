#pragma once

// Training, prediction and persistence for the four detector kinds.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "htdetect/error.hpp"
#include "htdetect/features.hpp"
#include "htdetect/gradient_boosting.hpp"
#include "htdetect/matrix.hpp"
#include "htdetect/naive_bayes.hpp"
#include "htdetect/neural_network.hpp"
#include "htdetect/random_forest.hpp"

namespace htdetect {

enum class ModelKind { RandomForest, GradientBoosting, NaiveBayes, NeuralNetwork };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::NeuralNetwork, ModelKind::GradientBoosting,
                                               ModelKind::RandomForest, ModelKind::NaiveBayes};

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::RandomForest: return "random_forest";
    case ModelKind::GradientBoosting: return "gradient_boosting";
    case ModelKind::NaiveBayes: return "naive_bayes";
    case ModelKind::NeuralNetwork: return "neural_network";
  }
  return "?";
}

inline std::string_view display_name(ModelKind k) {
  switch (k) {
    case ModelKind::RandomForest: return "Random Forest";
    case ModelKind::GradientBoosting: return "Gradient Boosting";
    case ModelKind::NaiveBayes: return "Naive Bayes";
    case ModelKind::NeuralNetwork: return "Neural Network";
  }
  return "?";
}

inline std::optional<ModelKind> model_kind_from_string(std::string_view name) {
  for (auto k : kAllModelKinds)
    if (name == to_string(k)) return k;
  return std::nullopt;
}

struct TrainConfig {
  ModelKind model_kind = ModelKind::RandomForest;
  std::uint64_t seed = 0;
  RandomForestParams rf;
  GradientBoostingParams gb;
  NeuralNetworkParams nn;
  NaiveBayesParams nb;

  bool operator==(const TrainConfig&) const = default;
};

inline void validate(const TrainConfig& c, std::string_view where = "model") {
  const std::string p(where);
  auto positive = [&](bool ok, const char* field) {
    if (!ok) throw ConfigError(p + "." + field + " must be positive");
  };
  positive(c.rf.min_leaf > 0, "rf.min_leaf");
  positive(c.gb.learning_rate > 0.0, "gb.learning_rate");
  positive(c.gb.max_depth > 0, "gb.max_depth");
  positive(c.nn.hidden > 0, "nn.hidden");
  positive(c.nn.learning_rate > 0.0, "nn.learning_rate");
  positive(c.nn.l2 >= 0.0, "nn.l2");
  positive(c.nn.batch_size > 0, "nn.batch_size");
  positive(c.nn.early_stop_patience > 0, "nn.early_stop_patience");
  positive(c.nb.var_smoothing_ratio > 0.0, "nb.var_smoothing_ratio");
  if (!(c.nn.val_fraction >= 0.0 && c.nn.val_fraction < 1.0))
    throw ConfigError(p + ".nn.val_fraction must lie in [0, 1)");
}

using ModelParams =
    std::variant<RandomForestModel, GradientBoostingModel, NaiveBayesModel, NeuralNetworkModel>;

struct TrainedModel {
  ModelKind kind = ModelKind::RandomForest;
  std::uint64_t schema = 0;
  std::size_t n_features = 0;
  ModelParams params;
};

namespace detail {

inline void check_schema(const TrainedModel& m, const FeatureVector& v) {
  if (v.schema != m.schema || v.values.size() != m.n_features)
    throw SchemaError("feature vector schema does not match the model (expected " +
                      std::to_string(m.n_features) + " features)");
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

/// Probability of the triggered class.
inline double predict_proba(const TrainedModel& model, const FeatureVector& v) {
  detail::check_schema(model, v);
  return std::visit([&](const auto& m) { return m.predict_proba(v.values); }, model.params);
}

inline int predict(const TrainedModel& model, const FeatureVector& v) {
  return predict_proba(model, v) >= 0.5 ? 1 : 0;
}

inline TrainedModel train(std::span<const FeatureVector> train_set, const TrainConfig& config) {
  validate(config);
  if (train_set.empty()) throw DegenerateTrainingError("empty training set");
  const auto schema = train_set.front().schema;
  const auto d = train_set.front().values.size();
  if (d == 0) throw SchemaError("feature vectors are empty");
  std::size_t pos = 0;
  for (const auto& v : train_set) {
    if (v.schema != schema || v.values.size() != d)
      throw SchemaError("training vectors do not share one feature schema");
    if (v.label != 0 && v.label != 1) throw SchemaError("labels must be 0 or 1");
    pos += static_cast<std::size_t>(v.label);
  }
  const std::size_t neg = train_set.size() - pos;
  if (pos < 2 || neg < 2)
    throw DegenerateTrainingError("training needs at least 2 vectors per class; got " +
                                  std::to_string(neg) + " disabled and " + std::to_string(pos) +
                                  " triggered");

  std::vector<int> y;
  y.reserve(train_set.size());
  for (const auto& v : train_set) y.push_back(v.label);
  const Matrix x = to_matrix(train_set);

  TrainedModel model;
  model.kind = config.model_kind;
  model.schema = schema;
  model.n_features = d;

  auto standardized = [&](const Standardizer& s) {
    Matrix z(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto row = s.transform(x.row(i));
      std::copy(row.begin(), row.end(), z.row(i).begin());
    }
    return z;
  };

  switch (config.model_kind) {
    case ModelKind::RandomForest:
      model.params = fit_random_forest(x, y, config.rf, config.seed);
      break;
    case ModelKind::GradientBoosting:
      model.params = fit_gradient_boosting(x, y, config.gb);
      break;
    case ModelKind::NaiveBayes: {
      auto s = fit_standardizer(train_set);
      const Matrix z = standardized(s);
      model.params = fit_naive_bayes(z, y, std::move(s), config.nb);
      break;
    }
    case ModelKind::NeuralNetwork: {
      auto s = fit_standardizer(train_set);
      const Matrix z = standardized(s);
      model.params = fit_neural_network(z, y, std::move(s), config.nn, config.seed);
      break;
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

/// fnv1a64 over the compact dump of everything but the checksum field.
inline std::string model_checksum(const nlohmann::json& doc) {
  nlohmann::json body = doc;
  body.erase("checksum");
  return detail::hex64(fnv1a64(body.dump()));
}

inline nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = std::string(to_string(model.kind));
  doc["schema_fingerprint"] = detail::hex64(model.schema);
  doc["n_features"] = model.n_features;
  doc["params"] = std::visit([](const auto& m) { return m.to_json(); }, model.params);
  doc["checksum"] = model_checksum(doc);
  return doc;
}

inline TrainedModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw IntegrityError("model document is not a JSON object");
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer())
    throw FormatVersionError("model document has no format_version");
  if (doc["format_version"].get<int>() != kModelFormatVersion)
    throw FormatVersionError("unsupported model format_version " +
                             doc["format_version"].dump() + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
  if (!doc.contains("kind") || !doc["kind"].is_string())
    throw FormatVersionError("model document has no kind tag");
  const auto kind = model_kind_from_string(doc["kind"].get<std::string>());
  if (!kind) throw FormatVersionError("unknown model kind '" + doc["kind"].get<std::string>() + "'");
  if (!doc.contains("checksum") || !doc["checksum"].is_string() ||
      doc["checksum"].get<std::string>() != model_checksum(doc))
    throw IntegrityError("model checksum mismatch");

  TrainedModel model;
  model.kind = *kind;
  try {
    model.schema = std::stoull(doc.at("schema_fingerprint").get<std::string>(), nullptr, 16);
    model.n_features = doc.at("n_features").get<std::size_t>();
    const auto& p = doc.at("params");
    switch (model.kind) {
      case ModelKind::RandomForest:
        model.params = RandomForestModel::from_json(p, model.n_features);
        break;
      case ModelKind::GradientBoosting:
        model.params = GradientBoostingModel::from_json(p, model.n_features);
        break;
      case ModelKind::NaiveBayes:
        model.params = NaiveBayesModel::from_json(p, model.n_features);
        break;
      case ModelKind::NeuralNetwork:
        model.params = NeuralNetworkModel::from_json(p, model.n_features);
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed model parameters: ") + e.what());
  } catch (const std::logic_error& e) {
    throw IntegrityError(std::string("malformed model parameters: ") + e.what());
  }
  return model;
}

inline void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw IntegrityError(path.string() + ": not a complete model document (" + e.what() + ")");
  }
  return model_from_json(doc);
}

// ---------------------------------------------------------------------------
// TrainConfig JSON
// ---------------------------------------------------------------------------

inline TrainConfig train_config_from_json(const nlohmann::json& j, std::string_view where = "model") {
  const std::string w(where);
  TrainConfig c;
  if (j.is_string()) {
    const auto k = model_kind_from_string(j.get<std::string>());
    if (!k) throw ConfigError(w + ": unknown model kind '" + j.get<std::string>() + "'");
    c.model_kind = *k;
    return c;
  }
  if (!j.is_object()) throw ConfigError(w + ": expected an object or a model kind string");
  if (!j.contains("model_kind")) throw ConfigError(w + ".model_kind is required");
  std::string kind;
  detail::read_field(j, where, "model_kind", kind);
  const auto k = model_kind_from_string(kind);
  if (!k) throw ConfigError(w + ".model_kind: unknown kind '" + kind + "'");
  c.model_kind = *k;
  detail::read_field(j, where, "seed", c.seed);
  if (j.contains("rf")) {
    const auto& r = j["rf"];
    const std::string rw = w + ".rf";
    detail::read_field(r, rw, "n_trees", c.rf.n_trees);
    detail::read_field(r, rw, "max_features", c.rf.max_features);
    detail::read_field(r, rw, "min_leaf", c.rf.min_leaf);
  }
  if (j.contains("gb")) {
    const auto& g = j["gb"];
    const std::string gw = w + ".gb";
    detail::read_field(g, gw, "n_trees", c.gb.n_trees);
    detail::read_field(g, gw, "learning_rate", c.gb.learning_rate);
    detail::read_field(g, gw, "max_depth", c.gb.max_depth);
  }
  if (j.contains("nn")) {
    const auto& n = j["nn"];
    const std::string nw = w + ".nn";
    detail::read_field(n, nw, "hidden", c.nn.hidden);
    detail::read_field(n, nw, "learning_rate", c.nn.learning_rate);
    detail::read_field(n, nw, "l2", c.nn.l2);
    detail::read_field(n, nw, "max_epochs", c.nn.max_epochs);
    detail::read_field(n, nw, "batch_size", c.nn.batch_size);
    detail::read_field(n, nw, "early_stop_patience", c.nn.early_stop_patience);
    detail::read_field(n, nw, "val_fraction", c.nn.val_fraction);
  }
  if (j.contains("nb")) {
    detail::read_field(j["nb"], w + ".nb", "var_smoothing_ratio", c.nb.var_smoothing_ratio);
  }
  validate(c, where);
  return c;
}

}  // namespace htdetect
