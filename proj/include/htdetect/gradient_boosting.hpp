#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "htdetect/decision_tree.hpp"

namespace htdetect {

struct GradientBoostingParams {
  std::size_t n_trees = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;

  bool operator==(const GradientBoostingParams&) const = default;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// Mean binary cross-entropy of raw scores against 0/1 labels.
inline double logistic_loss(std::span<const double> scores, std::span<const int> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) loss += softplus(scores[i]) - y[i] * scores[i];
  return loss / static_cast<double>(scores.size());
}

/// Logistic-loss boosting of depth-limited regression trees.
struct GradientBoostingModel {
  double initial_score = 0.0;  // log-odds of the training base rate
  double learning_rate = 0.1;
  std::vector<DecisionTree> trees;
  std::vector<double> stage_losses;  // training loss after 0..n stages; not persisted

  double decision_function(std::span<const double> x) const {
    double score = initial_score;
    for (const auto& t : trees) score += learning_rate * t.predict(x);
    return score;
  }

  double predict_proba(std::span<const double> x) const { return sigmoid(decision_function(x)); }

  nlohmann::json to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& t : trees) arr.push_back(t.to_json());
    return {{"initial_score", initial_score}, {"learning_rate", learning_rate}, {"trees", arr}};
  }

  static GradientBoostingModel from_json(const nlohmann::json& j, std::size_t n_features) {
    GradientBoostingModel m;
    m.initial_score = j.at("initial_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& t : j.at("trees")) m.trees.push_back(DecisionTree::from_json(t, n_features));
    return m;
  }
};

inline GradientBoostingModel fit_gradient_boosting(const Matrix& x, std::span<const int> y,
                                                   const GradientBoostingParams& params) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> all_features(x.cols());
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});

  const double positives = std::accumulate(y.begin(), y.end(), 0.0);
  const double base_rate = positives / static_cast<double>(n);

  GradientBoostingModel model;
  model.learning_rate = params.learning_rate;
  model.initial_score = std::log(base_rate / (1.0 - base_rate));

  std::vector<double> scores(n, model.initial_score);
  std::vector<double> prob(n);
  std::vector<double> residual(n);
  model.stage_losses.push_back(logistic_loss(scores, y));

  TreeGrowth growth;
  growth.max_depth = params.max_depth;
  SquaredErrorCriterion crit{residual};

  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  for (std::size_t stage = 0; stage < params.n_trees; ++stage) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(scores[i]);
      residual[i] = y[i] - prob[i];
    }
    // One Newton step per leaf: sum(residual) / sum(p (1 - p)).
    auto leaf = [&](std::span<const std::size_t> leaf_rows) {
      double g = 0.0, h = 0.0;
      for (auto r : leaf_rows) {
        g += residual[r];
        h += prob[r] * (1.0 - prob[r]);
      }
      return g / std::max(h, 1e-12);
    };
    auto choose = [&](std::size_t) { return all_features; };
    DecisionTree tree = grow_tree(x, rows, crit, growth, choose, all_features, leaf);
    for (std::size_t i = 0; i < n; ++i) scores[i] += params.learning_rate * tree.predict(x.row(i));
    model.trees.push_back(std::move(tree));
    model.stage_losses.push_back(logistic_loss(scores, y));
  }
  return model;
}

}  // namespace htdetect
