#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "htdetect/decision_tree.hpp"
#include "htdetect/random.hpp"

namespace htdetect {

struct RandomForestParams {
  std::size_t n_trees = 10;
  std::size_t max_features = 0;  // 0 selects floor(sqrt(d))
  std::size_t min_leaf = 1;

  bool operator==(const RandomForestParams&) const = default;
};

/// Bagged Gini trees; probability is the fraction of trees voting triggered.
struct RandomForestModel {
  std::vector<DecisionTree> trees;

  // Leaf values hold the positive fraction of the leaf; a leaf votes
  // triggered at >= 0.5, so an even split goes to the positive class.
  double predict_proba(std::span<const double> x) const {
    if (trees.empty()) return 0.5;
    std::size_t votes = 0;
    for (const auto& t : trees) votes += t.predict(x) >= 0.5 ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
  }

  nlohmann::json to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& t : trees) arr.push_back(t.to_json());
    return {{"trees", arr}};
  }

  static RandomForestModel from_json(const nlohmann::json& j, std::size_t n_features) {
    RandomForestModel m;
    for (const auto& t : j.at("trees")) m.trees.push_back(DecisionTree::from_json(t, n_features));
    return m;
  }

  bool operator==(const RandomForestModel&) const = default;
};

inline std::size_t resolve_max_features(const RandomForestParams& p, std::size_t d) {
  const std::size_t k = p.max_features ? p.max_features
                                       : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))));
  return std::clamp<std::size_t>(k, 1, d);
}

/// Each tree draws its bootstrap sample and per-node feature subsets from a
/// stream derived from (seed, tree index).
inline RandomForestModel fit_random_forest(const Matrix& x, std::span<const int> y,
                                           const RandomForestParams& params, std::uint64_t seed) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = resolve_max_features(params, d);
  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});

  GiniCriterion crit{y};
  TreeGrowth growth;
  growth.min_leaf = params.min_leaf;

  RandomForestModel model;
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.below(n);

    auto choose = [&](std::size_t) {
      std::vector<std::size_t> pool = all_features;
      for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(d - i)]);
      pool.resize(k);
      std::sort(pool.begin(), pool.end());
      return pool;
    };
    auto leaf = [&](std::span<const std::size_t> leaf_rows) {
      double pos = 0.0;
      for (auto r : leaf_rows) pos += y[r];
      return pos / static_cast<double>(leaf_rows.size());
    };
    model.trees.push_back(grow_tree(x, std::move(rows), crit, growth, choose, all_features, leaf));
  }
  return model;
}

}  // namespace htdetect
