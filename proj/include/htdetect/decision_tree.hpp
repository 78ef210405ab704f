#pragma once

// Binary CART trees stored as flat node arrays. One greedy builder serves
// both the Gini classification trees of the random forest and the
// squared-error regression trees of gradient boosting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "htdetect/error.hpp"
#include "htdetect/matrix.hpp"

namespace htdetect {

class DecisionTree {
 public:
  static constexpr int kLeaf = -1;

  struct Node {
    int feature = kLeaf;  // split feature, or kLeaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf payload

    bool operator==(const Node&) const = default;
  };

  DecisionTree() = default;
  explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<Node>& nodes() const { return nodes_; }
  std::vector<Node>& nodes() { return nodes_; }

  double predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes_[i].feature != kLeaf) {
      const auto& n = nodes_[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
    }
    return nodes_[i].value;
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (nodes_[i].feature != kLeaf) {
        stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
        stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
      }
    }
    return best;
  }

  nlohmann::json to_json() const {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : nodes_) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left},
            {"right", right},     {"value", value}};
  }

  /// Validates structure against the feature count.
  static DecisionTree from_json(const nlohmann::json& j, std::size_t n_features) {
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto value = j.at("value").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
        value.size() != n)
      throw IntegrityError("tree arrays have inconsistent lengths");
    std::vector<Node> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
      nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
      if (feature[i] == kLeaf) continue;
      // Children always follow their parent, so traversal terminates.
      auto child_ok = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
      if (feature[i] < 0 || static_cast<std::size_t>(feature[i]) >= n_features ||
          !child_ok(left[i]) || !child_ok(right[i]))
        throw IntegrityError("tree node " + std::to_string(i) + " is malformed");
    }
    return DecisionTree(std::move(nodes));
  }

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

/// Node impurity for Gini classification: n * gini = n - (pos^2 + neg^2) / n.
struct GiniCriterion {
  std::span<const int> labels;

  struct Stats {
    double n = 0.0;
    double pos = 0.0;
  };
  void add(Stats& s, std::size_t i) const {
    s.n += 1.0;
    s.pos += labels[i];
  }
  static Stats minus(const Stats& a, const Stats& b) { return {a.n - b.n, a.pos - b.pos}; }
  static double cost(const Stats& s) {
    if (s.n <= 0.0) return 0.0;
    const double neg = s.n - s.pos;
    return s.n - (s.pos * s.pos + neg * neg) / s.n;
  }
};

/// Sum of squared deviations of the targets.
struct SquaredErrorCriterion {
  std::span<const double> targets;

  struct Stats {
    double n = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  void add(Stats& s, std::size_t i) const {
    s.n += 1.0;
    s.sum += targets[i];
    s.sum_sq += targets[i] * targets[i];
  }
  static Stats minus(const Stats& a, const Stats& b) {
    return {a.n - b.n, a.sum - b.sum, a.sum_sq - b.sum_sq};
  }
  static double cost(const Stats& s) {
    if (s.n <= 0.0) return 0.0;
    return std::max(0.0, s.sum_sq - s.sum * s.sum / s.n);
  }
};

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

/// Best threshold split over `features` (visited in the given order). Ties
/// keep the earliest candidate, so callers pass features in ascending order
/// to prefer the lowest index and then the lowest threshold.
template <typename Criterion>
std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const std::size_t> rows,
                                         std::span<const std::size_t> features,
                                         const Criterion& crit, std::size_t min_leaf) {
  using Stats = typename Criterion::Stats;
  Stats total;
  for (auto r : rows) crit.add(total, r);

  std::optional<SplitCandidate> best;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  for (auto f : features) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    Stats left;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      crit.add(left, order[k]);
      const double lo = x(order[k], f);
      const double hi = x(order[k + 1], f);
      if (!(hi > lo)) continue;
      const std::size_t n_left = k + 1;
      if (n_left < min_leaf || order.size() - n_left < min_leaf) continue;
      const double cost = Criterion::cost(left) + Criterion::cost(Criterion::minus(total, left));
      const double slack = 1e-12 * std::max(1.0, std::abs(best ? best->cost : cost));
      if (!best || cost < best->cost - slack) {
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi)) threshold = lo;
        best = SplitCandidate{f, threshold, cost};
      }
    }
  }
  return best;
}

struct TreeGrowth {
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  std::size_t min_leaf = 1;
};

/// Greedy depth-first growth. `choose_features(depth)` yields the candidate
/// features for a node (ascending); `fallback_features` is searched when none
/// of them admits a split. `leaf_value(rows)` fills leaves. A node becomes a
/// leaf when pure (zero cost), too small, at max depth, or unsplittable.
template <typename Criterion, typename ChooseFeatures, typename LeafValue>
DecisionTree grow_tree(const Matrix& x, std::vector<std::size_t> rows, const Criterion& crit,
                       const TreeGrowth& growth, ChooseFeatures&& choose_features,
                       std::span<const std::size_t> fallback_features, LeafValue&& leaf_value) {
  std::vector<DecisionTree::Node> nodes;
  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  nodes.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(rows), 0});

  while (!stack.empty()) {
    Pending item = std::move(stack.back());
    stack.pop_back();

    typename Criterion::Stats stats;
    for (auto r : item.rows) crit.add(stats, r);
    const bool can_split = item.depth < growth.max_depth &&
                           item.rows.size() >= 2 * growth.min_leaf &&
                           Criterion::cost(stats) > 0.0;
    std::optional<SplitCandidate> split;
    if (can_split) {
      const std::vector<std::size_t> candidates = choose_features(item.depth);
      split = best_split(x, item.rows, candidates, crit, growth.min_leaf);
      if (!split && candidates.size() < fallback_features.size())
        split = best_split(x, item.rows, fallback_features, crit, growth.min_leaf);
    }
    if (!split) {
      nodes[item.node].value = leaf_value(std::span<const std::size_t>(item.rows));
      continue;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : item.rows)
      (x(r, split->feature) <= split->threshold ? left_rows : right_rows).push_back(r);

    const auto left = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const auto right = static_cast<int>(nodes.size());
    nodes.emplace_back();
    auto& node = nodes[item.node];
    node.feature = static_cast<int>(split->feature);
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    // Right pushed first so the left subtree is built first.
    stack.push_back({static_cast<std::size_t>(right), std::move(right_rows), item.depth + 1});
    stack.push_back({static_cast<std::size_t>(left), std::move(left_rows), item.depth + 1});
  }
  return DecisionTree(std::move(nodes));
}

}  // namespace htdetect
