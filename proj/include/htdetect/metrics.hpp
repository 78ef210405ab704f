#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "htdetect/classifiers.hpp"
#include "htdetect/error.hpp"
#include "htdetect/features.hpp"

namespace htdetect {

struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Counts with triggered (1) as the positive class.
inline ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size())
    throw ShapeError("confusion: " + std::to_string(labels.size()) + " labels but " +
                     std::to_string(predictions.size()) + " predictions");
  if (labels.empty()) throw ShapeError("confusion: no samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] != 0;
    const bool pred = predictions[i] != 0;
    if (truth && pred) ++cm.tp;
    else if (!truth && pred) ++cm.fp;
    else if (!truth && !pred) ++cm.tn;
    else ++cm.fn;
  }
  return cm;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

/// ROC from every distinct score threshold, highest first. Tied scores move
/// together, giving a diagonal segment. Starts at (0,0), ends at (1,1).
/// Without both classes the curve is just the two endpoints.
inline std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("roc: scores and labels differ in length");
  const auto pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                                          [](int l) { return l != 0; }));
  const std::size_t neg = labels.size() - pos;
  std::vector<RocPoint> roc{{0.0, 0.0}};
  if (pos == 0 || neg == 0) {
    roc.push_back({1.0, 1.0});
    return roc;
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] != 0 ? tp : fp)++;
      ++k;
    }
    roc.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return roc;
}

inline double trapezoid_auc(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i)
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2.0;
  return area;
}

struct MetricsReport {
  std::string trojan_id;
  std::string model;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  ConfusionMatrix confusion;
  std::vector<RocPoint> roc;
  // Names of metrics whose denominator was zero; their value is reported as 0.
  std::vector<std::string> undefined;

  bool is_undefined(std::string_view metric) const {
    return std::find(undefined.begin(), undefined.end(), metric) != undefined.end();
  }

  bool operator==(const MetricsReport&) const = default;
};

/// Recall uses the conventional TP / (TP + FN).
inline MetricsReport metrics(const ConfusionMatrix& cm, std::span<const double> scores,
                             std::span<const int> labels) {
  if (labels.empty() || cm.total() == 0) throw ShapeError("metrics: no samples");
  if (scores.size() != labels.size()) throw ShapeError("metrics: scores and labels differ in length");
  if (cm.total() != labels.size())
    throw ShapeError("metrics: confusion matrix covers " + std::to_string(cm.total()) +
                     " samples but " + std::to_string(labels.size()) + " labels were given");

  MetricsReport r;
  r.confusion = cm;
  auto ratio = [&](double num, double den, const char* name) {
    if (den == 0.0) {
      r.undefined.emplace_back(name);
      return 0.0;
    }
    return num / den;
  };
  const auto tp = static_cast<double>(cm.tp);
  const auto fp = static_cast<double>(cm.fp);
  const auto tn = static_cast<double>(cm.tn);
  const auto fn = static_cast<double>(cm.fn);
  r.accuracy = (tp + tn) / static_cast<double>(cm.total());
  r.precision = ratio(tp, tp + fp, "precision");
  r.recall = ratio(tp, tp + fn, "recall");
  if (r.is_undefined("precision") || r.is_undefined("recall")) {
    r.undefined.emplace_back("f1");
  } else {
    r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall, "f1");
  }
  r.roc = roc_curve(scores, labels);
  const auto pos = std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
  if (pos == 0 || static_cast<std::size_t>(pos) == labels.size()) {
    r.undefined.emplace_back("auc");
  } else {
    r.auc = trapezoid_auc(r.roc);
  }
  return r;
}

/// Scores every vector, thresholds at 0.5 (>= is positive), and reports.
inline MetricsReport evaluate(const TrainedModel& model, std::span<const FeatureVector> test) {
  if (test.empty()) throw ShapeError("evaluate: empty test set");
  std::vector<double> scores;
  std::vector<int> labels, preds;
  scores.reserve(test.size());
  for (const auto& v : test) {
    const double p = predict_proba(model, v);
    scores.push_back(p);
    labels.push_back(v.label);
    preds.push_back(p >= 0.5 ? 1 : 0);
  }
  auto r = metrics(confusion(labels, preds), scores, labels);
  r.model = std::string(to_string(model.kind));
  r.trojan_id = test.front().trojan_id;
  return r;
}

}  // namespace htdetect
