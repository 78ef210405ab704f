#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <json.hpp>

#include "htdetect/features.hpp"
#include "htdetect/matrix.hpp"

namespace htdetect {

struct NaiveBayesParams {
  double var_smoothing_ratio = 1e-9;

  bool operator==(const NaiveBayesParams&) const = default;
};

/// Gaussian naive Bayes over standardized features. Index 0 is the disabled
/// class, index 1 triggered.
struct NaiveBayesModel {
  Standardizer standardizer;
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> var;

  double predict_proba(std::span<const double> raw) const {
    const auto x = standardizer.transform(raw);
    std::array<double, 2> joint{};
    for (std::size_t c = 0; c < 2; ++c) {
      double lj = log_prior[c];
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - mean[c][j];
        lj -= 0.5 * std::log(2.0 * std::numbers::pi * var[c][j]) + 0.5 * d * d / var[c][j];
      }
      joint[c] = lj;
    }
    const double top = std::max(joint[0], joint[1]);
    const double e0 = std::exp(joint[0] - top);
    const double e1 = std::exp(joint[1] - top);
    return e1 / (e0 + e1);
  }

  nlohmann::json to_json() const {
    return {{"standardizer", standardizer.to_json()},
            {"log_prior", log_prior},
            {"mean", mean},
            {"var", var}};
  }

  static NaiveBayesModel from_json(const nlohmann::json& j, std::size_t n_features) {
    NaiveBayesModel m;
    m.standardizer = Standardizer::from_json(j.at("standardizer"));
    m.log_prior = j.at("log_prior").get<std::array<double, 2>>();
    m.mean = j.at("mean").get<std::array<std::vector<double>, 2>>();
    m.var = j.at("var").get<std::array<std::vector<double>, 2>>();
    for (std::size_t c = 0; c < 2; ++c) {
      if (m.mean[c].size() != n_features || m.var[c].size() != n_features)
        throw IntegrityError("naive Bayes parameters do not match the feature count");
      for (double v : m.var[c])
        if (!(v > 0.0)) throw IntegrityError("naive Bayes variance must be positive");
    }
    if (m.standardizer.size() != n_features)
      throw IntegrityError("standardizer does not match the feature count");
    return m;
  }

  bool operator==(const NaiveBayesModel&) const = default;
};

/// `standardized` holds rows already transformed by `standardizer`.
inline NaiveBayesModel fit_naive_bayes(const Matrix& standardized, std::span<const int> y,
                                       Standardizer standardizer, const NaiveBayesParams& params) {
  const std::size_t n = standardized.rows();
  const std::size_t d = standardized.cols();
  NaiveBayesModel m;
  m.standardizer = std::move(standardizer);

  // Smoothing is relative to the largest per-feature variance of all data.
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mu = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += standardized(i, j);
    mu /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) ss += (standardized(i, j) - mu) * (standardized(i, j) - mu);
    max_var = std::max(max_var, ss / static_cast<double>(n));
  }
  const double epsilon = std::max(params.var_smoothing_ratio * max_var, 1e-300);

  for (int c = 0; c < 2; ++c) {
    std::vector<double> mu(d, 0.0), var(d, 0.0);
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] != c) continue;
      count += 1.0;
      for (std::size_t j = 0; j < d; ++j) mu[j] += standardized(i, j);
    }
    for (auto& v : mu) v /= count;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] != c) continue;
      for (std::size_t j = 0; j < d; ++j)
        var[j] += (standardized(i, j) - mu[j]) * (standardized(i, j) - mu[j]);
    }
    for (auto& v : var) v = v / count + epsilon;
    m.log_prior[static_cast<std::size_t>(c)] = std::log(count / static_cast<double>(n));
    m.mean[static_cast<std::size_t>(c)] = std::move(mu);
    m.var[static_cast<std::size_t>(c)] = std::move(var);
  }
  return m;
}

}  // namespace htdetect
