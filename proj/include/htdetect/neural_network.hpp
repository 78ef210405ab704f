#pragma once

// One-hidden-layer perceptron: standardized inputs -> ReLU -> sigmoid,
// trained on binary cross-entropy with L2 weight decay by mini-batch Adam
// and early stopping on held-out accuracy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "htdetect/features.hpp"
#include "htdetect/gradient_boosting.hpp"
#include "htdetect/matrix.hpp"
#include "htdetect/random.hpp"

namespace htdetect {

struct NeuralNetworkParams {
  std::size_t hidden = 100;
  double learning_rate = 0.001;
  double l2 = 0.0001;
  std::size_t max_epochs = 200;
  std::size_t batch_size = 64;
  std::size_t early_stop_patience = 10;
  double val_fraction = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const NeuralNetworkParams&) const = default;
};

struct MlpWeights {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  MlpWeights() = default;
  MlpWeights(std::size_t in, std::size_t h)
      : inputs(in), hidden(h), w1(in * h, 0.0), b1(h, 0.0), w2(h, 0.0) {}

  /// Logit of one standardized input row.
  double logit(std::span<const double> x) const {
    double z2 = b2;
    for (std::size_t h = 0; h < hidden; ++h) {
      double z = b1[h];
      const double* w = w1.data() + h * inputs;
      for (std::size_t j = 0; j < inputs; ++j) z += w[j] * x[j];
      if (z > 0.0) z2 += w2[h] * z;
    }
    return z2;
  }

  bool operator==(const MlpWeights&) const = default;
};

/// Batch loss and its gradient with respect to every parameter.
struct MlpGradient {
  double loss = 0.0;
  MlpWeights grad;
};

/// loss = mean_i BCE(y_i, sigmoid(logit_i)) + l2 / (2 m) * (|W1|^2 + |W2|^2)
/// over the rows listed in `batch`; biases are not decayed.
inline MlpGradient mlp_loss_and_gradient(const MlpWeights& net, const Matrix& x,
                                         std::span<const int> y,
                                         std::span<const std::size_t> batch, double l2) {
  const std::size_t d = net.inputs;
  const std::size_t hn = net.hidden;
  const double m = static_cast<double>(batch.size());
  MlpGradient out;
  out.grad = MlpWeights(d, hn);
  auto& g = out.grad;

  std::vector<double> z1(hn);
  for (auto i : batch) {
    const auto row = x.row(i);
    double z2 = net.b2;
    for (std::size_t h = 0; h < hn; ++h) {
      double z = net.b1[h];
      const double* w = net.w1.data() + h * d;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * row[j];
      z1[h] = z;
      if (z > 0.0) z2 += net.w2[h] * z;
    }
    out.loss += softplus(z2) - y[i] * z2;
    const double dz2 = (sigmoid(z2) - y[i]) / m;
    g.b2 += dz2;
    for (std::size_t h = 0; h < hn; ++h) {
      if (z1[h] <= 0.0) continue;
      g.w2[h] += dz2 * z1[h];
      const double dz1 = dz2 * net.w2[h];
      g.b1[h] += dz1;
      double* gw = g.w1.data() + h * d;
      for (std::size_t j = 0; j < d; ++j) gw[j] += dz1 * row[j];
    }
  }
  out.loss /= m;

  double sq = 0.0;
  for (std::size_t k = 0; k < net.w1.size(); ++k) {
    sq += net.w1[k] * net.w1[k];
    g.w1[k] += l2 * net.w1[k] / m;
  }
  for (std::size_t h = 0; h < hn; ++h) {
    sq += net.w2[h] * net.w2[h];
    g.w2[h] += l2 * net.w2[h] / m;
  }
  out.loss += 0.5 * l2 * sq / m;
  return out;
}

/// Glorot-uniform weights, zero biases.
inline MlpWeights init_mlp(std::size_t inputs, std::size_t hidden, Rng& rng) {
  MlpWeights net(inputs, hidden);
  const double a1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
  for (auto& w : net.w1) w = rng.uniform(-a1, a1);
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (auto& w : net.w2) w = rng.uniform(-a2, a2);
  return net;
}

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpWeights& shape, const NeuralNetworkParams& p)
      : p_(p), m_(shape.inputs, shape.hidden), v_(shape.inputs, shape.hidden) {}

  void step(MlpWeights& net, const MlpWeights& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(p_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(p_.beta2, static_cast<double>(t_));
    auto update = [&](double& w, double g, double& m, double& v) {
      m = p_.beta1 * m + (1.0 - p_.beta1) * g;
      v = p_.beta2 * v + (1.0 - p_.beta2) * g * g;
      w -= p_.learning_rate * (m / c1) / (std::sqrt(v / c2) + p_.epsilon);
    };
    for (std::size_t k = 0; k < net.w1.size(); ++k) update(net.w1[k], grad.w1[k], m_.w1[k], v_.w1[k]);
    for (std::size_t h = 0; h < net.hidden; ++h) {
      update(net.b1[h], grad.b1[h], m_.b1[h], v_.b1[h]);
      update(net.w2[h], grad.w2[h], m_.w2[h], v_.w2[h]);
    }
    update(net.b2, grad.b2, m_.b2, v_.b2);
  }

 private:
  NeuralNetworkParams p_;
  MlpWeights m_;
  MlpWeights v_;
  std::uint64_t t_ = 0;
};

struct NeuralNetworkModel {
  Standardizer standardizer;
  MlpWeights weights;
  std::size_t epochs_run = 0;   // diagnostics; not persisted
  std::size_t best_epoch = 0;

  double predict_proba(std::span<const double> raw) const {
    return sigmoid(weights.logit(standardizer.transform(raw)));
  }

  nlohmann::json to_json() const {
    return {{"standardizer", standardizer.to_json()},
            {"inputs", weights.inputs},
            {"hidden", weights.hidden},
            {"w1", weights.w1},
            {"b1", weights.b1},
            {"w2", weights.w2},
            {"b2", weights.b2}};
  }

  static NeuralNetworkModel from_json(const nlohmann::json& j, std::size_t n_features) {
    NeuralNetworkModel m;
    m.standardizer = Standardizer::from_json(j.at("standardizer"));
    m.weights.inputs = j.at("inputs").get<std::size_t>();
    m.weights.hidden = j.at("hidden").get<std::size_t>();
    m.weights.w1 = j.at("w1").get<std::vector<double>>();
    m.weights.b1 = j.at("b1").get<std::vector<double>>();
    m.weights.w2 = j.at("w2").get<std::vector<double>>();
    m.weights.b2 = j.at("b2").get<double>();
    const auto& w = m.weights;
    if (w.inputs != n_features || w.w1.size() != w.inputs * w.hidden || w.b1.size() != w.hidden ||
        w.w2.size() != w.hidden || m.standardizer.size() != n_features)
      throw IntegrityError("network parameters do not match their declared shape");
    return m;
  }
};

inline double mlp_accuracy(const MlpWeights& net, const Matrix& x, std::span<const int> y,
                           std::span<const std::size_t> rows) {
  std::size_t correct = 0;
  for (auto i : rows) {
    const int pred = net.logit(x.row(i)) >= 0.0 ? 1 : 0;
    correct += pred == y[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

/// `standardized` holds rows already transformed by `standardizer`.
inline NeuralNetworkModel fit_neural_network(const Matrix& standardized, std::span<const int> y,
                                             Standardizer standardizer,
                                             const NeuralNetworkParams& params,
                                             std::uint64_t seed) {
  const std::size_t n = standardized.rows();
  Rng rng(seed);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::size_t n_val = static_cast<std::size_t>(std::llround(params.val_fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, params.val_fraction > 0.0 ? 1 : 0, n - 1);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  NeuralNetworkModel model;
  model.standardizer = std::move(standardizer);
  MlpWeights net = init_mlp(standardized.cols(), params.hidden, rng);
  AdamOptimizer adam(net, params);

  MlpWeights best = net;
  double best_acc = -1.0;
  std::size_t stale = 0;
  const std::size_t batch = std::max<std::size_t>(1, params.batch_size);
  for (std::size_t epoch = 1; epoch <= params.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(train));
    for (std::size_t start = 0; start < train.size(); start += batch) {
      const std::size_t stop = std::min(start + batch, train.size());
      const std::span<const std::size_t> rows(train.data() + start, stop - start);
      const auto g = mlp_loss_and_gradient(net, standardized, y, rows, params.l2);
      adam.step(net, g.grad);
    }
    model.epochs_run = epoch;
    if (val.empty()) {
      best = net;
      model.best_epoch = epoch;
      continue;
    }
    const double acc = mlp_accuracy(net, standardized, y, val);
    if (acc > best_acc) {
      best_acc = acc;
      best = net;
      model.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= params.early_stop_patience) {
      break;
    }
  }
  model.weights = std::move(best);
  return model;
}

}  // namespace htdetect
