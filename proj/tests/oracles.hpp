#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's numeric code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

inline std::size_t padded_length(std::size_t n) {
  std::size_t p = 8;
  while (p < n) p *= 2;
  return p;
}

/// X[k] = sum_n x[n] exp(-i 2 pi k n / N), evaluated term by term after
/// zero-padding to the next power of two >= max(8, len).
inline std::vector<Complex> direct_dft(const std::vector<double>& x) {
  const std::size_t n = padded_length(x.size());
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t t = 0; t < x.size(); ++t) {
      // Reduce k*t mod N first so the angle stays small and exact.
      const auto kt = static_cast<long double>((k * t) % n);
      const long double angle = -2.0L * std::numbers::pi_v<long double> * kt / static_cast<long double>(n);
      re += x[t] * std::cos(angle);
      im += x[t] * std::sin(angle);
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

/// Feature values in canonical order, evaluated directly from the printed
/// formulas with the documented conventions (64-bin histogram entropy, DC
/// excluded, 0.85 rolloff, 6 contrast bands, argmax fundamental, 5 harmonics).
inline std::vector<double> features(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);
  std::vector<double> out;

  double mu = 0;
  for (double v : x) mu += v;
  mu /= nd;
  double sq = 0;
  for (double v : x) sq += v * v;
  const double rms = std::sqrt(sq / nd);
  double var = 0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= nd;
  const double xmax = *std::max_element(x.begin(), x.end());
  const double xmin = *std::min_element(x.begin(), x.end());
  const bool constant = xmax == xmin;
  if (constant) var = 0;
  const double sd = std::sqrt(var);
  double skew = 0, kurt = 0;
  if (!constant) {
    for (double v : x) {
      skew += std::pow((v - mu) / sd, 3);
      kurt += std::pow((v - mu) / sd, 4);
    }
    skew /= nd;
    kurt /= nd;
  }
  double crest = constant ? (rms > 0 ? 1.0 : 0.0) : xmax / rms;
  double entropy = 0;
  if (!constant) {
    std::map<long, std::size_t> hist;
    for (double v : x) {
      long b = static_cast<long>(std::floor((v - xmin) / ((xmax - xmin) / 64.0)));
      hist[std::min(b, 63L)]++;
    }
    for (auto& [b, c] : hist) {
      const double p = static_cast<double>(c) / nd;
      entropy += -p * std::log(p);
    }
  }
  out = {mu, rms, var, sd, xmax, xmin, xmax - xmin, crest, skew, kurt, sq, entropy};

  const auto X = direct_dft(x);
  const std::size_t N = X.size();
  std::vector<double> f, m;
  for (std::size_t k = 1; k <= N / 2; ++k) {
    f.push_back(static_cast<double>(k) / static_cast<double>(N));
    m.push_back(std::abs(X[k]));
  }
  const std::size_t nb = m.size();
  double total = 0;
  for (double v : m) total += v;
  if (total == 0.0 || total <= 1e-12 * std::abs(X[0])) {
    std::vector<double> deg(13, 0.0);
    deg[2] = 1.0;
    out.insert(out.end(), deg.begin(), deg.end());
    return out;
  }
  double centroid = 0;
  for (std::size_t i = 0; i < nb; ++i) centroid += f[i] * m[i];
  centroid /= total;
  double bw = 0;
  for (std::size_t i = 0; i < nb; ++i) bw += (f[i] - centroid) * (f[i] - centroid) * m[i];
  bw = std::sqrt(bw / total);
  // Geometric mean via the product of n-th roots.
  double geo = 1.0;
  for (double v : m) geo *= std::pow(std::max(v, 1e-20), 1.0 / static_cast<double>(nb));
  const double flat = std::min(1.0, geo / (total / static_cast<double>(nb)));
  double rolloff = f.back();
  for (std::size_t k = 0; k < nb; ++k) {
    double cum = 0;
    for (std::size_t i = 0; i <= k; ++i) cum += m[i];
    if (cum >= 0.85 * total) {
      rolloff = f[k];
      break;
    }
  }
  double sent = 0;
  for (double v : m)
    if (v > 0) sent -= (v / total) * std::log(v / total);
  double contrast = 0;
  int bands = 0;
  for (std::size_t b = 0; b < 6; ++b) {
    const std::size_t lo = b * nb / 6, hi = (b + 1) * nb / 6;
    if (lo == hi) continue;
    double mx = m[lo], mn = m[lo];
    for (std::size_t i = lo; i < hi; ++i) {
      mx = std::max(mx, m[i]);
      mn = std::min(mn, m[i]);
    }
    contrast += mx - mn;
    ++bands;
  }
  contrast /= bands;
  std::size_t k0 = 1;
  for (std::size_t k = 1; k <= nb; ++k)
    if (m[k - 1] > m[k0 - 1]) k0 = k;
  std::array<double, 5> hs{};
  double thd = 0;
  for (std::size_t h = 1; h <= 5; ++h) {
    const std::size_t k = h * k0;
    hs[h - 1] = k <= nb ? m[k - 1] : 0.0;
    if (h >= 2 && k <= nb) thd += std::pow(hs[h - 1] / m[k0 - 1], 2);
  }
  thd = std::sqrt(thd);
  const double mean_m = total / static_cast<double>(nb);
  double variability = 0;
  for (double v : m) variability += (v - mean_m) * (v - mean_m);
  variability /= static_cast<double>(nb);

  out.insert(out.end(), {centroid, bw, flat, rolloff, sent, contrast, thd, hs[0], hs[1], hs[2],
                         hs[3], hs[4], variability});
  return out;
}

/// AUC as P(score+ > score-) + 0.5 P(tie), over all pairs.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic;
  double p_value;
};

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size() * b.size()) / static_cast<double>(a.size() + b.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return {d, std::clamp(p, 0.0, 1.0)};
}

/// Random trace generator for property tests.
inline std::vector<double> random_trace(std::mt19937_64& gen, std::size_t len) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> x(len);
  for (auto& v : x) v = u(gen);
  return x;
}

}  // namespace oracle
