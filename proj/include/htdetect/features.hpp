#pragma once

// Time- and frequency-domain features of power traces and the fixed
// 25-value feature vector consumed by the classifiers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "htdetect/error.hpp"
#include "htdetect/fft.hpp"
#include "htdetect/random.hpp"
#include "htdetect/trace_io.hpp"

namespace htdetect {

inline constexpr std::size_t kEntropyBins = 64;
inline constexpr double kRolloffFraction = 0.85;
inline constexpr std::size_t kContrastBands = 6;
inline constexpr std::size_t kHarmonics = 5;
inline constexpr double kFlatnessFloor = 1e-20;

struct TimeFeatures {
  double mean = 0, rms = 0, variance = 0, std = 0, max = 0, min = 0, p2p = 0;
  double crest_factor = 0, skewness = 0, kurtosis = 0, energy = 0, entropy = 0;
};

struct FreqFeatures {
  double spectral_centroid = 0, spectral_bandwidth = 0, spectral_flatness = 0;
  double spectral_rolloff = 0, spectral_entropy = 0, spectral_contrast = 0, thd = 0;
  std::array<double, kHarmonics> harmonic_strength{};
  double spectral_variability = 0;
  // Set when every non-DC magnitude vanishes; all fields are then 0 except
  // flatness, which is 1.
  bool degenerate = false;
};

/// Shannon entropy (natural log) of a 64-bin equal-width histogram over
/// [min, max] with p = count / n.
inline double histogram_entropy(std::span<const double> x, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  std::array<std::size_t, kEntropyBins> counts{};
  const double width = (hi - lo) / static_cast<double>(kEntropyBins);
  for (double v : x) {
    auto bin = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(bin, kEntropyBins - 1)]++;
  }
  const double n = static_cast<double>(x.size());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

inline TimeFeatures time_features(std::span<const double> x) {
  if (x.size() < 2) throw NumericInputError("time features need at least 2 samples");
  validate_samples(x);
  const double n = static_cast<double>(x.size());

  TimeFeatures f;
  double sum = 0.0, sum_sq = 0.0;
  f.max = x[0];
  f.min = x[0];
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
    f.max = std::max(f.max, v);
    f.min = std::min(f.min, v);
  }
  f.mean = sum / n;
  f.energy = sum_sq;
  f.rms = std::sqrt(sum_sq / n);
  f.p2p = f.max - f.min;

  double m2 = 0.0;
  for (double v : x) m2 += (v - f.mean) * (v - f.mean);
  f.variance = m2 / n;
  f.std = std::sqrt(f.variance);

  if (f.std > 0.0 && f.p2p > 0.0) {
    double m3 = 0.0, m4 = 0.0;
    for (double v : x) {
      const double z = (v - f.mean) / f.std;
      m3 += z * z * z;
      m4 += z * z * z * z;
    }
    f.skewness = m3 / n;
    f.kurtosis = m4 / n;
    f.crest_factor = f.rms > 0.0 ? f.max / f.rms : 0.0;
  } else {
    f.variance = 0.0;
    f.std = 0.0;
    f.crest_factor = f.rms > 0.0 ? 1.0 : 0.0;
  }
  f.entropy = histogram_entropy(x, f.min, f.max);
  return f;
}

inline TimeFeatures time_features(const PowerTrace& trace) { return time_features(trace.samples); }

inline FreqFeatures freq_features(const Spectrum& spectrum) {
  const auto mags = spectrum.magnitudes();
  const std::size_t n = mags.size();
  if (n < 4) throw ShapeError("frequency features need at least 4 positive-frequency bins");
  auto freq = [&](std::size_t i) { return spectrum.bin_freq(i + 1); };

  FreqFeatures f;
  const double total = std::accumulate(mags.begin(), mags.end(), 0.0);
  const double dc = std::abs(spectrum[0]);
  if (total == 0.0 || total <= 1e-12 * dc) {
    f.degenerate = true;
    f.spectral_flatness = 1.0;
    return f;
  }

  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) weighted += freq(i) * mags[i];
  f.spectral_centroid = weighted / total;

  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = freq(i) - f.spectral_centroid;
    spread += d * d * mags[i];
  }
  f.spectral_bandwidth = std::sqrt(spread / total);

  double log_sum = 0.0;
  for (double m : mags) log_sum += std::log(std::max(m, kFlatnessFloor));
  const double arithmetic = total / static_cast<double>(n);
  f.spectral_flatness = std::clamp(std::exp(log_sum / static_cast<double>(n)) / arithmetic, 0.0, 1.0);

  const double target = kRolloffFraction * total;
  double cumulative = 0.0;
  f.spectral_rolloff = freq(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += mags[i];
    if (cumulative >= target) {
      f.spectral_rolloff = freq(i);
      break;
    }
  }

  for (double m : mags) {
    if (m <= 0.0) continue;
    const double p = m / total;
    f.spectral_entropy -= p * std::log(p);
  }
  f.spectral_entropy = std::max(f.spectral_entropy, 0.0);

  // Equal-width bands; bands left empty on very short spectra are skipped.
  double contrast = 0.0;
  std::size_t bands = 0;
  for (std::size_t b = 0; b < kContrastBands; ++b) {
    const std::size_t lo = b * n / kContrastBands;
    const std::size_t hi = (b + 1) * n / kContrastBands;
    if (lo == hi) continue;
    const auto [mn, mx] = std::minmax_element(mags.begin() + static_cast<std::ptrdiff_t>(lo),
                                              mags.begin() + static_cast<std::ptrdiff_t>(hi));
    contrast += *mx - *mn;
    ++bands;
  }
  f.spectral_contrast = contrast / static_cast<double>(bands);

  // Fundamental: strongest non-DC bin (lowest on ties). Harmonic h sits at
  // bin h * k0 exactly; bins past Nyquist contribute nothing.
  const std::size_t k0 =
      static_cast<std::size_t>(std::max_element(mags.begin(), mags.end()) - mags.begin()) + 1;
  const double fundamental = mags[k0 - 1];
  double thd_sq = 0.0;
  for (std::size_t h = 1; h <= kHarmonics; ++h) {
    const std::size_t k = h * k0;
    const double mag = k <= n ? mags[k - 1] : 0.0;
    f.harmonic_strength[h - 1] = mag;
    if (h >= 2 && k <= n) thd_sq += (mag / fundamental) * (mag / fundamental);
  }
  f.thd = std::sqrt(thd_sq);

  double var = 0.0;
  for (double m : mags) var += (m - arithmetic) * (m - arithmetic);
  f.spectral_variability = var / static_cast<double>(n);
  return f;
}

// ---------------------------------------------------------------------------
// Feature vectors
// ---------------------------------------------------------------------------

inline constexpr std::size_t kFeatureCount = 25;

inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "mean",
      "rms",
      "variance",
      "std",
      "max",
      "min",
      "p2p",
      "crest_factor",
      "skewness",
      "kurtosis",
      "energy",
      "entropy",
      "spectral_centroid",
      "spectral_bandwidth",
      "spectral_flatness",
      "spectral_rolloff",
      "spectral_entropy",
      "spectral_contrast",
      "thd",
      "harmonic_strength_1",
      "harmonic_strength_2",
      "harmonic_strength_3",
      "harmonic_strength_4",
      "harmonic_strength_5",
      "spectral_variability",
  };
  return names;
}

inline std::uint64_t schema_fingerprint(std::span<const std::string> names) {
  std::uint64_t h = fnv1a64(std::to_string(names.size()));
  for (const auto& name : names) h = fnv1a64(name, fnv1a64("\n", h));
  return h;
}

inline std::uint64_t canonical_schema_fingerprint() {
  static const std::uint64_t fp = schema_fingerprint(feature_names());
  return fp;
}

/// Index of `name` in the canonical schema; ConfigError listing every valid
/// name otherwise.
inline std::size_t feature_index(std::string_view name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  std::string msg = "unknown feature '" + std::string(name) + "'; valid names:";
  for (const auto& n : names) msg += " " + n;
  throw ConfigError(msg);
}

struct FeatureVector {
  std::vector<double> values;
  int label = 0;  // 1 = triggered
  std::string trojan_id;
  std::uint64_t schema = canonical_schema_fingerprint();
  bool degenerate_spectrum = false;

  bool operator==(const FeatureVector&) const = default;
};

inline FeatureVector assemble(const TimeFeatures& t, const FreqFeatures& f) {
  FeatureVector v;
  v.values = {t.mean,
              t.rms,
              t.variance,
              t.std,
              t.max,
              t.min,
              t.p2p,
              t.crest_factor,
              t.skewness,
              t.kurtosis,
              t.energy,
              t.entropy,
              f.spectral_centroid,
              f.spectral_bandwidth,
              f.spectral_flatness,
              f.spectral_rolloff,
              f.spectral_entropy,
              f.spectral_contrast,
              f.thd,
              f.harmonic_strength[0],
              f.harmonic_strength[1],
              f.harmonic_strength[2],
              f.harmonic_strength[3],
              f.harmonic_strength[4],
              f.spectral_variability};
  v.degenerate_spectrum = f.degenerate;
  return v;
}

inline FeatureVector extract(const PowerTrace& trace) {
  FeatureVector v = assemble(time_features(trace.samples), freq_features(fft(trace.samples)));
  v.label = trace.label();
  v.trojan_id = trace.trojan_id;
  return v;
}

inline std::vector<FeatureVector> extract_all(const Dataset& ds) {
  std::vector<FeatureVector> out;
  out.reserve(ds.size());
  for (const auto& t : ds.traces) out.push_back(extract(t));
  return out;
}

/// Per-feature z-scoring fitted on a training set.
class Standardizer {
 public:
  static constexpr double kStdFloor = 1e-12;

  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> std)
      : mean_(std::move(mean)), std_(std::move(std)) {}

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& std() const { return std_; }
  std::size_t size() const { return mean_.size(); }

  std::vector<double> transform(std::span<const double> row) const {
    if (row.size() != mean_.size())
      throw SchemaError("standardizer expects " + std::to_string(mean_.size()) + " features, got " +
                        std::to_string(row.size()));
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean_[j]) / std_[j];
    return out;
  }

  FeatureVector apply(const FeatureVector& v) const {
    FeatureVector out = v;
    out.values = transform(v.values);
    return out;
  }

  nlohmann::json to_json() const { return {{"mean", mean_}, {"std", std_}}; }

  static Standardizer from_json(const nlohmann::json& j) {
    return Standardizer(j.at("mean").get<std::vector<double>>(),
                        j.at("std").get<std::vector<double>>());
  }

  bool operator==(const Standardizer&) const = default;

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
};

/// Population mean/std per column; std floored at Standardizer::kStdFloor.
inline Standardizer fit_standardizer(std::span<const FeatureVector> train) {
  if (train.size() < 2) throw FitError("standardizer needs at least 2 training vectors");
  const std::size_t d = train.front().values.size();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (const auto& v : train) {
    if (v.values.size() != d) throw SchemaError("ragged feature vectors");
    for (std::size_t j = 0; j < d; ++j) mean[j] += v.values[j];
  }
  const double n = static_cast<double>(train.size());
  for (auto& m : mean) m /= n;
  for (const auto& v : train)
    for (std::size_t j = 0; j < d; ++j) sd[j] += (v.values[j] - mean[j]) * (v.values[j] - mean[j]);
  for (auto& s : sd) s = std::max(std::sqrt(s / n), Standardizer::kStdFloor);
  return Standardizer(std::move(mean), std::move(sd));
}

// ---------------------------------------------------------------------------
// Feature CSV: header "trojan_id,label,<25 canonical names>"
// ---------------------------------------------------------------------------

inline void write_feature_csv(std::span<const FeatureVector> vectors,
                              const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "trojan_id,label";
  for (const auto& name : feature_names()) out << ',' << name;
  out << '\n';
  for (const auto& v : vectors) {
    if (v.schema != canonical_schema_fingerprint() || v.values.size() != kFeatureCount)
      throw SchemaError("feature CSV holds canonical-schema vectors only");
    out << v.trojan_id << ',' << v.label;
    for (double x : v.values) out << ',' << detail::format_real(x);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<FeatureVector> read_feature_csv(const std::filesystem::path& path) {
  const std::string source = path.string();
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw EmptyDatasetError(source + ": empty feature file");
  const auto header = detail::split_cells(lines.front().second);
  if (header.size() != kFeatureCount + 2 || detail::trim(header[0]) != "trojan_id" ||
      detail::trim(header[1]) != "label")
    throw SchemaError(source + ": unexpected feature header");
  for (std::size_t j = 0; j < kFeatureCount; ++j)
    if (detail::trim(header[j + 2]) != feature_names()[j])
      throw SchemaError(source + ": column " + std::to_string(j + 3) + " should be '" +
                        feature_names()[j] + "'");
  std::vector<FeatureVector> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [number, text] = lines[r];
    const auto cells = detail::split_cells(text);
    if (cells.size() != header.size())
      throw ShapeError(source + ": row " + std::to_string(number) + " has wrong cell count");
    FeatureVector v;
    v.trojan_id = std::string(detail::trim(cells[0]));
    const auto label = detail::trim(cells[1]);
    if (label != "0" && label != "1") throw ParseError(source, number, 2, "label must be 0 or 1");
    v.label = label == "1" ? 1 : 0;
    for (std::size_t j = 2; j < cells.size(); ++j) {
      auto x = detail::parse_real(cells[j]);
      if (!x) throw ParseError(source, number, j + 1, "not a finite real");
      v.values.push_back(*x);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace htdetect
