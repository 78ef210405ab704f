#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "htdetect/features.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace htdetect;

namespace {

double rel_err(double got, double want) {
  const double diff = std::abs(got - want);
  if (diff == 0.0) return 0.0;
  return diff / std::max(std::abs(want), 1e-300);
}

std::vector<double> values_of(const std::vector<double>& x) {
  PowerTrace t;
  t.samples = x;
  return extract(t).values;
}

std::vector<double> cosines(std::size_t n, std::initializer_list<std::pair<double, double>> terms) {
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (auto [k, a] : terms) x[i] += a * std::cos(2 * std::numbers::pi * k * static_cast<double>(i) / n);
  return x;
}

}  // namespace

TEST(TimeFeatures, ConstantTrace) {
  const auto f = time_features(std::vector<double>{5, 5, 5, 5});
  EXPECT_EQ(f.mean, 5);
  EXPECT_EQ(f.rms, 5);
  EXPECT_EQ(f.variance, 0);
  EXPECT_EQ(f.std, 0);
  EXPECT_EQ(f.p2p, 0);
  EXPECT_EQ(f.crest_factor, 1);
  EXPECT_EQ(f.skewness, 0);
  EXPECT_EQ(f.kurtosis, 0);
  EXPECT_EQ(f.energy, 100);
  EXPECT_EQ(f.entropy, 0);
}

TEST(TimeFeatures, ZeroTraceHasZeroCrest) {
  const auto f = time_features(std::vector<double>{0, 0, 0});
  EXPECT_EQ(f.crest_factor, 0);
  EXPECT_EQ(f.rms, 0);
}

TEST(TimeFeatures, Ramp) {
  const auto f = time_features(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(f.mean, 2.5);
  EXPECT_DOUBLE_EQ(f.variance, 1.25);
  EXPECT_NEAR(f.rms, 2.738613, 1e-6);
  EXPECT_DOUBLE_EQ(f.rms, std::sqrt(7.5));
  EXPECT_EQ(f.max, 4);
  EXPECT_EQ(f.min, 1);
  EXPECT_EQ(f.p2p, 3);
  EXPECT_NEAR(f.crest_factor, 1.460593, 1e-6);
  EXPECT_EQ(f.energy, 30);
  EXPECT_NEAR(f.entropy, std::log(4.0), 1e-12);
}

TEST(TimeFeatures, SquareWaveMoments) {
  const auto f = time_features(std::vector<double>{0, 10, 0, 10});
  EXPECT_DOUBLE_EQ(f.mean, 5);
  EXPECT_DOUBLE_EQ(f.std, 5);
  EXPECT_NEAR(f.skewness, 0, 1e-15);
  EXPECT_DOUBLE_EQ(f.kurtosis, 1);
  EXPECT_NEAR(f.entropy, std::log(2.0), 1e-15);
}

TEST(TimeFeatures, Errors) {
  EXPECT_THROW(time_features(std::vector<double>{1}), NumericInputError);
  EXPECT_THROW(time_features(std::vector<double>{1, std::nan("")}), NumericInputError);
}

TEST(FreqFeatures, FlatSpectrum) {
  std::vector<double> impulse(64, 0.0);
  impulse[0] = 1.0;
  const auto s = fft(impulse);
  ASSERT_EQ(s.magnitudes().size(), 32u);
  const auto f = freq_features(s);
  EXPECT_NEAR(f.spectral_flatness, 1.0, 1e-12);
  EXPECT_NEAR(f.spectral_contrast, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.spectral_rolloff, 28.0 / 64.0);
  EXPECT_NEAR(f.spectral_entropy, std::log(32.0), 1e-12);
  EXPECT_FALSE(f.degenerate);
}

TEST(FreqFeatures, PointMass) {
  std::vector<Complex> bins(16, 0.0);
  bins[4] = 3.0;
  bins[12] = 3.0;
  const auto f = freq_features(Spectrum(bins, 16));
  EXPECT_DOUBLE_EQ(f.spectral_centroid, 0.25);
  EXPECT_DOUBLE_EQ(f.spectral_bandwidth, 0.0);
  EXPECT_DOUBLE_EQ(f.spectral_entropy, 0.0);
  EXPECT_DOUBLE_EQ(f.spectral_rolloff, 0.25);
  EXPECT_DOUBLE_EQ(f.harmonic_strength[0], 3.0);
  EXPECT_DOUBLE_EQ(f.thd, 0.0);
}

// In an 8-point transform the k=4 bin is Nyquist, which collects the full
// N*a of a real cosine rather than N*a/2. A half-amplitude cosine there
// therefore matches the k=2 fundamental and the distortion ratio is 1.
TEST(FreqFeatures, HarmonicAtNyquistOfEightPoints) {
  const auto x = cosines(8, {{2, 1.0}, {4, 0.5}});
  const auto dft = oracle::direct_dft(x);
  EXPECT_NEAR(std::abs(dft[2]), 4.0, 1e-12);
  EXPECT_NEAR(std::abs(dft[4]), 4.0, 1e-12);

  const auto f = freq_features(fft(x));
  EXPECT_DOUBLE_EQ(f.spectral_centroid, (0.25 * 4 + 0.5 * 4) / 8.0);
  EXPECT_NEAR(f.harmonic_strength[0], 4.0, 1e-12);
  EXPECT_NEAR(f.harmonic_strength[1], 4.0, 1e-12);
  EXPECT_EQ(f.harmonic_strength[2], 0.0);
  EXPECT_NEAR(f.thd, 1.0, 1e-12);
}

TEST(FreqFeatures, SecondHarmonicAtHalfAmplitude) {
  const auto x = cosines(16, {{2, 1.0}, {4, 0.5}});
  const auto f = freq_features(fft(x));
  EXPECT_NEAR(f.harmonic_strength[0], 8.0, 1e-12);
  EXPECT_NEAR(f.harmonic_strength[1], 4.0, 1e-12);
  EXPECT_NEAR(f.harmonic_strength[2], 0.0, 1e-12);
  EXPECT_NEAR(f.harmonic_strength[3], 0.0, 1e-12);
  EXPECT_EQ(f.harmonic_strength[4], 0.0);
  EXPECT_NEAR(f.thd, 0.5, 1e-12);
}

TEST(FreqFeatures, FundamentalTiesGoToLowestBin) {
  // Exact tie between bins 3 and 6; rounding in a real transform would pick a side.
  std::vector<Complex> bins(32);
  bins[3] = bins[29] = bins[6] = bins[26] = Complex(16.0, 0.0);
  const auto f = freq_features(Spectrum(bins, 32));
  EXPECT_NEAR(f.harmonic_strength[0], 16.0, 1e-9);
  EXPECT_NEAR(f.harmonic_strength[1], 16.0, 1e-9);
  EXPECT_NEAR(f.thd, 1.0, 1e-9);
}

TEST(FreqFeatures, DegenerateConstant) {
  for (std::size_t n : {8u, 16u, 64u}) {
    const auto f = freq_features(fft(std::vector<double>(n, 3.0)));
    EXPECT_TRUE(f.degenerate);
    EXPECT_EQ(f.spectral_flatness, 1.0);
    EXPECT_EQ(f.spectral_centroid, 0.0);
    EXPECT_EQ(f.thd, 0.0);
    EXPECT_EQ(f.spectral_variability, 0.0);
  }
  const auto zero = freq_features(fft(std::vector<double>(10, 0.0)));
  EXPECT_TRUE(zero.degenerate);
}

TEST(FreqFeatures, PaddedConstantIsNotDegenerate) {
  // Zero padding turns a short constant trace into a step.
  const auto f = freq_features(fft(std::vector<double>{5, 5, 5, 5}));
  EXPECT_FALSE(f.degenerate);
  EXPECT_GT(f.spectral_centroid, 0.0);
}

TEST(FreqFeatures, Bounds) {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 200; ++rep) {
    const auto f = freq_features(fft(oracle::random_trace(gen, 8 + rep % 120)));
    EXPECT_GE(f.spectral_flatness, 0.0);
    EXPECT_LE(f.spectral_flatness, 1.0);
    EXPECT_GT(f.spectral_rolloff, 0.0);
    EXPECT_LE(f.spectral_rolloff, 0.5);
    EXPECT_GE(f.spectral_entropy, 0.0);
    EXPECT_GE(f.spectral_bandwidth, 0.0);
    EXPECT_GE(f.thd, 0.0);
  }
}

TEST(Extract, ConstantTraceVector) {
  PowerTrace t;
  t.samples = std::vector<double>(16, 5.0);
  t.state = TrojanState::Triggered;
  t.trojan_id = "T42";
  const auto v = extract(t);
  ASSERT_EQ(v.values.size(), kFeatureCount);
  EXPECT_TRUE(v.degenerate_spectrum);
  EXPECT_EQ(v.label, 1);
  EXPECT_EQ(v.trojan_id, "T42");
  EXPECT_EQ(v.values[feature_index("mean")], 5.0);
  EXPECT_EQ(v.values[feature_index("crest_factor")], 1.0);
  EXPECT_EQ(v.values[feature_index("spectral_flatness")], 1.0);
  for (const char* name : {"variance", "p2p", "entropy", "skewness", "kurtosis", "spectral_centroid",
                           "thd", "harmonic_strength_1", "spectral_variability"})
    EXPECT_EQ(v.values[feature_index(name)], 0.0) << name;
}

TEST(Extract, SchemaOrder) {
  const auto& names = feature_names();
  ASSERT_EQ(names.size(), 25u);
  EXPECT_EQ(names.front(), "mean");
  EXPECT_EQ(names[11], "entropy");
  EXPECT_EQ(names[12], "spectral_centroid");
  EXPECT_EQ(names.back(), "spectral_variability");
  std::mt19937_64 gen(1);
  for (std::size_t len : {2u, 9u, 100u}) EXPECT_EQ(values_of(oracle::random_trace(gen, len)).size(), 25u);
  EXPECT_EQ(canonical_schema_fingerprint(), schema_fingerprint(names));
  auto other = names;
  std::swap(other[0], other[1]);
  EXPECT_NE(schema_fingerprint(other), canonical_schema_fingerprint());
}

TEST(Extract, UnknownFeatureListsAllNames) {
  try {
    feature_index("varience");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& n : feature_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
  }
}

TEST(Extract, VarianceInflationRaisesVarianceFeature) {
  SyntheticConfig c;
  c.n_per_class = 200;
  c.effect = SyntheticEffect::VarianceInflation;
  c.seed = 21;
  double sum[2] = {0, 0};
  for (const auto& v : extract_all(generate_synthetic(c))) sum[v.label] += v.values[feature_index("variance")];
  EXPECT_GT(sum[1], sum[0]);
}

TEST(FeatureOracle, RandomTraces) {
  std::mt19937_64 gen(20240601);
  std::uniform_int_distribution<std::size_t> len(2, 300);
  const auto& names = feature_names();
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = oracle::random_trace(gen, len(gen));
    const auto got = values_of(x);
    const auto want = oracle::features(x);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t j = 0; j < got.size(); ++j)
      ASSERT_LT(rel_err(got[j], want[j]), 1e-9) << names[j] << " rep " << rep << " len " << x.size();
  }
}

TEST(FeatureProperty, ShiftInvariance) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = oracle::random_trace(gen, 16 + rep);
    const double c = -20.0 + 0.2 * rep;
    auto y = x;
    for (auto& v : y) v += c;
    const auto a = time_features(x), b = time_features(y);
    EXPECT_NEAR(b.mean, a.mean + c, 1e-9);
    EXPECT_NEAR(b.variance, a.variance, 1e-9);
    EXPECT_NEAR(b.std, a.std, 1e-9);
    EXPECT_NEAR(b.p2p, a.p2p, 1e-9);
    EXPECT_NEAR(b.skewness, a.skewness, 1e-9);
    EXPECT_NEAR(b.kurtosis, a.kurtosis, 1e-9);
  }
}

TEST(FeatureProperty, ScaleCovariance) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> scale(0.05, 20.0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = oracle::random_trace(gen, 8 + rep);
    const double c = scale(gen);
    auto y = x;
    for (auto& v : y) v *= c;
    const auto a = time_features(x), b = time_features(y);
    EXPECT_LT(rel_err(b.rms, c * a.rms), 1e-9);
    EXPECT_LT(rel_err(b.std, c * a.std), 1e-9);
    EXPECT_LT(rel_err(b.max, c * a.max), 1e-9);
    EXPECT_LT(rel_err(b.min, c * a.min), 1e-9);
    EXPECT_LT(rel_err(b.p2p, c * a.p2p), 1e-9);
    EXPECT_LT(rel_err(b.energy, c * c * a.energy), 1e-9);
    EXPECT_NEAR(b.crest_factor, a.crest_factor, 1e-9);
    EXPECT_NEAR(b.skewness, a.skewness, 1e-9);
    EXPECT_NEAR(b.kurtosis, a.kurtosis, 1e-9);

    const auto fa = freq_features(fft(x)), fb = freq_features(fft(y));
    EXPECT_NEAR(fb.spectral_centroid, fa.spectral_centroid, 1e-9);
    EXPECT_NEAR(fb.spectral_bandwidth, fa.spectral_bandwidth, 1e-9);
    EXPECT_NEAR(fb.spectral_flatness, fa.spectral_flatness, 1e-9);
    EXPECT_EQ(fb.spectral_rolloff, fa.spectral_rolloff);
    EXPECT_NEAR(fb.spectral_entropy, fa.spectral_entropy, 1e-9);
    EXPECT_NEAR(fb.thd, fa.thd, 1e-9);
    EXPECT_LT(rel_err(fb.spectral_variability, c * c * fa.spectral_variability), 1e-9);
    for (std::size_t h = 0; h < kHarmonics; ++h)
      EXPECT_NEAR(fb.harmonic_strength[h], c * fa.harmonic_strength[h], 1e-9 * std::max(1.0, c * fa.harmonic_strength[h]));
  }
}

TEST(Standardizer, TwoPointFit) {
  std::vector<FeatureVector> train(2);
  train[0].values = {0.0};
  train[1].values = {2.0};
  const auto s = fit_standardizer(train);
  EXPECT_EQ(s.mean(), std::vector<double>{1.0});
  EXPECT_EQ(s.std(), std::vector<double>{1.0});
  const auto out = s.apply(train[1]);
  EXPECT_EQ(out.values, std::vector<double>{1.0});
  EXPECT_EQ(train[1].values, std::vector<double>{2.0});
}

TEST(Standardizer, ConstantColumnFloored) {
  std::vector<FeatureVector> train(3);
  for (auto& v : train) v.values = {7.0, 1.0};
  train[1].values[1] = 2.0;
  const auto s = fit_standardizer(train);
  EXPECT_EQ(s.std()[0], Standardizer::kStdFloor);
  for (const auto& v : train) EXPECT_EQ(s.apply(v).values[0], 0.0);
}

TEST(Standardizer, FitSetIsCentredAndScaled) {
  SyntheticConfig c;
  c.n_per_class = 60;
  const auto vectors = extract_all(generate_synthetic(c));
  const auto s = fit_standardizer(vectors);
  const std::size_t d = kFeatureCount;
  std::vector<double> mean(d, 0.0), sq(d, 0.0);
  for (const auto& v : vectors) {
    const auto z = s.apply(v).values;
    for (std::size_t j = 0; j < d; ++j) {
      mean[j] += z[j];
      sq[j] += z[j] * z[j];
    }
  }
  const double n = static_cast<double>(vectors.size());
  for (std::size_t j = 0; j < d; ++j) {
    EXPECT_LT(std::abs(mean[j] / n), 1e-9) << feature_names()[j];
    if (s.std()[j] > Standardizer::kStdFloor) {
      EXPECT_NEAR(std::sqrt(sq[j] / n - (mean[j] / n) * (mean[j] / n)), 1.0, 1e-9) << feature_names()[j];
    }
  }
  EXPECT_EQ(Standardizer::from_json(s.to_json()), s);
}

TEST(Standardizer, NeedsTwoVectors) {
  EXPECT_THROW(fit_standardizer(std::vector<FeatureVector>{}), FitError);
  EXPECT_THROW(fit_standardizer(std::vector<FeatureVector>(1)), FitError);
}

TEST(FeatureCsv, RoundTrip) {
  testing_support::TempDir dir;
  SyntheticConfig c;
  c.n_per_class = 5;
  const auto vectors = extract_all(generate_synthetic(c));
  write_feature_csv(vectors, dir / "f.csv");
  const auto text = testing_support::read_file(dir / "f.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')).substr(0, 25), "trojan_id,label,mean,rms,");
  auto back = read_feature_csv(dir / "f.csv");
  ASSERT_EQ(back.size(), vectors.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].values, vectors[i].values);
    EXPECT_EQ(back[i].label, vectors[i].label);
    EXPECT_EQ(back[i].trojan_id, vectors[i].trojan_id);
  }
}
