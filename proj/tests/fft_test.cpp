#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "htdetect/fft.hpp"
#include "oracles.hpp"

using namespace htdetect;

namespace {

double max_deviation(const Spectrum& s, const std::vector<oracle::Complex>& ref) {
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(s[k] - ref[k]));
  return worst;
}

}  // namespace

TEST(Fft, UnitImpulse) {
  const auto s = fft(std::vector<double>{1, 0, 0, 0, 0, 0, 0, 0});
  ASSERT_EQ(s.n_fft(), 8u);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_DOUBLE_EQ(s[k].real(), 1.0);
    EXPECT_DOUBLE_EQ(s[k].imag(), 0.0);
  }
}

TEST(Fft, DcOnly) {
  const auto s = fft(std::vector<double>(8, 1.0));
  EXPECT_NEAR(s[0].real(), 8.0, 1e-15);
  for (std::size_t k = 1; k < 8; ++k) EXPECT_LT(std::abs(s[k]), 1e-15);
  for (const auto& b : magnitude_spectrum(s)) EXPECT_LT(b.mag, 1e-15);
}

TEST(Fft, ShortSignalPaddedToEight) {
  const std::vector<double> x{0, 1, 0, -1};
  const auto s = fft(x);
  EXPECT_EQ(s.n_fft(), 8u);
  EXPECT_EQ(s.signal_length(), 4u);
  EXPECT_LT(max_deviation(s, oracle::direct_dft(x)), 1e-12);
}

TEST(Fft, PaddingLengths) {
  EXPECT_EQ(fft_size_for(2), 8u);
  EXPECT_EQ(fft_size_for(8), 8u);
  EXPECT_EQ(fft_size_for(9), 16u);
  EXPECT_EQ(fft_size_for(64), 64u);
  EXPECT_EQ(fft_size_for(65), 128u);
}

TEST(Fft, CosineMagnitude) {
  std::vector<double> x(8);
  for (int n = 0; n < 8; ++n) x[n] = std::cos(2 * std::numbers::pi * 2 * n / 8);
  const auto bins = magnitude_spectrum(fft(x));
  ASSERT_EQ(bins.size(), 4u);
  for (const auto& b : bins) {
    if (b.freq == 0.25)
      EXPECT_NEAR(b.mag, 4.0, 1e-12);
    else
      EXPECT_LT(b.mag, 1e-12);
  }
}

TEST(Fft, MagnitudeViewLayout) {
  std::vector<double> x(64, 0.0);
  x[3] = 1.0;
  const auto s = fft(x);
  const auto bins = magnitude_spectrum(s);
  ASSERT_EQ(bins.size(), 32u);
  EXPECT_DOUBLE_EQ(bins.front().freq, 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(bins.back().freq, 0.5);
  for (std::size_t i = 0; i < bins.size(); ++i) EXPECT_DOUBLE_EQ(bins[i].mag, s.magnitudes()[i]);
}

TEST(Fft, Errors) {
  EXPECT_THROW(fft(std::vector<double>{1.0}), NumericInputError);
  EXPECT_THROW(fft(std::vector<double>{}), NumericInputError);
  EXPECT_THROW(fft(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}), NumericInputError);
  EXPECT_THROW(fft(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}), NumericInputError);
}

TEST(FftProperty, MatchesDirectDft) {
  std::mt19937_64 gen(1);
  for (std::size_t len = 2; len <= 64; ++len) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto x = oracle::random_trace(gen, len);
      EXPECT_LT(max_deviation(fft(x), oracle::direct_dft(x)), 1e-10) << "len " << len;
    }
  }
}

TEST(FftProperty, Linearity) {
  std::mt19937_64 gen(2);
  for (std::size_t len : {8u, 13u, 32u, 50u, 64u, 200u}) {
    const auto x = oracle::random_trace(gen, len);
    const auto y = oracle::random_trace(gen, len);
    const double a = 1.7, b = -0.3;
    std::vector<double> z(len);
    for (std::size_t i = 0; i < len; ++i) z[i] = a * x[i] + b * y[i];
    const auto fx = fft(x), fy = fft(y), fz = fft(z);
    for (std::size_t k = 0; k < fz.n_fft(); ++k)
      EXPECT_LT(std::abs(fz[k] - (a * fx[k] + b * fy[k])), 1e-9);
  }
}

TEST(FftProperty, Parseval) {
  std::mt19937_64 gen(3);
  for (std::size_t len : {2u, 8u, 17u, 64u, 100u, 1000u}) {
    const auto x = oracle::random_trace(gen, len);
    const auto s = fft(x);
    double time = 0, freq = 0;
    for (double v : x) time += v * v;
    for (const auto& c : s.bins()) freq += std::norm(c);
    freq /= static_cast<double>(s.n_fft());
    EXPECT_LT(std::abs(time - freq) / time, 1e-9);
  }
}

TEST(FftProperty, ConjugateSymmetry) {
  std::mt19937_64 gen(4);
  for (std::size_t len : {8u, 31u, 64u, 128u}) {
    const auto s = fft(oracle::random_trace(gen, len));
    const std::size_t n = s.n_fft();
    for (std::size_t k = 1; k < n; ++k) EXPECT_LT(std::abs(s[k] - std::conj(s[n - k])), 1e-10);
    EXPECT_LT(std::abs(s[0].imag()), 1e-10);
    EXPECT_LT(std::abs(s[n / 2].imag()), 1e-10);
  }
}
