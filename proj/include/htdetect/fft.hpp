#pragma once

// Radix-2 Cooley-Tukey transform of real power traces.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "htdetect/error.hpp"

namespace htdetect {

using Complex = std::complex<double>;

inline constexpr std::size_t kMinFftSize = 8;

/// Next power of two >= max(kMinFftSize, n).
inline std::size_t fft_size_for(std::size_t n) {
  return std::bit_ceil(std::max(n, kMinFftSize));
}

/// In-place iterative radix-2 DIT transform; data.size() must be a power of two.
inline void fft_inplace(std::span<Complex> data) {
  const std::size_t n = data.size();
  if (n < 2) return;
  if (!std::has_single_bit(n)) throw ShapeError("fft length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  // Twiddles are evaluated directly rather than by recurrence.
  std::vector<Complex> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle[k] = {std::cos(angle), std::sin(angle)};
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex t = twiddle[k * stride] * data[start + k + half];
        const Complex u = data[start + k];
        data[start + k] = u + t;
        data[start + k + half] = u - t;
      }
    }
  }
}

/// Frequency-domain view of one trace. Frequencies are normalized
/// (cycles/sample) since traces carry no sample rate.
class Spectrum {
 public:
  Spectrum(std::vector<Complex> bins, std::size_t signal_length)
      : bins_(std::move(bins)), signal_length_(signal_length) {
    if (bins_.size() < kMinFftSize || !std::has_single_bit(bins_.size()))
      throw ShapeError("spectrum length must be a power of two >= 8");
    magnitudes_.reserve(bins_.size() / 2);
    for (std::size_t k = 1; k <= bins_.size() / 2; ++k) magnitudes_.push_back(std::abs(bins_[k]));
  }

  std::size_t n_fft() const { return bins_.size(); }
  std::size_t signal_length() const { return signal_length_; }
  std::span<const Complex> bins() const { return bins_; }
  const Complex& operator[](std::size_t k) const { return bins_[k]; }

  double bin_freq(std::size_t k) const {
    return static_cast<double>(k) / static_cast<double>(bins_.size());
  }

  /// |X[k]| for k = 1..N/2; element i belongs to bin i + 1.
  std::span<const double> magnitudes() const { return magnitudes_; }

 private:
  std::vector<Complex> bins_;
  std::size_t signal_length_;
  std::vector<double> magnitudes_;
};

/// Zero-pads to fft_size_for(samples.size()) and transforms the whole trace.
inline Spectrum fft(std::span<const double> samples) {
  if (samples.size() < 2) throw NumericInputError("fft needs at least 2 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i]))
      throw NumericInputError("fft: non-finite sample at index " + std::to_string(i));
  }
  std::vector<Complex> data(fft_size_for(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) data[i] = samples[i];
  fft_inplace(data);
  return Spectrum(std::move(data), samples.size());
}

struct SpectralBin {
  double freq;
  double mag;
};

/// (k/N, |X[k]|) for k = 1..N/2, DC excluded.
inline std::vector<SpectralBin> magnitude_spectrum(const Spectrum& spectrum) {
  std::vector<SpectralBin> out;
  const auto mags = spectrum.magnitudes();
  out.reserve(mags.size());
  for (std::size_t i = 0; i < mags.size(); ++i) out.push_back({spectrum.bin_freq(i + 1), mags[i]});
  return out;
}

}  // namespace htdetect
