#include "fft.hpp"

#include <cmath>
#include <numbers>

#include "prosody/error.hpp"

namespace prosody::detail {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& values) {
  const std::size_t n = values.size();
  if (n == 0 || (n & (n - 1)) != 0) throw InvalidInputError("fft size must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(values[i], values[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = values[i + k];
        const std::complex<double> v = values[i + k + len / 2] * w;
        values[i + k] = u + v;
        values[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> magnitude_spectrum(const double* frame, std::size_t frame_len,
                                       std::size_t fft_size) {
  std::vector<std::complex<double>> buf(fft_size, {0.0, 0.0});
  for (std::size_t i = 0; i < frame_len; ++i) buf[i] = frame[i];
  fft(buf);
  std::vector<double> mags(fft_size / 2 + 1);
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(buf[i]);
  return mags;
}

}  // namespace prosody::detail
