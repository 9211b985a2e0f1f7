#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace prosody::detail {

// In-place iterative radix-2 Cooley-Tukey; size must be a power of two.
void fft(std::vector<std::complex<double>>& values);

std::size_t next_pow2(std::size_t n);

// |FFT| of a real frame zero-padded to fft_size; returns fft_size/2 + 1 bins.
std::vector<double> magnitude_spectrum(const double* frame, std::size_t frame_len,
                                       std::size_t fft_size);

}  // namespace prosody::detail
