#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "prosody/audio.hpp"
#include "prosody/rng.hpp"

namespace testing {

inline prosody::AudioBuffer make_silence(int rate, double seconds) {
  prosody::AudioBuffer audio;
  audio.sample_rate_hz = rate;
  audio.samples.assign(static_cast<std::size_t>(rate * seconds), 0.0);
  return audio;
}

inline prosody::AudioBuffer make_sine(int rate, double freq, double seconds, double amplitude,
                                      double phase = 0.0) {
  prosody::AudioBuffer audio;
  audio.sample_rate_hz = rate;
  const std::size_t n = static_cast<std::size_t>(rate * seconds);
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    audio.samples[i] =
        amplitude * std::sin(2.0 * std::numbers::pi * freq * i / rate + phase);
  return audio;
}

// Linear chirp from f0 to f1; instantaneous frequency f0 + (f1-f0)*t/T.
inline prosody::AudioBuffer make_chirp(int rate, double f0, double f1, double seconds,
                                       double amplitude) {
  prosody::AudioBuffer audio;
  audio.sample_rate_hz = rate;
  const std::size_t n = static_cast<std::size_t>(rate * seconds);
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double phase = 2.0 * std::numbers::pi * (f0 * t + (f1 - f0) * t * t / (2.0 * seconds));
    audio.samples[i] = amplitude * std::sin(phase);
  }
  return audio;
}

inline prosody::AudioBuffer make_noise(int rate, double seconds, double amplitude,
                                       std::uint64_t seed) {
  prosody::Rng rng(seed);
  prosody::AudioBuffer audio;
  audio.sample_rate_hz = rate;
  const std::size_t n = static_cast<std::size_t>(rate * seconds);
  audio.samples.resize(n);
  for (auto& s : audio.samples) s = amplitude * (2.0 * rng.uniform() - 1.0);
  return audio;
}

// Speech-ish synthetic utterance: a tone with vibrato and slow amplitude
// modulation. Used to build matched/mismatched prosody families.
inline prosody::AudioBuffer make_utterance(int rate, double seconds, double f0, double amplitude,
                                           std::uint64_t seed) {
  prosody::Rng rng(seed);
  const double vibrato_hz = 4.0 + 2.0 * rng.uniform();
  const double vibrato_depth = 0.02 + 0.02 * rng.uniform();
  const double am_hz = 1.0 + rng.uniform();
  const double am_phase = 2.0 * std::numbers::pi * rng.uniform();

  prosody::AudioBuffer audio;
  audio.sample_rate_hz = rate;
  const std::size_t n = static_cast<std::size_t>(rate * seconds);
  audio.samples.resize(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double inst_freq =
        f0 * (1.0 + vibrato_depth * std::sin(2.0 * std::numbers::pi * vibrato_hz * t));
    phase += 2.0 * std::numbers::pi * inst_freq / rate;
    const double am = 0.75 + 0.25 * std::sin(2.0 * std::numbers::pi * am_hz * t + am_phase);
    audio.samples[i] = amplitude * am * std::sin(phase);
  }
  return audio;
}

// Exhaustive minimum over all monotone warping paths from (0,0) to
// (n-1,m-1) with steps {(1,0),(0,1),(1,1)}; local cost |a_i - b_j|.
// Exponential, fine for the small instances it is used on.
inline double dtw_enumerate(std::span<const double> a, std::span<const double> b, std::size_t i,
                            std::size_t j) {
  const double c = std::abs(a[i] - b[j]);
  if (i + 1 == a.size() && j + 1 == b.size()) return c;
  double best = std::numeric_limits<double>::infinity();
  if (i + 1 < a.size()) best = std::min(best, dtw_enumerate(a, b, i + 1, j));
  if (j + 1 < b.size()) best = std::min(best, dtw_enumerate(a, b, i, j + 1));
  if (i + 1 < a.size() && j + 1 < b.size()) best = std::min(best, dtw_enumerate(a, b, i + 1, j + 1));
  return c + best;
}

inline double dtw_brute_force(std::span<const double> a, std::span<const double> b) {
  return dtw_enumerate(a, b, 0, 0);
}

// Naive DFT magnitude of one real frame at bin k (independent FFT oracle).
inline double dft_magnitude(std::span<const double> x, std::size_t n_fft, std::size_t k) {
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) * n / n_fft;
    re += x[n] * std::cos(angle);
    im += x[n] * std::sin(angle);
  }
  return std::sqrt(re * re + im * im);
}

// Bin with the largest DFT magnitude over bins [0, n_fft/2].
inline std::size_t dft_peak_bin(std::span<const double> x, std::size_t n_fft) {
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 0; k <= n_fft / 2; ++k) {
    const double mag = dft_magnitude(x, n_fft, k);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  return best;
}

}  // namespace testing
