#include "prosody/mel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fft.hpp"
#include "prosody/error.hpp"

namespace prosody {

namespace {

constexpr double kLogFloor = 1e-5;

// HTK mel scale.
double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filterbank spanning 0..Nyquist with edges equally spaced on
// the mel scale, each triangle scaled to unit area (2 / width in Hz).
std::vector<std::vector<double>> build_filterbank(int n_mels, int sample_rate_hz,
                                                  std::size_t fft_size) {
  const std::size_t n_bins = fft_size / 2 + 1;
  const double nyquist = sample_rate_hz / 2.0;
  const double mel_max = hz_to_mel(nyquist);

  std::vector<double> edges_hz(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges_hz[i] = mel_to_hz(mel_max * i / (n_mels + 1));

  std::vector<std::vector<double>> filters(n_mels, std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges_hz[m];
    const double center = edges_hz[m + 1];
    const double hi = edges_hz[m + 2];
    const double scale = 2.0 / (hi - lo);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(fft_size);
      double w = 0.0;
      if (f > lo && f < center) {
        w = (f - lo) / (center - lo);
      } else if (f >= center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      filters[m][k] = w * scale;
    }
  }
  return filters;
}

}  // namespace

MelSpectrogram log_mel(const AudioBuffer& audio, const FrameSpec& spec, int n_mels) {
  if (n_mels < 1) throw InvalidInputError("log_mel: n_mels must be >= 1");
  if (audio.samples.empty()) throw InvalidInputError("log_mel: empty audio");
  const std::size_t n_frames = frame_count(audio.samples.size(), spec);
  if (n_frames == 0) throw InvalidInputError("log_mel: audio shorter than one window");

  const std::size_t fft_size = detail::next_pow2(static_cast<std::size_t>(spec.window_len));
  const auto filters = build_filterbank(n_mels, audio.sample_rate_hz, fft_size);

  std::vector<double> hann(spec.window_len, 1.0);
  if (spec.window_len > 1)
    for (int i = 0; i < spec.window_len; ++i)
      hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (spec.window_len - 1));

  // Fixed affine map of [ln(floor), ln(10)] onto [-4, 4].
  const double log_lo = std::log(kLogFloor);
  const double log_hi = std::log(10.0);
  const double gain = 8.0 / (log_hi - log_lo);

  MelSpectrogram mel;
  mel.n_frames = n_frames;
  mel.n_mels = static_cast<std::size_t>(n_mels);
  mel.data.resize(n_frames * mel.n_mels);

  std::vector<double> windowed(spec.window_len);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double* frame = audio.samples.data() + i * spec.hop_len;
    for (int j = 0; j < spec.window_len; ++j) windowed[j] = frame[j] * hann[j];
    const auto mags = detail::magnitude_spectrum(windowed.data(), windowed.size(), fft_size);

    for (int m = 0; m < n_mels; ++m) {
      double acc = 0.0;
      const auto& filt = filters[m];
      for (std::size_t k = 0; k < mags.size(); ++k) acc += filt[k] * mags[k];
      const double logged = std::log(std::max(acc, kLogFloor));
      mel.at(i, m) = std::clamp(-4.0 + gain * (logged - log_lo), -4.0, 4.0);
    }
  }
  return mel;
}

}  // namespace prosody
