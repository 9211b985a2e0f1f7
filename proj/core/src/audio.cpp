#include "prosody/audio.hpp"

#include <cmath>
#include <numbers>

#include "prosody/error.hpp"

namespace prosody {

FrameSpec FrameSpec::from_ms(int sample_rate_hz, double window_ms, double hop_ms) {
  if (sample_rate_hz <= 0) throw InvalidInputError("sample rate must be positive");
  FrameSpec spec;
  spec.window_len = static_cast<int>(std::lround(window_ms * 1e-3 * sample_rate_hz));
  spec.hop_len = static_cast<int>(std::lround(hop_ms * 1e-3 * sample_rate_hz));
  if (spec.window_len <= 0 || spec.hop_len <= 0 || spec.hop_len > spec.window_len)
    throw InvalidInputError("frame spec must satisfy 0 < hop <= window");
  return spec;
}

std::size_t frame_count(std::size_t n_samples, const FrameSpec& spec) {
  if (spec.window_len <= 0 || spec.hop_len <= 0)
    throw InvalidInputError("frame spec must be positive");
  if (n_samples < static_cast<std::size_t>(spec.window_len)) return 0;
  return 1 + (n_samples - spec.window_len) / spec.hop_len;
}

namespace {

// Hann-windowed sinc low-pass interpolation kernel, `taps` points wide.
double sinc_kernel(double t, double cutoff_ratio, int taps) {
  const double half = taps / 2.0;
  if (t <= -half || t >= half) return 0.0;
  const double pi = std::numbers::pi;
  double s = cutoff_ratio;
  if (t != 0.0) s = cutoff_ratio * std::sin(pi * cutoff_ratio * t) / (pi * cutoff_ratio * t);
  const double window = 0.5 + 0.5 * std::cos(pi * t / half);
  return s * window;
}

}  // namespace

AudioBuffer resample(const AudioBuffer& audio, int target_rate_hz) {
  if (audio.samples.empty()) throw InvalidInputError("resample: empty audio");
  if (audio.sample_rate_hz <= 0) throw InvalidInputError("resample: bad source rate");
  if (target_rate_hz <= 0) throw InvalidInputError("resample: bad target rate");
  if (target_rate_hz == audio.sample_rate_hz) return audio;

  constexpr int kTaps = 64;
  const double ratio = static_cast<double>(target_rate_hz) / audio.sample_rate_hz;
  // Pass band up to 95% of the smaller Nyquist, in source-sample units.
  const double cutoff = 0.95 * std::min(1.0, ratio);
  const std::size_t in_len = audio.samples.size();
  const std::size_t out_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(in_len) * ratio));

  AudioBuffer out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(out_len);

  for (std::size_t n = 0; n < out_len; ++n) {
    const double pos = static_cast<double>(n) / ratio;
    const long center = std::lround(std::floor(pos));
    double acc = 0.0;
    double norm = 0.0;
    for (int k = -kTaps / 2 + 1; k <= kTaps / 2; ++k) {
      const long idx = center + k;
      const double w = sinc_kernel(static_cast<double>(idx) - pos, cutoff, kTaps);
      norm += w;
      if (idx >= 0 && idx < static_cast<long>(in_len)) acc += audio.samples[idx] * w;
    }
    // Per-phase normalization keeps DC gain at 1 regardless of the
    // fractional position.
    out.samples[n] = norm != 0.0 ? acc / norm : 0.0;
  }
  return out;
}

Contour rms_contour(const AudioBuffer& audio, const FrameSpec& spec) {
  if (audio.samples.empty()) throw InvalidInputError("rms_contour: empty audio");
  const std::size_t n = frame_count(audio.samples.size(), spec);
  if (n == 0) throw InvalidInputError("rms_contour: audio shorter than one window");

  Contour contour;
  contour.kind = ContourKind::Rms;
  contour.frame_spec = spec;
  contour.sample_rate_hz = audio.sample_rate_hz;
  contour.values.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double* frame = audio.samples.data() + i * spec.hop_len;
    double acc = 0.0;
    for (int j = 0; j < spec.window_len; ++j) acc += frame[j] * frame[j];
    contour.values[i] = std::sqrt(acc / spec.window_len);
  }
  return contour;
}

}  // namespace prosody
