#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace prosody {

// Mono waveform, nominal sample range [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

// Analysis frame geometry in samples. Frames are fully contained in the
// signal, left-aligned at sample 0; no padding. Every extractor in this
// library shares the same convention so contours align frame-for-frame.
struct FrameSpec {
  int window_len = 0;
  int hop_len = 0;

  // Default geometry: 50 ms window, 12.5 ms hop.
  static FrameSpec from_ms(int sample_rate_hz, double window_ms = 50.0, double hop_ms = 12.5);
};

// n = 1 + floor((N - W) / H) for N >= W, else 0.
std::size_t frame_count(std::size_t n_samples, const FrameSpec& spec);

enum class ContourKind { LogF0, Rms };

// Per-frame 1-D time series. For LogF0 the voicing mask has one entry per
// frame and values[i] == 0 exactly where voicing[i] == 0; for Rms the
// voicing vector is empty.
struct Contour {
  std::vector<double> values;
  ContourKind kind = ContourKind::Rms;
  std::vector<std::uint8_t> voicing;
  FrameSpec frame_spec;
  int sample_rate_hz = 0;

  std::size_t size() const { return values.size(); }
  double frame_time_s(std::size_t i) const {
    return static_cast<double>(i) * frame_spec.hop_len / sample_rate_hz;
  }
};

// Sample-rate conversion with a 64-tap windowed-sinc polyphase kernel.
// Output length is round(n * target / source); a pure tone below both
// Nyquist frequencies keeps its peak frequency.
AudioBuffer resample(const AudioBuffer& audio, int target_rate_hz);

// Root-mean-square amplitude of each analysis frame.
Contour rms_contour(const AudioBuffer& audio, const FrameSpec& spec);

}  // namespace prosody
