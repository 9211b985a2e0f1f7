#pragma once

#include <cstddef>
#include <vector>

#include "prosody/audio.hpp"

namespace prosody {

// Log-mel spectrogram, row-major n_frames x n_mels, every cell in [-4, 4].
struct MelSpectrogram {
  std::vector<double> data;
  std::size_t n_frames = 0;
  std::size_t n_mels = 0;

  double at(std::size_t frame, std::size_t mel) const { return data[frame * n_mels + mel]; }
  double& at(std::size_t frame, std::size_t mel) { return data[frame * n_mels + mel]; }
};

// Magnitude STFT (Hann window, FFT size = next power of two >= window),
// HTK mel filterbank spanning 0..Nyquist with area-normalized triangles,
// natural log with floor 1e-5, then a fixed affine map of
// [ln(1e-5), ln(10)] onto [-4, 4], clamped. Digital silence maps to -4
// in every cell.
MelSpectrogram log_mel(const AudioBuffer& audio, const FrameSpec& spec, int n_mels = 80);

}  // namespace prosody
