#pragma once

#include <span>
#include <vector>

#include "prosody/audio.hpp"

namespace prosody {

struct PitchConfig {
  double f0_min_hz = 50.0;
  double f0_max_hz = 400.0;
  // Frames whose RMS falls below this are forced unvoiced after smoothing.
  double voicing_rms_threshold = 5e-3;
  // Weight on |log f0[i] - log f0[i-1]| between consecutive voiced frames.
  double transition_cost_weight = 0.2;
  // Local cost of the unvoiced state; voiced candidates cost 1 - score.
  double nccf_voicing_floor = 0.3;
  // Small monotone penalty on longer lags, scaled across the lag range.
  // Breaks the near-ties between a period and its integer multiples that
  // pure periodic signals produce in the NCCF.
  double octave_cost_bias = 0.01;
  int max_candidates = 10;
};

// One NCCF peak: candidate period in samples and its score in [-1, 1].
struct LagCandidate {
  int lag = 0;
  double score = 0.0;
};

// Normalized cross-correlation over the lag interval [min_lag, max_lag]:
//   score(L) = sum x[n] x[n+L] / sqrt(sum x[n]^2 * sum x[n+L]^2)
// with n running over the valid overlap. Returns the local maxima as
// candidates, descending by score, at most max_candidates of them.
// A zero-energy frame yields no candidates.
std::vector<LagCandidate> nccf_frame(std::span<const double> frame, int min_lag, int max_lag,
                                     int max_candidates = 10);

// Smoothed log-F0 contour. Per frame the NCCF candidates plus an explicit
// unvoiced state enter a Viterbi pass minimizing
//   sum local_cost + transition_cost_weight * |log f0[i] - log f0[i-1]|
// over consecutive voiced frames; transitions to or from the unvoiced
// state are free. Voiced frames emit ln(f0), unvoiced frames emit 0, and
// frames whose RMS is below voicing_rms_threshold are forced unvoiced.
// Frame geometry is identical to rms_contour on the same spec.
Contour track_pitch(const AudioBuffer& audio, const FrameSpec& spec, const PitchConfig& cfg = {});

}  // namespace prosody
