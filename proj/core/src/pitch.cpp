#include "prosody/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prosody/error.hpp"

namespace prosody {

std::vector<LagCandidate> nccf_frame(std::span<const double> frame, int min_lag, int max_lag,
                                     int max_candidates) {
  if (min_lag < 1 || max_lag < min_lag) throw InvalidInputError("nccf_frame: bad lag range");
  if (frame.size() <= static_cast<std::size_t>(max_lag))
    throw InvalidInputError("nccf_frame: frame shorter than max lag + 1");

  const int n_lags = max_lag - min_lag + 1;
  std::vector<double> scores(n_lags, 0.0);

  // Prefix sums of squares make the energy terms O(1) per lag.
  std::vector<double> sq_prefix(frame.size() + 1, 0.0);
  for (std::size_t n = 0; n < frame.size(); ++n)
    sq_prefix[n + 1] = sq_prefix[n] + frame[n] * frame[n];

  for (int lag = min_lag; lag <= max_lag; ++lag) {
    const std::size_t overlap = frame.size() - lag;
    double num = 0.0;
    for (std::size_t n = 0; n < overlap; ++n) num += frame[n] * frame[n + lag];
    const double e1 = sq_prefix[overlap];
    const double e2 = sq_prefix[frame.size()] - sq_prefix[lag];
    const double denom = std::sqrt(e1 * e2);
    scores[lag - min_lag] = denom > 0.0 ? num / denom : 0.0;
  }

  // Local maxima over the lag axis; plateau edges count once.
  std::vector<LagCandidate> candidates;
  for (int i = 0; i < n_lags; ++i) {
    const double left = i > 0 ? scores[i - 1] : -std::numeric_limits<double>::infinity();
    const double right = i + 1 < n_lags ? scores[i + 1] : -std::numeric_limits<double>::infinity();
    if (scores[i] > left && scores[i] >= right && scores[i] > 0.0)
      candidates.push_back({min_lag + i, scores[i]});
  }

  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.lag < b.lag;
  });
  if (candidates.size() > static_cast<std::size_t>(max_candidates))
    candidates.resize(max_candidates);
  return candidates;
}

namespace {

struct FrameState {
  // Candidates for one frame; entry max_candidates (or wherever the voiced
  // list ends) is the implicit unvoiced state.
  std::vector<LagCandidate> voiced;
};

}  // namespace

Contour track_pitch(const AudioBuffer& audio, const FrameSpec& spec, const PitchConfig& cfg) {
  if (audio.samples.empty()) throw InvalidInputError("track_pitch: empty audio");
  if (audio.sample_rate_hz <= 0) throw InvalidInputError("track_pitch: bad sample rate");
  if (!(cfg.f0_min_hz > 0.0 && cfg.f0_min_hz < cfg.f0_max_hz &&
        cfg.f0_max_hz < audio.sample_rate_hz / 2.0))
    throw InvalidInputError("track_pitch: need 0 < f0_min < f0_max < rate/2");

  const std::size_t n_frames = frame_count(audio.samples.size(), spec);
  if (n_frames == 0) throw InvalidInputError("track_pitch: audio shorter than one window");

  const double rate = audio.sample_rate_hz;
  const int min_lag = static_cast<int>(std::ceil(rate / cfg.f0_max_hz));
  int max_lag = static_cast<int>(std::floor(rate / cfg.f0_min_hz));
  max_lag = std::min(max_lag, spec.window_len - 1);
  if (min_lag > max_lag) throw InvalidInputError("track_pitch: window too short for f0 range");

  // Per-frame candidates.
  std::vector<FrameState> frames(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    std::span<const double> frame(audio.samples.data() + i * spec.hop_len,
                                  static_cast<std::size_t>(spec.window_len));
    frames[i].voiced = nccf_frame(frame, min_lag, max_lag, cfg.max_candidates);
  }

  const double lag_span = std::max(1, max_lag - min_lag);
  auto local_cost = [&](const LagCandidate& c) {
    return 1.0 - c.score + cfg.octave_cost_bias * (c.lag - min_lag) / lag_span;
  };

  // Viterbi over voiced candidates plus one unvoiced state per frame.
  // Transitions touching the unvoiced state are free; voiced-to-voiced
  // transitions pay the weighted |delta log f0|.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(n_frames);
  std::vector<std::vector<int>> back(n_frames);

  for (std::size_t i = 0; i < n_frames; ++i) {
    const std::size_t n_states = frames[i].voiced.size() + 1;  // last = unvoiced
    cost[i].assign(n_states, kInf);
    back[i].assign(n_states, -1);

    for (std::size_t s = 0; s < n_states; ++s) {
      const bool unvoiced = s == frames[i].voiced.size();
      const double lc = unvoiced ? cfg.nccf_voicing_floor : local_cost(frames[i].voiced[s]);
      if (i == 0) {
        cost[i][s] = lc;
        continue;
      }
      const std::size_t prev_states = frames[i - 1].voiced.size() + 1;
      for (std::size_t p = 0; p < prev_states; ++p) {
        if (cost[i - 1][p] == kInf) continue;
        double transition = 0.0;
        const bool prev_unvoiced = p == frames[i - 1].voiced.size();
        if (!unvoiced && !prev_unvoiced) {
          const double log_now = std::log(rate / frames[i].voiced[s].lag);
          const double log_prev = std::log(rate / frames[i - 1].voiced[p].lag);
          transition = cfg.transition_cost_weight * std::abs(log_now - log_prev);
        }
        const double total = cost[i - 1][p] + transition + lc;
        if (total < cost[i][s]) {
          cost[i][s] = total;
          back[i][s] = static_cast<int>(p);
        }
      }
    }
  }

  // Backtrack the cheapest path.
  std::vector<int> path(n_frames);
  {
    const auto& last = cost[n_frames - 1];
    path[n_frames - 1] =
        static_cast<int>(std::min_element(last.begin(), last.end()) - last.begin());
    for (std::size_t i = n_frames - 1; i > 0; --i) path[i - 1] = back[i][path[i]];
  }

  Contour contour;
  contour.kind = ContourKind::LogF0;
  contour.frame_spec = spec;
  contour.sample_rate_hz = audio.sample_rate_hz;
  contour.values.resize(n_frames, 0.0);
  contour.voicing.assign(n_frames, 0);

  const Contour rms = rms_contour(audio, spec);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const bool voiced = path[i] >= 0 && path[i] < static_cast<int>(frames[i].voiced.size());
    // RMS gate applied after smoothing.
    if (voiced && rms.values[i] >= cfg.voicing_rms_threshold) {
      contour.values[i] = std::log(rate / frames[i].voiced[path[i]].lag);
      contour.voicing[i] = 1;
    }
  }
  return contour;
}

}  // namespace prosody
