#include "prosody/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prosody/error.hpp"

namespace prosody {

namespace {

constexpr double kStdFloor = 1e-8;

struct Stats {
  double mean = 0.0, var = 0.0, max = 0.0, min = 0.0;
};

// Population statistics over values[i] where mask(i) is true.
template <typename Mask>
Stats masked_stats(const std::vector<double>& values, Mask mask) {
  Stats s;
  std::size_t n = 0;
  double acc = 0.0;
  s.max = -std::numeric_limits<double>::infinity();
  s.min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask(i)) continue;
    ++n;
    acc += values[i];
    s.max = std::max(s.max, values[i]);
    s.min = std::min(s.min, values[i]);
  }
  s.mean = acc / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask(i)) continue;
    const double d = values[i] - s.mean;
    sq += d * d;
  }
  s.var = sq / static_cast<double>(n);
  return s;
}

}  // namespace

GsFeatures extract_gs(const Contour& f0, const Contour& rms) {
  if (f0.kind != ContourKind::LogF0 || rms.kind != ContourKind::Rms)
    throw InvalidInputError("extract_gs: wrong contour kinds");
  if (f0.values.size() != rms.values.size() ||
      f0.frame_spec.window_len != rms.frame_spec.window_len ||
      f0.frame_spec.hop_len != rms.frame_spec.hop_len)
    throw InvalidInputError("extract_gs: contours do not share frame geometry");
  if (f0.voicing.size() != f0.values.size())
    throw InvalidInputError("extract_gs: pitch contour missing voicing mask");

  const bool any_voiced =
      std::any_of(f0.voicing.begin(), f0.voicing.end(), [](std::uint8_t v) { return v != 0; });
  if (!any_voiced) throw NoVoicingError("extract_gs: no voiced frames in pitch contour");

  const Stats f0_stats =
      masked_stats(f0.values, [&](std::size_t i) { return f0.voicing[i] != 0; });
  const Stats rms_stats = masked_stats(rms.values, [](std::size_t) { return true; });

  GsFeatures gs;
  gs.values = {f0_stats.mean, f0_stats.var,  f0_stats.max, f0_stats.min,
               rms_stats.mean, rms_stats.var, rms_stats.max};
  return gs;
}

NormStats fit_norm_stats(std::span<const GsFeatures> corpus) {
  if (corpus.empty()) throw InvalidInputError("fit_norm_stats: empty corpus");
  NormStats stats;
  const double n = static_cast<double>(corpus.size());
  for (std::size_t d = 0; d < GsFeatures::kDim; ++d) {
    double acc = 0.0;
    for (const auto& v : corpus) acc += v[d];
    stats.mean[d] = acc / n;
    double sq = 0.0;
    for (const auto& v : corpus) {
      const double diff = v[d] - stats.mean[d];
      sq += diff * diff;
    }
    stats.stddev[d] = std::max(std::sqrt(sq / n), kStdFloor);
  }
  return stats;
}

std::array<double, GsFeatures::kDim> normalize(const GsFeatures& v, const NormStats& stats) {
  std::array<double, GsFeatures::kDim> out;
  for (std::size_t d = 0; d < GsFeatures::kDim; ++d)
    out[d] = (v[d] - stats.mean[d]) / stats.stddev[d];
  return out;
}

GsFeatures denormalize(std::span<const double, GsFeatures::kDim> z, const NormStats& stats) {
  GsFeatures out;
  for (std::size_t d = 0; d < GsFeatures::kDim; ++d)
    out[d] = z[d] * stats.stddev[d] + stats.mean[d];
  return out;
}

}  // namespace prosody
