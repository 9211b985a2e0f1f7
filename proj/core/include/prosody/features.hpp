#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "prosody/audio.hpp"

namespace prosody {

// The 7-dimensional global-summary prosody vector. Dimension order is a
// fixed public contract; it matches the CSV header emitted by the tools.
struct GsFeatures {
  static constexpr std::size_t kDim = 7;
  static constexpr std::array<std::string_view, kDim> kNames = {
      "f0_mean", "f0_var", "f0_max", "f0_min", "rms_mean", "rms_var", "rms_max"};

  std::array<double, kDim> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double f0_mean() const { return values[0]; }
  double f0_var() const { return values[1]; }
  double f0_max() const { return values[2]; }
  double f0_min() const { return values[3]; }
  double rms_mean() const { return values[4]; }
  double rms_var() const { return values[5]; }
  double rms_max() const { return values[6]; }
};

// Per-dimension z-normalization statistics; every stddev is clamped to
// at least 1e-8 when fitted.
struct NormStats {
  std::array<double, GsFeatures::kDim> mean{};
  std::array<double, GsFeatures::kDim> stddev{};
};

// Mean/variance/max/min of log-F0 over voiced frames only, plus
// mean/variance/max of RMS over all frames. Variances are population
// variances. Throws NoVoicingError when no frame is voiced and
// InvalidInputError when the contours do not share frame geometry.
GsFeatures extract_gs(const Contour& f0, const Contour& rms);

// Per-dimension mean and population stddev over a corpus.
NormStats fit_norm_stats(std::span<const GsFeatures> corpus);

std::array<double, GsFeatures::kDim> normalize(const GsFeatures& v, const NormStats& stats);
GsFeatures denormalize(std::span<const double, GsFeatures::kDim> z, const NormStats& stats);

}  // namespace prosody
