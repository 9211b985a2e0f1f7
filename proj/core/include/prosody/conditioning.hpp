#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prosody/features.hpp"
#include "prosody/rng.hpp"

namespace prosody {

// Linear reference encoder: maps the 7 normalized GS features to the
// text-encoder width d. weight is input_dim x width, row-major.
struct ConditioningParams {
  std::size_t width = 512;
  std::vector<double> weight;  // GsFeatures::kDim * width
  std::vector<double> bias;    // width

  static ConditioningParams zeros(std::size_t width);
  static ConditioningParams random_init(std::size_t width, Rng& rng, double scale = 0.1);
};

// Text-encoder output states, row-major T x width.
struct EncoderStates {
  std::size_t length = 0;  // T
  std::size_t width = 0;   // d
  std::vector<double> data;

  double at(std::size_t t, std::size_t j) const { return data[t * width + j]; }
  double& at(std::size_t t, std::size_t j) { return data[t * width + j]; }
};

// out = weight^T * gs + bias.
std::vector<double> ref_encode(std::span<const double, GsFeatures::kDim> gs_normalized,
                               const ConditioningParams& params);

// Broadcast sum: out[t] = states[t] + ref_vec for every timestep.
EncoderStates condition_encoder(const EncoderStates& states, std::span<const double> ref_vec);

}  // namespace prosody
