#include "prosody/conditioning.hpp"

#include "prosody/error.hpp"

namespace prosody {

ConditioningParams ConditioningParams::zeros(std::size_t width) {
  ConditioningParams p;
  p.width = width;
  p.weight.assign(GsFeatures::kDim * width, 0.0);
  p.bias.assign(width, 0.0);
  return p;
}

ConditioningParams ConditioningParams::random_init(std::size_t width, Rng& rng, double scale) {
  ConditioningParams p = zeros(width);
  for (auto& w : p.weight) w = rng.normal(0.0, scale);
  for (auto& b : p.bias) b = rng.normal(0.0, scale);
  return p;
}

std::vector<double> ref_encode(std::span<const double, GsFeatures::kDim> gs_normalized,
                               const ConditioningParams& params) {
  if (params.weight.size() != GsFeatures::kDim * params.width ||
      params.bias.size() != params.width)
    throw InvalidInputError("ref_encode: parameter shapes do not match width");

  std::vector<double> out(params.bias.begin(), params.bias.end());
  for (std::size_t i = 0; i < GsFeatures::kDim; ++i) {
    const double g = gs_normalized[i];
    const double* row = params.weight.data() + i * params.width;
    for (std::size_t j = 0; j < params.width; ++j) out[j] += g * row[j];
  }
  return out;
}

EncoderStates condition_encoder(const EncoderStates& states, std::span<const double> ref_vec) {
  if (ref_vec.size() != states.width)
    throw InvalidInputError("condition_encoder: reference vector width mismatch");
  EncoderStates out = states;
  for (std::size_t t = 0; t < states.length; ++t)
    for (std::size_t j = 0; j < states.width; ++j) out.at(t, j) += ref_vec[j];
  return out;
}

}  // namespace prosody
