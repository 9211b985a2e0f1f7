#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prosody/conditioning.hpp"
#include "prosody/features.hpp"

namespace prosody {

// Desk-scale text-to-mel model around the GS conditioning site. Symbol
// embeddings feed a one-layer tanh RNN encoder; the reference vector is
// broadcast-summed onto the encoder states; a tanh hidden layer plus a
// linear readout emits frames_per_symbol mel frames per input symbol.
// No attention, no stop token. All gradients are hand-derived.
struct ToyModelConfig {
  int charset_size = 37;
  int width = 512;  // encoder width d; tests shrink this to <= 16
  int n_mels = 80;
  int frames_per_symbol = 2;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_steps = 4000;
  int log_every = 10;
  std::uint64_t seed = 0;
};

struct ToyModel {
  ToyModelConfig cfg;
  bool conditioned = true;

  std::vector<double> embedding;  // charset_size x d
  std::vector<double> enc_wx;     // d x d
  std::vector<double> enc_wh;     // d x d
  std::vector<double> enc_b;      // d
  ConditioningParams ref;         // 7 x d and d
  std::vector<double> dec_w1;     // d x d
  std::vector<double> dec_b1;     // d
  std::vector<double> dec_w2;     // n_mels x d
  std::vector<double> dec_b2;     // n_mels
  std::vector<double> slot_bias;  // frames_per_symbol x n_mels

  static ToyModel init(const ToyModelConfig& cfg, bool conditioned = true);

  // Named views over every parameter array, used by SGD, the gradient
  // checker and checkpoint IO.
  struct ParamRef {
    std::string name;
    std::vector<double>* values;
  };
  std::vector<ParamRef> params();
};

struct ToyExample {
  std::vector<int> text;                          // symbol ids < charset_size
  std::array<double, GsFeatures::kDim> gs{};      // raw GS vector
  std::vector<double> target;                     // (len*frames_per_symbol) x n_mels
};

struct ToyDataset {
  std::vector<ToyExample> train;
  std::vector<ToyExample> val;
  NormStats gs_stats;  // fitted on the train split's GS vectors
};

struct ForwardResult {
  std::vector<double> prediction;  // frames x n_mels, row-major
  double loss = 0.0;               // mean squared error vs target
};

// Deterministic forward pass; gs_normalized is the z-normalized GS vector
// (or a constant for the unconditioned ablation). target may be empty, in
// which case loss is 0.
ForwardResult toy_forward(const ToyModel& model, std::span<const int> text,
                          std::span<const double, GsFeatures::kDim> gs_normalized,
                          std::span<const double> target);

// Max over all parameters of the relative difference between analytic and
// central-difference gradients, step h. Intended for width <= 16 models.
double grad_check(ToyModel& model, const ToyExample& example, const NormStats& gs_stats,
                  double h = 1e-4);

struct LossRow {
  int step = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  ToyModel model;
  std::vector<LossRow> history;
  double final_val_mse = 0.0;
};

// Plain SGD on the MSE loss, seeded batch order, deterministic. When
// conditioned is false the GS input is replaced by a constant vector
// (the corpus mean, i.e. zero in normalized space). Throws
// TrainingFailedError if the loss goes non-finite.
TrainResult train_toy(const ToyDataset& dataset, const ToyModelConfig& cfg, bool conditioned);

struct SyntheticDatasetConfig {
  std::uint64_t seed = 0;
  int n_texts = 24;
  int variants_per_text = 3;
  int min_len = 6;
  int max_len = 12;
  int charset_size = 37;
  int n_mels = 80;
  int frames_per_symbol = 2;
  // Extra GS variants per text held out for validation: the model never
  // trains on them, so validation probes exactly the one-to-many mapping.
  int val_variants_per_text = 1;

  // Per-dimension sampling parameters for the GS vectors.
  std::array<double, GsFeatures::kDim> gs_mean = {5.0, 0.08, 5.6, 4.4, 0.2, 0.004, 0.45};
  std::array<double, GsFeatures::kDim> gs_stddev = {0.35, 0.04, 0.3, 0.3, 0.25, 0.002, 0.1};
};

// One-to-many corpus: each text appears with several GS variants. Target
// mel frames carry an overall level equal to the rms_mean dim and a
// Gaussian band whose position tracks the f0_mean dim, on top of a fixed
// per-symbol texture, so only a conditioned model can tell variants apart.
ToyDataset make_synthetic_prosody_dataset(const SyntheticDatasetConfig& cfg);

// Versioned JSON checkpoint with explicit shapes and the training seed.
void save_checkpoint(const std::filesystem::path& path, const ToyModel& model);
ToyModel load_checkpoint(const std::filesystem::path& path);

void save_loss_history(const std::filesystem::path& path, std::span<const LossRow> history);
std::vector<LossRow> load_loss_history(const std::filesystem::path& path);

}  // namespace prosody
