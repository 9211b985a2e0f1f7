#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prosody/audio.hpp"
#include "prosody/features.hpp"
#include "prosody/pitch.hpp"

namespace prosody {

enum class GsSubset { Pitch, Rms };

// Cosine distance 1 - u.v/(|u||v|) over a z-normalized sub-vector of the
// GS features: dims 0..3 for Pitch, dims 4..6 for Rms. Both inputs are
// normalized with the same stats inside the call. Range [0, 2]; identical
// inputs give exactly 0. Throws DegenerateInputError on a zero-norm
// sub-vector.
double gs_cosine(const GsFeatures& a, const GsFeatures& b, const NormStats& stats, GsSubset subset);

// Raw accumulated DTW cost: local cost |a_i - b_j|, steps
// {(1,0),(0,1),(1,1)}, endpoints matched.
double dtw_cost(std::span<const double> a, std::span<const double> b);

// dtw_cost normalized by (len(a) + len(b)).
double dtw_distance(std::span<const double> a, std::span<const double> b);

struct PairMetrics {
  double pitch_cosine = 0.0;
  double rms_cosine = 0.0;
  double pitch_dtw = 0.0;
  double rms_dtw = 0.0;

  double operator[](std::size_t i) const {
    return i == 0 ? pitch_cosine : i == 1 ? rms_cosine : i == 2 ? pitch_dtw : rms_dtw;
  }
  static constexpr std::array<std::string_view, 4> kNames = {"pitch_cosine", "rms_cosine",
                                                             "pitch_dtw", "rms_dtw"};
  // Table row labels, in report order.
  static constexpr std::array<std::string_view, 4> kLabels = {"Pitch cosine", "RMS cosine",
                                                              "Pitch DTW", "RMS DTW"};
};

// All four objective metrics for one (reference, candidate) pair. Both
// signals are expected at the same rate; the pitch DTW runs on the full
// log-F0 series including unvoiced zeros, the RMS DTW on the RMS series.
PairMetrics pair_metrics(const AudioBuffer& ref, const AudioBuffer& cand, const NormStats& stats,
                         const PitchConfig& pitch_cfg, const FrameSpec& spec);

struct McConfig {
  int n_runs = 50;
  std::uint64_t seed = 0;
  int sample_rate_hz = 16000;  // loaded audio is resampled to this rate
  std::vector<std::string> reference_pool;
  std::vector<std::string> text_set;
};

struct PairRow {
  std::string reference_id;
  std::string candidate_id;
  PairMetrics metrics;
};

struct MetricAggregate {
  PairMetrics mean;
  PairMetrics stddev;  // population
};

struct MetricReport {
  std::vector<PairRow> per_pair;
  MetricAggregate aggregate;
  int n_runs = 0;
  std::uint64_t seed = 0;
  std::size_t skipped = 0;
};

// Resolves an utterance id to its audio file.
using AudioResolver = std::function<std::optional<std::filesystem::path>(const std::string& id)>;
// Resolves a (text id, reference id) pair to the candidate audio file.
using CandidateProvider = std::function<std::optional<std::filesystem::path>(
    const std::string& text_id, const std::string& ref_id)>;

// Monte Carlo protocol: per run, one reference is drawn uniformly per text
// from the reference pool, the pair is scored, and rows are aggregated as
// mean +- population stddev. Deterministic given the seed. Unresolvable
// pairs are skipped and counted; more than 10% skipped raises
// EvaluationFailedError.
MetricReport monte_carlo_eval(const AudioResolver& reference_audio,
                              const CandidateProvider& candidate_audio, const McConfig& cfg,
                              const NormStats& stats, const PitchConfig& pitch_cfg,
                              const FrameSpec& spec);

// Recomputes mean +- population stddev from the per-pair rows.
MetricAggregate aggregate_rows(std::span<const PairRow> rows);

}  // namespace prosody
