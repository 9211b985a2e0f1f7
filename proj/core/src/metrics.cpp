#include "prosody/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "prosody/error.hpp"
#include "prosody/rng.hpp"
#include "prosody/wav.hpp"

namespace prosody {

double gs_cosine(const GsFeatures& a, const GsFeatures& b, const NormStats& stats,
                 GsSubset subset) {
  const auto za = normalize(a, stats);
  const auto zb = normalize(b, stats);
  const std::size_t lo = subset == GsSubset::Pitch ? 0 : 4;
  const std::size_t hi = subset == GsSubset::Pitch ? 4 : 7;

  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t d = lo; d < hi; ++d) {
    dot += za[d] * zb[d];
    na += za[d] * za[d];
    nb += zb[d] * zb[d];
  }
  if (na == 0.0 || nb == 0.0)
    throw DegenerateInputError("gs_cosine: zero-norm feature sub-vector");
  // For identical inputs dot == na == nb and sqrt(x*x) == x in IEEE
  // arithmetic, so the distance is exactly 0.
  const double cosine = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
  return 1.0 - cosine;
}

double dtw_cost(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidInputError("dtw: empty sequence");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Rolling rows of the accumulated-cost matrix.
  std::vector<double> prev(m, kInf), curr(m, kInf);
  for (std::size_t j = 0; j < m; ++j) {
    const double c = std::abs(a[0] - b[j]);
    prev[j] = c + (j > 0 ? prev[j - 1] : 0.0);
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = std::abs(a[i] - b[j]);
      double best = prev[j];                                    // (1,0)
      if (j > 0) best = std::min({best, curr[j - 1], prev[j - 1]});  // (0,1), (1,1)
      curr[j] = c + best;
    }
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

double dtw_distance(std::span<const double> a, std::span<const double> b) {
  return dtw_cost(a, b) / static_cast<double>(a.size() + b.size());
}

PairMetrics pair_metrics(const AudioBuffer& ref, const AudioBuffer& cand, const NormStats& stats,
                         const PitchConfig& pitch_cfg, const FrameSpec& spec) {
  const Contour ref_f0 = track_pitch(ref, spec, pitch_cfg);
  const Contour ref_rms = rms_contour(ref, spec);
  const Contour cand_f0 = track_pitch(cand, spec, pitch_cfg);
  const Contour cand_rms = rms_contour(cand, spec);

  const GsFeatures ref_gs = extract_gs(ref_f0, ref_rms);
  const GsFeatures cand_gs = extract_gs(cand_f0, cand_rms);

  PairMetrics out;
  out.pitch_cosine = gs_cosine(ref_gs, cand_gs, stats, GsSubset::Pitch);
  out.rms_cosine = gs_cosine(ref_gs, cand_gs, stats, GsSubset::Rms);
  out.pitch_dtw = dtw_distance(ref_f0.values, cand_f0.values);
  out.rms_dtw = dtw_distance(ref_rms.values, cand_rms.values);
  return out;
}

MetricAggregate aggregate_rows(std::span<const PairRow> rows) {
  MetricAggregate agg;
  if (rows.empty()) return agg;
  const double n = static_cast<double>(rows.size());

  std::array<double, 4> mean{}, var{};
  for (const auto& row : rows)
    for (std::size_t k = 0; k < 4; ++k) mean[k] += row.metrics[k];
  for (auto& m : mean) m /= n;
  for (const auto& row : rows)
    for (std::size_t k = 0; k < 4; ++k) {
      const double d = row.metrics[k] - mean[k];
      var[k] += d * d;
    }
  for (auto& v : var) v /= n;

  agg.mean = {mean[0], mean[1], mean[2], mean[3]};
  agg.stddev = {std::sqrt(var[0]), std::sqrt(var[1]), std::sqrt(var[2]), std::sqrt(var[3])};
  return agg;
}

namespace {

struct ExtractedUtterance {
  Contour f0;
  Contour rms;
  GsFeatures gs;
};

}  // namespace

MetricReport monte_carlo_eval(const AudioResolver& reference_audio,
                              const CandidateProvider& candidate_audio, const McConfig& cfg,
                              const NormStats& stats, const PitchConfig& pitch_cfg,
                              const FrameSpec& spec) {
  if (cfg.n_runs < 1) throw InvalidInputError("monte_carlo_eval: n_runs must be >= 1");
  if (cfg.reference_pool.empty() || cfg.text_set.empty())
    throw InvalidInputError("monte_carlo_eval: empty reference pool or text set");

  Rng rng(cfg.seed);
  MetricReport report;
  report.n_runs = cfg.n_runs;
  report.seed = cfg.seed;

  // Each distinct file is extracted once.
  std::map<std::string, ExtractedUtterance> cache;
  auto extract = [&](const std::filesystem::path& path) -> const ExtractedUtterance& {
    const std::string key = path.string();
    auto it = cache.find(key);
    if (it == cache.end()) {
      AudioBuffer audio = read_wav(path);
      if (audio.sample_rate_hz != cfg.sample_rate_hz)
        audio = resample(audio, cfg.sample_rate_hz);
      ExtractedUtterance u;
      u.f0 = track_pitch(audio, spec, pitch_cfg);
      u.rms = rms_contour(audio, spec);
      u.gs = extract_gs(u.f0, u.rms);
      it = cache.emplace(key, std::move(u)).first;
    }
    return it->second;
  };

  std::size_t attempted = 0;
  for (int run = 0; run < cfg.n_runs; ++run) {
    for (const auto& text_id : cfg.text_set) {
      const std::string& ref_id =
          cfg.reference_pool[rng.uniform_index(cfg.reference_pool.size())];
      ++attempted;

      const auto ref_path = reference_audio(ref_id);
      const auto cand_path = candidate_audio(text_id, ref_id);
      if (!ref_path || !cand_path) {
        ++report.skipped;
        continue;
      }
      try {
        const ExtractedUtterance& ref = extract(*ref_path);
        const ExtractedUtterance& cand = extract(*cand_path);
        PairRow row;
        row.reference_id = ref_id;
        row.candidate_id = text_id + ":" + ref_id;
        row.metrics.pitch_cosine = gs_cosine(ref.gs, cand.gs, stats, GsSubset::Pitch);
        row.metrics.rms_cosine = gs_cosine(ref.gs, cand.gs, stats, GsSubset::Rms);
        row.metrics.pitch_dtw = dtw_distance(ref.f0.values, cand.f0.values);
        row.metrics.rms_dtw = dtw_distance(ref.rms.values, cand.rms.values);
        report.per_pair.push_back(std::move(row));
      } catch (const Error&) {
        ++report.skipped;
      }
    }
  }

  if (report.skipped * 10 > attempted)
    throw EvaluationFailedError("monte_carlo_eval: more than 10% of pairs failed (" +
                                std::to_string(report.skipped) + "/" + std::to_string(attempted) +
                                ")");
  report.aggregate = aggregate_rows(report.per_pair);
  return report;
}

}  // namespace prosody
