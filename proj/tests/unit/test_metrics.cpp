#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "prosody/error.hpp"
#include "prosody/io.hpp"
#include "prosody/metrics.hpp"
#include "prosody/wav.hpp"
#include "../helpers.hpp"

using namespace prosody;
namespace fs = std::filesystem;

namespace {

NormStats identity_stats() {
  NormStats stats;
  stats.mean.fill(0.0);
  stats.stddev.fill(1.0);
  return stats;
}

GsFeatures vec(std::array<double, 7> values) {
  GsFeatures v;
  v.values = values;
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("dtw worked example and trivial cases") {
  const std::vector<double> a{0.0, 1.0, 2.0};
  const std::vector<double> b{0.0, 2.0};
  CHECK(dtw_cost(a, b) == 1.0);
  CHECK(dtw_distance(a, b) == doctest::Approx(0.2).epsilon(1e-15));

  CHECK(dtw_cost(a, a) == 0.0);
  const std::vector<double> c1{1.0, 1.0, 1.0}, c2{1.0, 1.0};
  CHECK(dtw_cost(c1, c2) == 0.0);

  CHECK_THROWS_AS(dtw_cost(std::vector<double>{}, a), InvalidInputError);
  CHECK_THROWS_AS(dtw_cost(a, std::vector<double>{}), InvalidInputError);
}

TEST_CASE("dtw equals exhaustive path enumeration on small instances") {
  Rng rng(321);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t na = 1 + rng.uniform_index(6);
    const std::size_t nb = 1 + rng.uniform_index(6);
    std::vector<double> a(na), b(nb);
    for (auto& v : a) v = static_cast<double>(rng.uniform_index(4));
    for (auto& v : b) v = static_cast<double>(rng.uniform_index(4));
    CHECK(dtw_cost(a, b) == testing::dtw_brute_force(a, b));
  }
}

TEST_CASE("dtw symmetry and non-negativity") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(1 + rng.uniform_index(30)), b(1 + rng.uniform_index(30));
    for (auto& v : a) v = rng.uniform(-3.0, 3.0);
    for (auto& v : b) v = rng.uniform(-3.0, 3.0);
    const double ab = dtw_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == dtw_distance(b, a));
  }
}

TEST_CASE("cosine distance identities") {
  const NormStats stats = identity_stats();
  const auto a = vec({0.3, -1.2, 0.7, 2.0, 0.4, -0.5, 1.1});

  SUBCASE("identical vectors give exactly zero") {
    CHECK(gs_cosine(a, a, stats, GsSubset::Pitch) == 0.0);
    CHECK(gs_cosine(a, a, stats, GsSubset::Rms) == 0.0);
  }

  SUBCASE("antipodal gives exactly two") {
    GsFeatures b;
    for (std::size_t d = 0; d < 7; ++d) b[d] = -a[d];
    CHECK(gs_cosine(a, b, stats, GsSubset::Pitch) == 2.0);
    CHECK(gs_cosine(a, b, stats, GsSubset::Rms) == 2.0);
  }

  SUBCASE("orthogonal gives one") {
    const auto u = vec({1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0});
    const auto v = vec({0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0});
    CHECK(gs_cosine(u, v, stats, GsSubset::Pitch) == 1.0);
    CHECK(gs_cosine(u, v, stats, GsSubset::Rms) == 1.0);
  }

  SUBCASE("invariant under positive scaling") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      GsFeatures u, v;
      for (std::size_t d = 0; d < 7; ++d) {
        u[d] = rng.uniform(-2.0, 2.0);
        v[d] = rng.uniform(-2.0, 2.0);
      }
      const double base = gs_cosine(u, v, stats, GsSubset::Pitch);
      GsFeatures su, sv;
      const double alpha = rng.uniform(0.1, 5.0), beta = rng.uniform(0.1, 5.0);
      for (std::size_t d = 0; d < 7; ++d) {
        su[d] = alpha * u[d];
        sv[d] = beta * v[d];
      }
      CHECK(gs_cosine(su, sv, stats, GsSubset::Pitch) == doctest::Approx(base).epsilon(1e-12));
    }
  }

  SUBCASE("zero-norm sub-vector throws") {
    const auto z = vec({0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0});
    CHECK_THROWS_AS(gs_cosine(z, a, stats, GsSubset::Pitch), DegenerateInputError);
    CHECK_NOTHROW(gs_cosine(z, a, stats, GsSubset::Rms));
  }
}

TEST_CASE("cosine bounds hold over fuzzed inputs") {
  const NormStats stats = identity_stats();
  Rng rng(5150);
  for (int trial = 0; trial < 2000; ++trial) {
    GsFeatures u, v;
    for (std::size_t d = 0; d < 7; ++d) {
      u[d] = rng.normal(0.0, 2.0);
      v[d] = rng.normal(0.0, 2.0);
    }
    for (auto subset : {GsSubset::Pitch, GsSubset::Rms}) {
      const double dist = gs_cosine(u, v, stats, subset);
      CHECK(dist >= 0.0);
      CHECK(dist <= 2.0);
    }
  }
}

TEST_CASE("pair metrics on synthetic audio") {
  const FrameSpec spec{800, 200};
  const PitchConfig cfg;

  // Stats fitted over a small synthetic corpus.
  std::vector<GsFeatures> corpus;
  std::vector<AudioBuffer> audios;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    audios.push_back(testing::make_utterance(16000, 1.2, 150.0 + 40.0 * s, 0.2 + 0.05 * s, s));
    const auto f0 = track_pitch(audios.back(), spec, cfg);
    const auto rms = rms_contour(audios.back(), spec);
    corpus.push_back(extract_gs(f0, rms));
  }
  const NormStats stats = fit_norm_stats(corpus);

  SUBCASE("self comparison is exactly zero") {
    for (const auto& audio : audios) {
      const PairMetrics m = pair_metrics(audio, audio, stats, cfg, spec);
      CHECK(m.pitch_cosine == 0.0);
      CHECK(m.rms_cosine == 0.0);
      CHECK(m.pitch_dtw == 0.0);
      CHECK(m.rms_dtw == 0.0);
    }
  }

  SUBCASE("half-amplitude candidate moves only the rms metrics") {
    const auto ref = testing::make_sine(16000, 220.0, 2.0, 1.0);
    AudioBuffer cand = ref;
    for (auto& s : cand.samples) s *= 0.5;

    const PairMetrics m = pair_metrics(ref, cand, stats, cfg, spec);
    CHECK(m.pitch_dtw < 0.02);
    CHECK(m.pitch_cosine < 1e-9);
    // Constant contours differing by delta: the DTW cost is n*delta,
    // normalized over 2n.
    const double delta = (1.0 - 0.5) / std::sqrt(2.0);
    CHECK(m.rms_dtw == doctest::Approx(delta / 2.0).epsilon(0.01));
    CHECK(m.rms_cosine > 0.0);
  }

  SUBCASE("octave-apart tones land at ln(2)/2 pitch DTW") {
    const auto ref = testing::make_sine(16000, 220.0, 2.0, 0.5);
    const auto cand = testing::make_sine(16000, 110.0, 2.0, 0.5);
    const PairMetrics m = pair_metrics(ref, cand, stats, cfg, spec);
    CHECK(m.pitch_dtw == doctest::Approx(std::log(2.0) / 2.0).epsilon(0.05));
  }
}

TEST_CASE("monte carlo evaluation") {
  const fs::path dir = fs::temp_directory_path() / "prosody_mc_test";
  fs::create_directories(dir);
  const FrameSpec spec{800, 200};
  const PitchConfig pitch_cfg;

  // Three references; candidates resolve to the reference itself.
  std::vector<GsFeatures> corpus;
  for (int i = 0; i < 3; ++i) {
    const auto audio =
        testing::make_utterance(16000, 1.0, 140.0 + 60.0 * i, 0.2 + 0.1 * i, 100 + i);
    write_wav(dir / ("ref" + std::to_string(i) + ".wav"), audio);
    corpus.push_back(
        extract_gs(track_pitch(audio, spec, pitch_cfg), rms_contour(audio, spec)));
  }
  const NormStats stats = fit_norm_stats(corpus);

  McConfig cfg;
  cfg.n_runs = 4;
  cfg.seed = 99;
  cfg.reference_pool = {"ref0", "ref1", "ref2"};
  cfg.text_set = {"t0", "t1"};

  const AudioResolver refs = [&](const std::string& id) -> std::optional<fs::path> {
    return dir / (id + ".wav");
  };
  const CandidateProvider identity = [&](const std::string&,
                                         const std::string& ref) -> std::optional<fs::path> {
    return dir / (ref + ".wav");
  };

  SUBCASE("identity provider gives all-zero aggregates") {
    const MetricReport report = monte_carlo_eval(refs, identity, cfg, stats, pitch_cfg, spec);
    CHECK(report.per_pair.size() == 8);
    CHECK(report.skipped == 0);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(report.aggregate.mean[k] == 0.0);
      CHECK(report.aggregate.stddev[k] == 0.0);
    }
  }

  SUBCASE("same seed twice gives byte-identical saved reports") {
    const MetricReport r1 = monte_carlo_eval(refs, identity, cfg, stats, pitch_cfg, spec);
    const MetricReport r2 = monte_carlo_eval(refs, identity, cfg, stats, pitch_cfg, spec);
    save_metric_report(dir / "r1.json", r1);
    save_metric_report(dir / "r2.json", r2);
    CHECK(slurp(dir / "r1.json") == slurp(dir / "r2.json"));

    const MetricReport back = load_metric_report(dir / "r1.json");
    CHECK(back.per_pair.size() == r1.per_pair.size());
    CHECK(back.seed == r1.seed);
    // Aggregate is recomputable from the stored rows.
    const MetricAggregate re = aggregate_rows(back.per_pair);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(re.mean[k] == back.aggregate.mean[k]);
      CHECK(re.stddev[k] == back.aggregate.stddev[k]);
    }
  }

  SUBCASE("unresolvable pairs are skipped; too many fail the evaluation") {
    int calls = 0;
    const CandidateProvider flaky = [&](const std::string& text,
                                        const std::string& ref) -> std::optional<fs::path> {
      ++calls;
      if (text == "t1") return std::nullopt;  // half of all pairs
      return dir / (ref + ".wav");
    };
    CHECK_THROWS_AS(monte_carlo_eval(refs, flaky, cfg, stats, pitch_cfg, spec),
                    EvaluationFailedError);
    CHECK(calls > 0);
  }

  SUBCASE("halved-amplitude provider moves rms only") {
    // Build half-amplitude copies of every reference.
    for (int i = 0; i < 3; ++i) {
      AudioBuffer audio = read_wav(dir / ("ref" + std::to_string(i) + ".wav"));
      for (auto& s : audio.samples) s *= 0.5;
      write_wav(dir / ("half" + std::to_string(i) + ".wav"), audio, WavSampleFormat::Float32);
    }
    const CandidateProvider halved = [&](const std::string&,
                                         const std::string& ref) -> std::optional<fs::path> {
      return dir / ("half" + ref.substr(3) + ".wav");
    };

    const MetricReport a = monte_carlo_eval(refs, identity, cfg, stats, pitch_cfg, spec);
    const MetricReport b = monte_carlo_eval(refs, halved, cfg, stats, pitch_cfg, spec);
    CHECK(b.aggregate.mean.rms_cosine > a.aggregate.mean.rms_cosine);
    CHECK(std::abs(b.aggregate.mean.pitch_cosine - a.aggregate.mean.pitch_cosine) <= 1e-6);
  }

  SUBCASE("config validation") {
    McConfig bad = cfg;
    bad.n_runs = 0;
    CHECK_THROWS_AS(monte_carlo_eval(refs, identity, bad, stats, pitch_cfg, spec),
                    InvalidInputError);
    bad = cfg;
    bad.reference_pool.clear();
    CHECK_THROWS_AS(monte_carlo_eval(refs, identity, bad, stats, pitch_cfg, spec),
                    InvalidInputError);
  }
}

TEST_SUITE_END();
