#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "prosody/audio.hpp"
#include "prosody/mel.hpp"
#include "prosody/metrics.hpp"
#include "prosody/pitch.hpp"
#include "prosody/rng.hpp"

using namespace prosody;

namespace {

AudioBuffer tone(int rate, double f0, double seconds, double amp) {
  AudioBuffer audio;
  audio.sample_rate_hz = rate;
  const std::size_t n = static_cast<std::size_t>(rate * seconds);
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    audio.samples[i] = amp * std::sin(2.0 * std::numbers::pi * f0 * i / rate);
  return audio;
}

const FrameSpec kSpec{800, 200};

}  // namespace

static void BM_TrackPitch(benchmark::State& state) {
  const double seconds = static_cast<double>(state.range(0));
  const AudioBuffer audio = tone(16000, 200.0, seconds, 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(track_pitch(audio, kSpec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(audio.samples.size()));
}
BENCHMARK(BM_TrackPitch)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_RmsContour(benchmark::State& state) {
  const AudioBuffer audio = tone(16000, 200.0, 10.0, 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rms_contour(audio, kSpec));
  }
}
BENCHMARK(BM_RmsContour)->Unit(benchmark::kMillisecond);

static void BM_LogMel(benchmark::State& state) {
  const AudioBuffer audio = tone(16000, 440.0, 10.0, 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_mel(audio, kSpec, 80));
  }
}
BENCHMARK(BM_LogMel)->Unit(benchmark::kMillisecond);

static void BM_Resample48kTo16k(benchmark::State& state) {
  const AudioBuffer audio = tone(48000, 440.0, 5.0, 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(resample(audio, 16000));
  }
}
BENCHMARK(BM_Resample48kTo16k)->Unit(benchmark::kMillisecond);

static void BM_DtwDistance(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  std::vector<double> a(n), b(n);
  for (auto& v : a) v = rng.uniform(4.0, 6.0);
  for (auto& v : b) v = rng.uniform(4.0, 6.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dtw_distance(a, b));
  }
}
BENCHMARK(BM_DtwDistance)->Arg(77)->Arg(800);

BENCHMARK_MAIN();
