#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "prosody/audio.hpp"
#include "prosody/error.hpp"
#include "prosody/wav.hpp"
#include "../helpers.hpp"

using namespace prosody;

TEST_SUITE_BEGIN("audio");

TEST_CASE("frame count formula") {
  FrameSpec spec{800, 200};
  CHECK(frame_count(16000, spec) == 77);
  CHECK(frame_count(800, spec) == 1);
  CHECK(frame_count(799, spec) == 0);
  CHECK(frame_count(999, spec) == 1);
  CHECK(frame_count(1000, spec) == 2);

  // Property over random sizes.
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const int window = 1 + static_cast<int>(rng.uniform_index(1000));
    const int hop = 1 + static_cast<int>(rng.uniform_index(window));
    const std::size_t n = window + rng.uniform_index(5000);
    const std::size_t expect = 1 + (n - window) / hop;
    CHECK(frame_count(n, FrameSpec{window, hop}) == expect);
  }
}

TEST_CASE("frame spec from milliseconds") {
  const FrameSpec spec = FrameSpec::from_ms(16000);
  CHECK(spec.window_len == 800);
  CHECK(spec.hop_len == 200);
  const FrameSpec spec48 = FrameSpec::from_ms(48000);
  CHECK(spec48.window_len == 2400);
  CHECK(spec48.hop_len == 600);
  CHECK_THROWS_AS(FrameSpec::from_ms(16000, 10.0, 20.0), InvalidInputError);
}

TEST_CASE("rms of constant signal") {
  AudioBuffer audio;
  audio.sample_rate_hz = 16000;
  audio.samples.assign(16000, 0.5);
  const Contour c = rms_contour(audio, FrameSpec{800, 200});
  CHECK(c.values.size() == 77);
  CHECK(c.kind == ContourKind::Rms);
  CHECK(c.voicing.empty());
  for (double v : c.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rms of full-frame sine is 1/sqrt(2)") {
  const auto audio = testing::make_sine(16000, 200.0, 1.0, 1.0);
  const Contour c = rms_contour(audio, FrameSpec{800, 200});
  for (double v : c.values) CHECK(v == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("rms frame count on one second") {
  const auto audio = testing::make_noise(16000, 1.0, 0.3, 11);
  CHECK(rms_contour(audio, FrameSpec{800, 200}).values.size() == 77);
}

TEST_CASE("rms errors on short audio") {
  AudioBuffer audio;
  audio.sample_rate_hz = 16000;
  audio.samples.assign(799, 0.1);
  CHECK_THROWS_AS(rms_contour(audio, FrameSpec{800, 200}), InvalidInputError);
  audio.samples.clear();
  CHECK_THROWS_AS(rms_contour(audio, FrameSpec{800, 200}), InvalidInputError);
}

TEST_CASE("rms sign-flip invariance and exact scaling") {
  auto audio = testing::make_noise(16000, 0.5, 0.4, 3);
  const FrameSpec spec{800, 200};
  const Contour base = rms_contour(audio, spec);

  AudioBuffer flipped = audio;
  for (auto& s : flipped.samples) s = -s;
  const Contour flip = rms_contour(flipped, spec);
  for (std::size_t i = 0; i < base.values.size(); ++i) CHECK(base.values[i] == flip.values[i]);

  // Power-of-two scaling is bit-exact.
  AudioBuffer doubled = audio;
  for (auto& s : doubled.samples) s *= 2.0;
  const Contour twice = rms_contour(doubled, spec);
  for (std::size_t i = 0; i < base.values.size(); ++i)
    CHECK(twice.values[i] == 2.0 * base.values[i]);

  AudioBuffer scaled = audio;
  for (auto& s : scaled.samples) s *= 0.3;
  const Contour third = rms_contour(scaled, spec);
  for (std::size_t i = 0; i < base.values.size(); ++i)
    CHECK(third.values[i] == doctest::Approx(0.3 * base.values[i]).epsilon(1e-12));
}

TEST_CASE("resample length and identity") {
  const auto audio = testing::make_noise(48000, 1.0, 0.3, 5);
  const AudioBuffer down = resample(audio, 16000);
  CHECK(down.sample_rate_hz == 16000);
  CHECK(std::abs(static_cast<long>(down.samples.size()) - 16000L) <= 1);

  const AudioBuffer same = resample(down, 16000);
  CHECK(same.samples == down.samples);

  AudioBuffer empty;
  empty.sample_rate_hz = 16000;
  CHECK_THROWS_AS(resample(empty, 8000), InvalidInputError);
}

TEST_CASE("resample preserves a pure tone's peak frequency") {
  // 1 kHz at 8 kHz upsampled to 16 kHz: the spectral peak must stay at
  // 1 kHz, measured with an independent DFT.
  const auto tone = testing::make_sine(8000, 1000.0, 0.5, 0.5);
  const AudioBuffer up = resample(tone, 16000);
  constexpr std::size_t kFft = 4096;
  // Interior slice, away from filter edge effects.
  std::span<const double> slice(up.samples.data() + 1024, kFft);
  const std::size_t peak = testing::dft_peak_bin(slice, kFft);
  const double peak_hz = static_cast<double>(peak) * 16000.0 / kFft;
  CHECK(std::abs(peak_hz - 1000.0) <= 16000.0 / kFft);

  // And downsampling back keeps it as well.
  const AudioBuffer down = resample(up, 8000);
  std::span<const double> slice2(down.samples.data() + 512, 2048);
  const std::size_t peak2 = testing::dft_peak_bin(slice2, 2048);
  CHECK(std::abs(peak2 * 8000.0 / 2048 - 1000.0) <= 8000.0 / 2048);
}

TEST_CASE("resample keeps a constant signal constant away from the edges") {
  AudioBuffer audio;
  audio.sample_rate_hz = 48000;
  audio.samples.assign(4800, 0.5);
  const AudioBuffer down = resample(audio, 16000);
  REQUIRE(down.samples.size() > 200);
  for (std::size_t i = 64; i + 64 < down.samples.size(); ++i)
    CHECK(down.samples[i] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("wav round trips") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "prosody_wav_test";
  fs::create_directories(dir);

  const auto audio = testing::make_sine(16000, 220.0, 0.25, 0.5);

  SUBCASE("pcm16") {
    write_wav(dir / "a.wav", audio, WavSampleFormat::Pcm16);
    const AudioBuffer back = read_wav(dir / "a.wav");
    CHECK(back.sample_rate_hz == 16000);
    REQUIRE(back.samples.size() == audio.samples.size());
    for (std::size_t i = 0; i < back.samples.size(); ++i)
      CHECK(back.samples[i] == doctest::Approx(audio.samples[i]).epsilon(1e-4).scale(1.0));
  }

  SUBCASE("float32") {
    write_wav(dir / "f.wav", audio, WavSampleFormat::Float32);
    const AudioBuffer back = read_wav(dir / "f.wav");
    REQUIRE(back.samples.size() == audio.samples.size());
    for (std::size_t i = 0; i < back.samples.size(); ++i)
      CHECK(back.samples[i] == doctest::Approx(audio.samples[i]).epsilon(1e-7));
  }

  SUBCASE("rejects garbage") {
    CHECK_THROWS_AS(read_wav(dir / "missing.wav"), InvalidInputError);
  }
}

namespace {

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& s, std::uint32_t v) {
  put_u16(s, v & 0xFFFF);
  put_u16(s, v >> 16);
}

// Minimal hand-built WAV with an arbitrary fmt chunk and raw sample bytes.
std::string build_wav(std::uint16_t format_tag, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::string& pcm, bool extensible = false) {
  std::string fmt;
  put_u16(fmt, extensible ? 0xFFFE : format_tag);
  put_u16(fmt, channels);
  put_u32(fmt, rate);
  put_u32(fmt, rate * channels * bits / 8);
  put_u16(fmt, channels * bits / 8);
  put_u16(fmt, bits);
  if (extensible) {
    put_u16(fmt, 22);        // cbSize
    put_u16(fmt, bits);      // valid bits
    put_u32(fmt, 0x3);       // channel mask
    put_u16(fmt, format_tag);  // GUID starts with the real tag
    for (int i = 0; i < 14; ++i) fmt.push_back(static_cast<char>(i));
  }
  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(4 + 8 + fmt.size() + 8 + pcm.size()));
  out += "WAVE";
  out += "fmt ";
  put_u32(out, static_cast<std::uint32_t>(fmt.size()));
  out += fmt;
  out += "data";
  put_u32(out, static_cast<std::uint32_t>(pcm.size()));
  out += pcm;
  return out;
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("wav decodes 24-bit, extensible and multi-channel data") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "prosody_wav_exotic";
  fs::create_directories(dir);

  SUBCASE("24-bit pcm") {
    // Samples: +1/8 full scale, -1/4 full scale.
    std::string pcm;
    auto put24 = [&](std::int32_t v) {
      pcm.push_back(static_cast<char>(v & 0xFF));
      pcm.push_back(static_cast<char>((v >> 8) & 0xFF));
      pcm.push_back(static_cast<char>((v >> 16) & 0xFF));
    };
    put24(1 << 20);
    put24(-(1 << 21));
    write_bytes(dir / "s24.wav", build_wav(1, 1, 16000, 24, pcm));
    const AudioBuffer audio = read_wav(dir / "s24.wav");
    REQUIRE(audio.samples.size() == 2);
    CHECK(audio.samples[0] == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(audio.samples[1] == doctest::Approx(-0.25).epsilon(1e-9));
  }

  SUBCASE("extensible float32 stereo mixes down by averaging") {
    std::string pcm;
    auto putf = [&](float f) {
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      put_u32(pcm, raw);
    };
    putf(0.5f);   // L
    putf(-0.1f);  // R
    putf(1.0f);
    putf(0.0f);
    write_bytes(dir / "ext.wav", build_wav(3, 2, 48000, 32, pcm, true));
    const AudioBuffer audio = read_wav(dir / "ext.wav");
    CHECK(audio.sample_rate_hz == 48000);
    REQUIRE(audio.samples.size() == 2);
    CHECK(audio.samples[0] == doctest::Approx(0.2).epsilon(1e-7));
    CHECK(audio.samples[1] == doctest::Approx(0.5).epsilon(1e-7));
  }

  SUBCASE("unsupported encodings are rejected") {
    std::string pcm(4, '\0');
    write_bytes(dir / "alaw.wav", build_wav(6, 1, 8000, 8, pcm));  // A-law
    CHECK_THROWS_AS(read_wav(dir / "alaw.wav"), InvalidInputError);
  }
}

TEST_SUITE_END();
