#include "prosody/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "prosody/error.hpp"

namespace prosody {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open WAV file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0)
    throw InvalidInputError("not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::uint32_t pcm_size = 0;

  std::size_t off = 12;
  while (off + 8 <= size) {
    const std::uint32_t chunk_size = read_u32(data + off + 4);
    const unsigned char* chunk = data + off + 8;
    if (off + 8 + chunk_size > size)
      throw InvalidInputError("truncated WAV chunk in " + path.string());
    if (std::memcmp(data + off, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw InvalidInputError("bad fmt chunk in " + path.string());
      format = read_u16(chunk);
      channels = read_u16(chunk + 2);
      rate = read_u32(chunk + 4);
      bits = read_u16(chunk + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40) throw InvalidInputError("bad extensible fmt in " + path.string());
        format = read_u16(chunk + 24);  // first two bytes of the subformat GUID
      }
    } else if (std::memcmp(data + off, "data", 4) == 0) {
      pcm = chunk;
      pcm_size = chunk_size;
    }
    off += 8 + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (rate == 0 || channels == 0) throw InvalidInputError("missing fmt chunk in " + path.string());
  if (pcm == nullptr) throw InvalidInputError("missing data chunk in " + path.string());

  const std::size_t bytes_per_sample = bits / 8;
  if (bytes_per_sample == 0) throw InvalidInputError("bad bit depth in " + path.string());
  const std::size_t n_frames = pcm_size / (bytes_per_sample * channels);
  if (n_frames == 0) throw InvalidInputError("WAV file has no samples: " + path.string());

  AudioBuffer audio;
  audio.sample_rate_hz = static_cast<int>(rate);
  audio.samples.resize(n_frames);

  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* s = pcm + (i * channels + c) * bytes_per_sample;
      double v = 0.0;
      if (format == kFormatPcm && bits == 16) {
        const auto raw = static_cast<std::int16_t>(s[0] | (s[1] << 8));
        v = raw / 32768.0;
      } else if (format == kFormatPcm && bits == 24) {
        std::int32_t raw = s[0] | (s[1] << 8) | (s[2] << 16);
        if (raw & 0x800000) raw |= ~0xFFFFFF;  // sign-extend
        v = raw / 8388608.0;
      } else if (format == kFormatFloat && bits == 32) {
        std::uint32_t raw = read_u32(s);
        float f;
        std::memcpy(&f, &raw, sizeof f);
        v = f;
      } else {
        throw InvalidInputError("unsupported WAV encoding (format " + std::to_string(format) +
                                ", " + std::to_string(bits) + " bit) in " + path.string());
      }
      acc += v;
    }
    audio.samples[i] = acc / channels;
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavSampleFormat format) {
  if (audio.samples.empty()) throw InvalidInputError("write_wav: empty audio");
  if (audio.sample_rate_hz <= 0) throw InvalidInputError("write_wav: bad sample rate");

  const bool is_float = format == WavSampleFormat::Float32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint32_t byte_count = static_cast<std::uint32_t>(audio.samples.size() * bits / 8);

  std::string out;
  out.reserve(44 + byte_count);
  out.append("RIFF");
  put_u32(out, 36 + byte_count);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, is_float ? kFormatFloat : kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate_hz) * bits / 8);
  put_u16(out, bits / 8);
  put_u16(out, bits);
  out.append("data");
  put_u32(out, byte_count);

  for (double v : audio.samples) {
    if (is_float) {
      const float f = static_cast<float>(v);
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      put_u32(out, raw);
    } else {
      const double clamped = std::clamp(v, -1.0, 1.0);
      const auto raw = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
      put_u16(out, static_cast<std::uint16_t>(raw));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InvalidInputError("cannot write WAV file: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace prosody
