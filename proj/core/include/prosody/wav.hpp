#pragma once

#include <filesystem>

#include "prosody/audio.hpp"

namespace prosody {

enum class WavSampleFormat { Pcm16, Float32 };

// Reads a RIFF/WAVE file. Accepts 16-bit and 24-bit integer PCM and
// 32-bit float data; multi-channel audio is mixed to mono by averaging.
AudioBuffer read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavSampleFormat format = WavSampleFormat::Pcm16);

}  // namespace prosody
