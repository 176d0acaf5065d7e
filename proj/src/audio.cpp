// Copyright 2026 The speechcmd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "speechcmd/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "speechcmd/errors.hpp"

namespace speechcmd {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

struct ParsedWav {
  WavInfo info;
  std::uint16_t format = 0;
  std::size_t data_offset = 0;
  std::size_t data_bytes = 0;
};

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ParsedWav parse(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file", 0);

  ParsedWav out;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size())
        throw FormatError("truncated fmt chunk", pos);
      out.format = le16(bytes.data() + body);
      out.info.channels = le16(bytes.data() + body + 2);
      out.info.sample_rate = static_cast<int>(le32(bytes.data() + body + 4));
      out.info.bits_per_sample = le16(bytes.data() + body + 14);
      if (out.format == kFormatExtensible && size >= 26 &&
          body + 26 <= bytes.size())
        out.format = le16(bytes.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk", pos);
      out.data_offset = body;
      // Tolerate writers that leave the size field short or oversized.
      out.data_bytes = std::min(size, bytes.size() - body);
      const std::size_t frame_bytes =
          static_cast<std::size_t>(out.info.channels) *
          (out.info.bits_per_sample / 8);
      if (frame_bytes == 0) throw FormatError("zero-sized sample frame", pos);
      out.info.frames = out.data_bytes / frame_bytes;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw FormatError("missing fmt chunk", 12);
  if (out.data_offset == 0) throw FormatError("missing data chunk", pos);
  if (out.info.channels <= 0 || out.info.sample_rate <= 0)
    throw FormatError("invalid channel count or sample rate", 12);

  const int bits = out.info.bits_per_sample;
  const bool pcm_ok =
      out.format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = out.format == kFormatFloat && (bits == 32 || bits == 64);
  if (!pcm_ok && !float_ok)
    throw FormatError("unsupported WAVE encoding (format " +
                          std::to_string(out.format) + ", " +
                          std::to_string(bits) + " bits)",
                      12);
  return out;
}

double decode_sample(const unsigned char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    if (bits == 32) return std::bit_cast<float>(le32(p));
    std::uint64_t raw = 0;
    for (int i = 7; i >= 0; --i) raw = (raw << 8) | p[i];
    return std::bit_cast<double>(raw);
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
}

}  // namespace

WavInfo probe_wav(const std::filesystem::path& path) {
  return parse(slurp(path)).info;
}

AudioClip read_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const ParsedWav wav = parse(bytes);
  const int channels = wav.info.channels;
  const int bytes_per_sample = wav.info.bits_per_sample / 8;

  AudioClip clip;
  clip.sample_rate = wav.info.sample_rate;
  clip.samples.resize(wav.info.frames);
  const unsigned char* p = bytes.data() + wav.data_offset;
  for (std::size_t f = 0; f < wav.info.frames; ++f) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c, p += bytes_per_sample)
      acc += decode_sample(p, wav.format, wav.info.bits_per_sample);
    clip.samples[f] = static_cast<float>(acc / channels);
  }
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v));
    out.push_back(static_cast<unsigned char>(v >> 8));
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };

  tag("RIFF");
  put32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  put32(16);
  put16(kFormatPcm);
  put16(1);
  put32(static_cast<std::uint32_t>(clip.sample_rate));
  put32(static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put16(2);
  put16(16);
  tag("data");
  put32(data_bytes);
  for (float s : clip.samples) {
    const double clipped = std::clamp(static_cast<double>(s), -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(
        std::clamp(std::lround(clipped * 32767.0), -32768L, 32767L));
    put16(static_cast<std::uint16_t>(v));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IOError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw IOError("write failed for " + path.string());
}

}  // namespace speechcmd
