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

#pragma once

#include <filesystem>
#include <vector>

namespace speechcmd {

/// Mono waveform. Samples are nominally in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Header-only probe of a RIFF/WAVE file.
struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::size_t frames = 0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

// Supports PCM 8/16/24/32-bit and IEEE float 32/64. Multichannel input is
// averaged to mono. Throws IOError when the file cannot be opened and
// FormatError when it is not a supported WAVE file.
WavInfo probe_wav(const std::filesystem::path& path);
AudioClip read_wav(const std::filesystem::path& path);

// Writes 16-bit PCM, clipping to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace speechcmd
