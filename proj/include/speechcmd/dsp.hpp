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

#include <cstddef>
#include <string>
#include <vector>

#include "speechcmd/audio.hpp"
#include "speechcmd/grid.hpp"

namespace speechcmd {

inline constexpr int kTargetSampleRate = 16000;
inline constexpr double kSegmentDurationS = 1.0;
inline constexpr int kNumMelBands = 50;
inline constexpr double kLogFloor = 1e-6;

/// Framing parameters. frame_len and hop_len are derived by rounding
/// duration x rate; the defaults give 400 and 160 samples at 16 kHz.
struct FrameConfig {
  double frame_duration_s = 0.025;
  double hop_duration_s = 0.010;
  int sample_rate = kTargetSampleRate;

  std::size_t frame_len() const;
  std::size_t hop_len() const;
  // Throws InvalidInput unless 0 < hop_len <= frame_len.
  void validate() const;
};

/// One-sided power spectrum, one row per frame, floor(frame_len/2)+1 bins.
struct Spectrogram {
  Grid<double> values;
  double bin_hz = 0.0;

  std::size_t n_frames() const { return values.rows(); }
  std::size_t n_bins() const { return values.cols(); }
};

struct MelFilterbank {
  Grid<double> weights;  // [n_bands x n_bins], peak-1 triangles
  std::vector<double> center_hz;
  double f_min = 0.0;
  double f_max = 0.0;

  std::size_t n_bands() const { return weights.rows(); }
  std::size_t n_bins() const { return weights.cols(); }
};

/// Log-mel energies of one 1-second segment, [frames x bands].
struct FeaturePatch {
  Grid<float> values;
  std::string source_clip_id;
  std::size_t segment_index = 0;
};

// Number of frames per one-second segment at the default configuration.
std::size_t frames_per_segment(const FrameConfig& cfg = {},
                               double segment_duration_s = kSegmentDurationS);

// Band-limited rational resampler (windowed sinc, Kaiser beta 8, 32 taps on
// each side of every polyphase branch). Equal rates return an exact copy.
AudioClip resample(const AudioClip& clip, int target_rate);

// Cuts a clip into segments of exactly segment_duration_s. A clip shorter
// than one segment is centered with zeros (extra odd sample goes to the
// tail); a longer clip is split consecutively and the final partial segment
// is zero-padded at the end. Empty input yields one all-zero segment.
std::vector<AudioClip> pad_or_trim(const AudioClip& clip,
                                   double segment_duration_s = kSegmentDurationS);

// Frame m covers samples [m*hop, m*hop + frame_len).
Grid<double> frame(const AudioClip& clip, const FrameConfig& cfg = {});

// Symmetric Hann window, w[n] = 0.5 (1 - cos(2 pi n / (N - 1))).
std::vector<double> hann_window(std::size_t length);

// |DFT(frame * window)|^2 with transform length equal to the frame length.
Spectrogram stft_power(const Grid<double>& frames, int sample_rate = kTargetSampleRate);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// f_max <= 0 means sample_rate / 2. Bin k is centered at
// k * (sample_rate / 2) / (n_bins - 1).
MelFilterbank build_filterbank(std::size_t n_bands, std::size_t n_bins,
                               int sample_rate, double f_min = 0.0,
                               double f_max = -1.0);

// [frames x bins] * weights^T -> [frames x bands]
Grid<double> apply_filterbank(const Spectrogram& spec, const MelFilterbank& bank);

/// Front-end settings. Defaults: 16 kHz, 1 s segments, 25 ms frames with a
/// 10 ms hop, 50 mel bands spanning 0 Hz to Nyquist, log floor 1e-6.
struct FrontendConfig {
  FrameConfig frame;
  double segment_duration_s = kSegmentDurationS;
  std::size_t n_bands = kNumMelBands;
  double f_min_hz = 0.0;
  double f_max_hz = -1.0;  // <= 0 means Nyquist
  double log_floor = kLogFloor;

  int sample_rate() const { return frame.sample_rate; }
  std::size_t n_frames() const { return frames_per_segment(frame, segment_duration_s); }
  std::size_t patch_size() const { return n_frames() * n_bands; }
  void validate() const;
};

/// Full front-end: resample, segment, frame, power spectrum, mel
/// filterbank, ln(x + floor). One patch per segment.
std::vector<FeaturePatch> featurize(const AudioClip& clip, const std::string& clip_id = {},
                                    const FrontendConfig& cfg = {});

// Element-wise mean of equally shaped patches; used to give multi-segment
// clips a single feature row.
FeaturePatch mean_patch(const std::vector<FeaturePatch>& patches);

}  // namespace speechcmd
