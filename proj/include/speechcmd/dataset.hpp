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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "speechcmd/audio.hpp"
#include "speechcmd/labels.hpp"

namespace speechcmd {

enum class Split { kUnassigned, kTrain, kVal };

const char* split_name(Split s);

struct Augmentation {
  enum class Kind { kNone, kNoiseMixed };
  Kind kind = Kind::kNone;
  double snr_db = 0.0;     // meaningful only for kNoiseMixed
  std::string noise_path;  // clip reference of the noise segment

  bool operator==(const Augmentation&) const = default;
};

/// One manifest line. `path` is a clip reference relative to the dataset
/// root: a file path, optionally followed by a fragment
///   "#seg=<start>"  one second starting at sample <start> (16 kHz) of the file
///   "#mix"          the file mixed with `augmentation.noise_path`
struct ManifestRecord {
  std::string path;
  int label = 0;
  Split split = Split::kUnassigned;
  Augmentation augmentation;
  double duration_s = 0.0;

  bool operator==(const ManifestRecord&) const = default;
};

struct Diagnostic {
  std::string path;
  std::string reason;

  bool operator==(const Diagnostic&) const = default;
};

// Noise file known to ingest; length is in 16 kHz samples.
struct NoiseSource {
  std::string path;
  std::size_t samples_16k = 0;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::uint64_t seed = 0;
  std::string root;
  std::array<std::size_t, kNumClasses> class_counts{};
  std::vector<Diagnostic> skipped;
  std::vector<NoiseSource> noise_sources;  // not serialized

  void recount();
  // Throws InvalidInput if labels are out of range, paths repeat,
  // augmentation fields are inconsistent, or class_counts is stale.
  void validate() const;
  std::size_t count(Split s) const;
};

struct ClipRef {
  std::string file;
  std::optional<std::size_t> start_sample;
  bool mixed = false;
};

ClipRef parse_clip_ref(const std::string& path);
std::string segment_ref(const std::string& file, std::size_t start_sample);

/// Scans a Speech Commands style tree. Word directories named after a
/// command get that label, every other word directory maps to "unknown".
/// Files in _background_noise_ become non-overlapping one-second
/// "background" records. Records are sorted by path.
DatasetManifest ingest(const std::filesystem::path& root);

// Consecutive one-second clips; trailing remainder is dropped.
std::vector<AudioClip> segment_background(const std::vector<AudioClip>& noise_clips);

struct MixResult {
  AudioClip clip;
  double gain = 0.0;     // factor applied to the noise
  bool flagged = false;  // clip was silent; output is reference-level noise
};

inline constexpr double kSilentClipNoiseRms = 0.05;

// clip + g * noise with g chosen so that 20 log10(rms(clip) / rms(g noise))
// equals snr_db, clipped to [-1, 1]. snr_db = +inf returns the clip as is.
MixResult augment_mix(const AudioClip& clip, const AudioClip& noise, double snr_db);

// Stratified: each class is shuffled independently and its first
// round(count * train_fraction) records go to train.
DatasetManifest split(const DatasetManifest& manifest, double train_fraction,
                      std::uint64_t seed);

struct PrepareConfig {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  bool cap_unknown = true;
  bool balance_background = true;
  bool augment = true;
  double snr_min_db = 5.0;
  double snr_max_db = 30.0;
};

/// ingest, cap "unknown" at the largest command class, bring "background"
/// to the smallest command class (extra random one-second crops or
/// subsampling), stratified split, then one noise-mixed copy of every
/// training command clip.
DatasetManifest prepare_dataset(const std::filesystem::path& root, const PrepareConfig& cfg);

// Resolves a record to its 16 kHz audio, regenerating segments and
// noise mixes from the stored provenance.
AudioClip load_record_audio(const std::filesystem::path& root, const ManifestRecord& record);

std::string manifest_to_jsonl(const DatasetManifest& manifest);
DatasetManifest manifest_from_jsonl(const std::string& text);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace speechcmd
