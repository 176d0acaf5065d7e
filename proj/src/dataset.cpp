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

#include "speechcmd/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "speechcmd/dsp.hpp"
#include "speechcmd/errors.hpp"
#include "speechcmd/log.hpp"
#include "speechcmd/rng.hpp"

namespace speechcmd {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::size_t kSegmentSamples = kTargetSampleRate;  // 1 s at 16 kHz
constexpr int kManifestVersion = 1;

// Salts for independent random streams derived from the run seed.
constexpr std::uint64_t kSaltUnknown = 0x756e6b6e6f776e00ULL;
constexpr std::uint64_t kSaltBackground = 0x6261636b67726e64ULL;
constexpr std::uint64_t kSaltAugment = 0x6175676d656e7400ULL;

bool is_wav(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".wav";
}

std::size_t samples_at_16k(const WavInfo& info) {
  if (info.sample_rate == kTargetSampleRate) return info.frames;
  return static_cast<std::size_t>(
      (static_cast<std::uint64_t>(info.frames) * kTargetSampleRate + info.sample_rate / 2) /
      info.sample_rate);
}

double rms(const std::vector<float>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

void sort_by_path(std::vector<ManifestRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const ManifestRecord& a, const ManifestRecord& b) { return a.path < b.path; });
}

AudioClip load_16k(const fs::path& file) {
  AudioClip clip = read_wav(file);
  if (clip.samples.empty()) return AudioClip{{}, kTargetSampleRate};
  return resample(clip, kTargetSampleRate);
}

// One second of the referenced audio, zero-padded when the file is short.
AudioClip slice_second(const AudioClip& clip16, std::size_t start) {
  AudioClip out{std::vector<float>(kSegmentSamples, 0.0f), kTargetSampleRate};
  if (start < clip16.samples.size()) {
    const std::size_t n = std::min(kSegmentSamples, clip16.samples.size() - start);
    std::copy_n(clip16.samples.begin() + static_cast<std::ptrdiff_t>(start), n,
                out.samples.begin());
  }
  return out;
}

AudioClip load_ref(const fs::path& root, const std::string& ref) {
  const ClipRef parsed = parse_clip_ref(ref);
  AudioClip clip = load_16k(root / parsed.file);
  if (parsed.start_sample) return slice_second(clip, *parsed.start_sample);
  return clip;
}

Split parse_split(const std::string& s, std::size_t offset) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "unassigned") return Split::kUnassigned;
  throw FormatError("unknown split \"" + s + "\"", offset);
}

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

void DatasetManifest::recount() {
  class_counts.fill(0);
  for (const auto& r : records) ++class_counts.at(static_cast<std::size_t>(r.label));
}

void DatasetManifest::validate() const {
  std::array<std::size_t, kNumClasses> counts{};
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (r.label < 0 || r.label >= kNumClasses)
      throw InvalidInput("manifest: label " + std::to_string(r.label) + " out of range for " + r.path);
    if (!seen.insert(r.path).second) throw InvalidInput("manifest: duplicate path " + r.path);
    const bool mixed = r.augmentation.kind == Augmentation::Kind::kNoiseMixed;
    if (mixed && r.augmentation.noise_path.empty())
      throw InvalidInput("manifest: noise-mixed record without noise source: " + r.path);
    if (!mixed && !r.augmentation.noise_path.empty())
      throw InvalidInput("manifest: noise source on unaugmented record: " + r.path);
    ++counts[static_cast<std::size_t>(r.label)];
  }
  if (counts != class_counts) throw InvalidInput("manifest: class_counts does not match records");
}

std::size_t DatasetManifest::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [s](const ManifestRecord& r) { return r.split == s; }));
}

ClipRef parse_clip_ref(const std::string& path) {
  ClipRef ref;
  const auto hash = path.find('#');
  ref.file = path.substr(0, hash);
  if (hash == std::string::npos) return ref;
  const std::string frag = path.substr(hash + 1);
  if (frag == "mix") {
    ref.mixed = true;
  } else if (frag.rfind("seg=", 0) == 0) {
    try {
      std::size_t used = 0;
      ref.start_sample = static_cast<std::size_t>(std::stoull(frag.substr(4), &used));
      if (used != frag.size() - 4) throw std::invalid_argument(frag);
    } catch (const std::exception&) {
      throw InvalidInput("bad segment reference: " + path);
    }
  } else {
    throw InvalidInput("unknown clip reference fragment: " + path);
  }
  return ref;
}

std::string segment_ref(const std::string& file, std::size_t start_sample) {
  return file + "#seg=" + std::to_string(start_sample);
}

DatasetManifest ingest(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IOError("dataset root not found: " + root.string());

  DatasetManifest m;
  m.root = root.generic_string();

  std::vector<fs::path> word_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) word_dirs.push_back(entry.path());
  std::sort(word_dirs.begin(), word_dirs.end());

  for (const auto& dir : word_dirs) {
    const std::string word = dir.filename().string();
    const bool noise = word == kBackgroundNoiseDir;
    const auto cls = class_index(word);
    const int label = noise ? kBackgroundClass
                            : (cls && is_command(*cls) ? *cls : kUnknownClass);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && is_wav(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
      const std::string rel = fs::relative(file, root).generic_string();
      WavInfo info;
      try {
        info = probe_wav(file);
      } catch (const std::exception& e) {
        log::warn("ingest.skip", "skipping " + rel + ": " + e.what(),
                  {{"path", rel}, {"reason", e.what()}});
        m.skipped.push_back({rel, e.what()});
        continue;
      }
      if (noise) {
        const std::size_t len = samples_at_16k(info);
        m.noise_sources.push_back({rel, len});
        for (std::size_t start = 0; start + kSegmentSamples <= len; start += kSegmentSamples)
          m.records.push_back({segment_ref(rel, start), kBackgroundClass, Split::kUnassigned, {}, 1.0});
      } else {
        m.records.push_back({rel, label, Split::kUnassigned, {}, info.duration_s()});
      }
    }
  }
  sort_by_path(m.records);
  m.recount();
  return m;
}

std::vector<AudioClip> segment_background(const std::vector<AudioClip>& noise_clips) {
  std::vector<AudioClip> out;
  for (const auto& clip : noise_clips) {
    const auto seg = static_cast<std::size_t>(std::llround(clip.sample_rate * kSegmentDurationS));
    if (seg == 0) continue;
    for (std::size_t start = 0; start + seg <= clip.samples.size(); start += seg) {
      AudioClip c;
      c.sample_rate = clip.sample_rate;
      c.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
                       clip.samples.begin() + static_cast<std::ptrdiff_t>(start + seg));
      out.push_back(std::move(c));
    }
  }
  return out;
}

MixResult augment_mix(const AudioClip& clip, const AudioClip& noise, double snr_db) {
  if (clip.samples.size() != noise.samples.size() || clip.sample_rate != noise.sample_rate)
    throw InvalidInput("augment_mix: clip and noise must share length and sample rate");
  if (std::isnan(snr_db)) throw InvalidInput("augment_mix: SNR is NaN");

  MixResult result;
  result.clip = clip;
  if (snr_db == std::numeric_limits<double>::infinity()) return result;

  const double clip_rms = rms(clip.samples);
  const double noise_rms = rms(noise.samples);
  if (noise_rms == 0.0) return result;

  if (clip_rms == 0.0) {
    result.flagged = true;
    result.gain = kSilentClipNoiseRms / noise_rms;
  } else {
    result.gain = clip_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  }
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const double v = static_cast<double>(clip.samples[i]) + result.gain * noise.samples[i];
    result.clip.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return result;
}

DatasetManifest split(const DatasetManifest& manifest, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidInput("split: train_fraction must lie in (0, 1)");

  DatasetManifest out = manifest;
  sort_by_path(out.records);
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < out.records.size(); ++i)
    by_class.at(static_cast<std::size_t>(out.records[i].label)).push_back(i);

  SplitMix64 rng(seed);
  for (int c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[static_cast<std::size_t>(c)];
    if (idx.empty()) continue;
    if (idx.size() < 2)
      throw InvalidInput("split: class \"" + std::string(class_name(c)) +
                         "\" has fewer than 2 samples");
    shuffle(std::span<std::size_t>(idx), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(idx.size()) * train_fraction));
    for (std::size_t j = 0; j < idx.size(); ++j)
      out.records[idx[j]].split = j < n_train ? Split::kTrain : Split::kVal;
  }
  out.seed = seed;
  out.recount();
  return out;
}

DatasetManifest prepare_dataset(const fs::path& root, const PrepareConfig& cfg) {
  DatasetManifest m = ingest(root);
  m.seed = cfg.seed;
  SplitMix64 master(cfg.seed);

  std::size_t max_command = 0;
  std::size_t min_command = std::numeric_limits<std::size_t>::max();
  for (int c = 0; c < kNumCommands; ++c) {
    const std::size_t n = m.class_counts[static_cast<std::size_t>(c)];
    max_command = std::max(max_command, n);
    if (n > 0) min_command = std::min(min_command, n);
  }
  if (min_command == std::numeric_limits<std::size_t>::max()) min_command = 0;

  std::vector<std::string> noise_pool;
  for (const auto& r : m.records)
    if (r.label == kBackgroundClass) noise_pool.push_back(r.path);

  auto subsample = [&](int label, std::size_t keep, SplitMix64 rng) {
    std::vector<ManifestRecord> kept, pool;
    for (auto& r : m.records) (r.label == label ? pool : kept).push_back(std::move(r));
    shuffle(std::span<ManifestRecord>(pool), rng);
    if (pool.size() > keep) pool.resize(keep);
    kept.insert(kept.end(), std::make_move_iterator(pool.begin()),
                std::make_move_iterator(pool.end()));
    m.records = std::move(kept);
    sort_by_path(m.records);
  };

  SplitMix64 unknown_rng = master.fork(kSaltUnknown);
  if (cfg.cap_unknown && max_command > 0 && m.class_counts[kUnknownClass] > max_command)
    subsample(kUnknownClass, max_command, unknown_rng);

  SplitMix64 background_rng = master.fork(kSaltBackground);
  if (cfg.balance_background && min_command > 0) {
    const std::size_t have = m.class_counts[kBackgroundClass];
    if (have > min_command) {
      subsample(kBackgroundClass, min_command, background_rng);
    } else if (have < min_command) {
      std::vector<const NoiseSource*> usable;
      for (const auto& src : m.noise_sources)
        if (src.samples_16k >= kSegmentSamples) usable.push_back(&src);
      if (usable.empty()) {
        log::warn("prepare.background", "no noise file is long enough to draw background clips");
      } else {
        std::set<std::string> paths;
        for (const auto& r : m.records) paths.insert(r.path);
        std::size_t need = min_command - have;
        std::size_t attempts = 0;
        const std::size_t max_attempts = 64 * need;
        while (need > 0 && attempts++ < max_attempts) {
          const NoiseSource& src = *usable[background_rng.below(usable.size())];
          const std::size_t start =
              background_rng.below(src.samples_16k - kSegmentSamples + 1);
          std::string ref = segment_ref(src.path, start);
          if (!paths.insert(ref).second) continue;
          m.records.push_back({std::move(ref), kBackgroundClass, Split::kUnassigned, {}, 1.0});
          --need;
        }
        if (need > 0)
          log::warn("prepare.background", "noise files too short to reach the target background count");
        sort_by_path(m.records);
      }
    }
  }
  m.recount();

  m = split(m, cfg.train_fraction, cfg.seed);

  if (cfg.augment) {
    if (noise_pool.empty()) {
      log::warn("prepare.augment", "no background noise available; skipping noise augmentation");
    } else {
      SplitMix64 aug_rng = master.fork(kSaltAugment);
      std::vector<ManifestRecord> extra;
      for (const auto& r : m.records) {
        if (r.split != Split::kTrain || !is_command(r.label)) continue;
        ManifestRecord copy = r;
        copy.path = r.path + "#mix";
        copy.augmentation.kind = Augmentation::Kind::kNoiseMixed;
        copy.augmentation.noise_path = noise_pool[aug_rng.below(noise_pool.size())];
        copy.augmentation.snr_db = aug_rng.uniform(cfg.snr_min_db, cfg.snr_max_db);
        copy.duration_s = kSegmentDurationS;
        extra.push_back(std::move(copy));
      }
      m.records.insert(m.records.end(), extra.begin(), extra.end());
      sort_by_path(m.records);
    }
  }
  m.recount();
  m.validate();
  return m;
}

AudioClip load_record_audio(const fs::path& root, const ManifestRecord& record) {
  const ClipRef ref = parse_clip_ref(record.path);
  if (record.augmentation.kind == Augmentation::Kind::kNoiseMixed) {
    AudioClip clip = load_16k(root / ref.file);
    if (ref.start_sample) clip = slice_second(clip, *ref.start_sample);
    clip = pad_or_trim(clip, kSegmentDurationS).front();
    const AudioClip noise = load_ref(root, record.augmentation.noise_path);
    return augment_mix(clip, noise, record.augmentation.snr_db).clip;
  }
  return load_ref(root, record.path);
}

std::string manifest_to_jsonl(const DatasetManifest& m) {
  std::ostringstream out;
  ojson header;
  header["version"] = kManifestVersion;
  header["seed"] = m.seed;
  header["root"] = m.root;
  header["class_names"] = ojson::array();
  for (auto name : kClassNames) header["class_names"].push_back(name);
  header["class_counts"] = m.class_counts;
  ojson skipped = ojson::array();
  for (const auto& d : m.skipped) skipped.push_back({{"path", d.path}, {"reason", d.reason}});
  header["skipped"] = std::move(skipped);
  out << header.dump() << '\n';

  for (const auto& r : m.records) {
    ojson line;
    line["path"] = r.path;
    line["label"] = class_name(r.label);
    line["split"] = split_name(r.split);
    ojson aug;
    if (r.augmentation.kind == Augmentation::Kind::kNoiseMixed) {
      aug["kind"] = "noise_mixed";
      aug["snr_db"] = r.augmentation.snr_db;
      aug["noise_path"] = r.augmentation.noise_path;
    } else {
      aug["kind"] = "none";
    }
    line["augmentation"] = std::move(aug);
    line["duration_s"] = r.duration_s;
    out << line.dump() << '\n';
  }
  return out.str();
}

DatasetManifest manifest_from_jsonl(const std::string& text) {
  DatasetManifest m;
  std::size_t offset = 0;
  bool have_header = false;
  std::array<std::size_t, kNumClasses> declared{};

  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(offset, end - offset);
    const std::size_t line_offset = offset;
    offset = end + 1;
    if (line.empty()) continue;

    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("manifest: invalid JSON: ") + e.what(), line_offset);
    }
    try {
      if (!have_header) {
        if (j.at("version").get<int>() != kManifestVersion)
          throw FormatError("manifest: unsupported version", line_offset);
        m.seed = j.at("seed").get<std::uint64_t>();
        m.root = j.value("root", std::string{});
        declared = j.at("class_counts").get<std::array<std::size_t, kNumClasses>>();
        if (j.contains("skipped"))
          for (const auto& d : j["skipped"])
            m.skipped.push_back({d.at("path").get<std::string>(), d.at("reason").get<std::string>()});
        have_header = true;
        continue;
      }
      ManifestRecord r;
      r.path = j.at("path").get<std::string>();
      const auto label = class_index(j.at("label").get<std::string>());
      if (!label) throw FormatError("manifest: unknown label in " + line, line_offset);
      r.label = *label;
      r.split = parse_split(j.at("split").get<std::string>(), line_offset);
      const auto& aug = j.at("augmentation");
      const auto kind = aug.at("kind").get<std::string>();
      if (kind == "noise_mixed") {
        r.augmentation.kind = Augmentation::Kind::kNoiseMixed;
        r.augmentation.snr_db = aug.at("snr_db").get<double>();
        r.augmentation.noise_path = aug.at("noise_path").get<std::string>();
      } else if (kind != "none" || aug.contains("snr_db")) {
        throw FormatError("manifest: bad augmentation block in " + line, line_offset);
      }
      r.duration_s = j.at("duration_s").get<double>();
      m.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("manifest: ") + e.what(), line_offset);
    }
  }
  if (!have_header) throw FormatError("manifest: missing header line", 0);
  m.recount();
  if (m.class_counts != declared)
    throw FormatError("manifest: header class_counts disagree with records", 0);
  try {
    m.validate();
  } catch (const InvalidInput& e) {
    throw FormatError(e.what(), 0);
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  manifest.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot write " + path.string());
  out << manifest_to_jsonl(manifest);
  if (!out) throw IOError("write failed for " + path.string());
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return manifest_from_jsonl(text);
}

}  // namespace speechcmd
