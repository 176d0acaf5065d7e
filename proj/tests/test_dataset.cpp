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

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "speechcmd/dataset.hpp"
#include "speechcmd/errors.hpp"
#include "speechcmd/rng.hpp"

using namespace speechcmd;
namespace fs = std::filesystem;

namespace {

double rms_of(const std::vector<float>& x) {
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

AudioClip random_clip(std::size_t n, double scale, SplitMix64& rng) {
  AudioClip c{std::vector<float>(n), 16000};
  for (auto& s : c.samples) s = static_cast<float>(scale * rng.normal());
  return c;
}

DatasetManifest synthetic(const std::vector<std::size_t>& per_class) {
  DatasetManifest m;
  for (std::size_t c = 0; c < per_class.size(); ++c)
    for (std::size_t i = 0; i < per_class[c]; ++i)
      m.records.push_back({std::string(class_name(static_cast<int>(c))) + "/" + std::to_string(i) + ".wav",
                           static_cast<int>(c), Split::kUnassigned, {}, 1.0});
  m.recount();
  return m;
}

}  // namespace

TEST_CASE("ingest labels folders") {
  testing::TempDir dir;
  const AudioClip tone = testing::synth_tone(440.0, 0.5, 16000, 0.3);
  fs::create_directories(dir / "yes");
  fs::create_directories(dir / "tree");
  for (int i = 0; i < 3; ++i) write_wav(dir / ("yes/" + std::to_string(i) + ".wav"), tone);
  for (int i = 0; i < 2; ++i) write_wav(dir / ("tree/" + std::to_string(i) + ".wav"), tone);
  std::ofstream(dir / "yes/broken.wav") << "not a wave file";
  std::ofstream(dir / "yes/readme.txt") << "ignored";

  const DatasetManifest m = ingest(dir.path());
  CHECK(m.records.size() == 5);
  CHECK(m.class_counts[0] == 3);
  CHECK(m.class_counts[kUnknownClass] == 2);
  REQUIRE(m.skipped.size() == 1);
  CHECK(m.skipped[0].path == "yes/broken.wav");
  for (const auto& r : m.records) CHECK(r.duration_s == doctest::Approx(0.5));
  CHECK(std::is_sorted(m.records.begin(), m.records.end(),
                       [](const auto& a, const auto& b) { return a.path < b.path; }));

  CHECK_THROWS_AS(ingest(dir / "missing"), IOError);
}

TEST_CASE("background noise is cut into whole seconds") {
  SplitMix64 rng(1);
  CHECK(segment_background({random_clip(968000, 0.1, rng)}).size() == 60);
  CHECK(segment_background({random_clip(12800, 0.1, rng)}).empty());
  const AudioClip one = random_clip(16000, 0.1, rng);
  const auto segs = segment_background({one});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].samples == one.samples);
  const auto two = segment_background({random_clip(40000, 0.1, rng), random_clip(16000, 0.1, rng)});
  CHECK(two.size() == 3);
}

TEST_CASE("noise mixing hits the requested SNR") {
  SplitMix64 rng(3);
  const AudioClip clip = random_clip(16000, 0.1, rng);
  const AudioClip noise = random_clip(16000, 0.2, rng);

  SUBCASE("infinite SNR is the identity") {
    const auto r = augment_mix(clip, noise, std::numeric_limits<double>::infinity());
    CHECK(r.clip.samples == clip.samples);
    CHECK_FALSE(r.flagged);
  }
  SUBCASE("0 dB with equal RMS gives unit gain") {
    AudioClip a = clip, b = noise;
    const double ra = rms_of(a.samples), rb = rms_of(b.samples);
    for (auto& s : a.samples) s = static_cast<float>(s / ra * 0.1);
    for (auto& s : b.samples) s = static_cast<float>(s / rb * 0.1);
    CHECK(augment_mix(a, b, 0.0).gain == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("measured SNR") {
    for (double snr : {5.0, 12.5, 30.0}) {
      const auto r = augment_mix(clip, noise, snr);
      std::vector<float> added(clip.samples.size());
      for (std::size_t i = 0; i < added.size(); ++i) added[i] = r.clip.samples[i] - clip.samples[i];
      const double measured = 20.0 * std::log10(rms_of(clip.samples) / rms_of(added));
      CHECK(std::abs(measured - snr) < 0.1);
    }
  }
  SUBCASE("silent clip is flagged and receives reference-level noise") {
    const AudioClip silent{std::vector<float>(16000, 0.0f), 16000};
    const auto r = augment_mix(silent, noise, 10.0);
    CHECK(r.flagged);
    CHECK(rms_of(r.clip.samples) == doctest::Approx(kSilentClipNoiseRms).epsilon(1e-3));
  }
  SUBCASE("silent noise leaves the clip alone") {
    const AudioClip quiet{std::vector<float>(16000, 0.0f), 16000};
    CHECK(augment_mix(clip, quiet, 10.0).clip.samples == clip.samples);
  }
  SUBCASE("output stays in range") {
    AudioClip loud = clip;
    for (auto& s : loud.samples) s *= 9.0f;
    for (float s : augment_mix(loud, noise, 0.0).clip.samples) {
      CHECK(s <= 1.0f);
      CHECK(s >= -1.0f);
    }
  }
  SUBCASE("mismatched lengths") {
    CHECK_THROWS_AS(augment_mix(clip, random_clip(100, 0.1, rng), 5.0), InvalidInput);
  }
}

TEST_CASE("stratified split") {
  SUBCASE("counts follow rounding") {
    const auto a = split(synthetic({100}), 0.8, 1);
    CHECK(a.count(Split::kTrain) == 80);
    CHECK(a.count(Split::kVal) == 20);
    const auto b = split(synthetic({5208}), 0.8, 1);
    CHECK(b.count(Split::kTrain) == 4166);
    CHECK(b.count(Split::kVal) == 1042);
  }
  SUBCASE("partition, stratification and determinism") {
    const auto m = synthetic({30, 31, 0, 7, 2, 50, 9, 9, 9, 9, 100, 13});
    const auto a = split(m, 0.8, 42), b = split(m, 0.8, 42), c = split(m, 0.8, 43);
    CHECK(a.records == b.records);
    CHECK_FALSE(a.records == c.records);
    CHECK(a.records.size() == m.records.size());
    std::array<std::size_t, kNumClasses> train{};
    for (const auto& r : a.records) {
      CHECK(r.split != Split::kUnassigned);
      if (r.split == Split::kTrain) ++train[static_cast<std::size_t>(r.label)];
    }
    for (int k = 0; k < kNumClasses; ++k)
      CHECK(train[static_cast<std::size_t>(k)] ==
            static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(m.class_counts[static_cast<std::size_t>(k)]))));
  }
  SUBCASE("singleton class is refused") { CHECK_THROWS_AS(split(synthetic({10, 1}), 0.8, 0), InvalidInput); }
  SUBCASE("fraction out of range") { CHECK_THROWS_AS(split(synthetic({10}), 1.0, 0), InvalidInput); }
}

TEST_CASE("clip references") {
  CHECK(parse_clip_ref("a/b.wav").file == "a/b.wav");
  const auto seg = parse_clip_ref(segment_ref("n/x.wav", 32000));
  CHECK(seg.file == "n/x.wav");
  CHECK(*seg.start_sample == 32000);
  CHECK(parse_clip_ref("yes/a.wav#mix").mixed);
  CHECK_THROWS_AS(parse_clip_ref("a.wav#seg=12x"), InvalidInput);
  CHECK_THROWS_AS(parse_clip_ref("a.wav#other"), InvalidInput);
}

TEST_CASE("prepare on the mini dataset") {
  testing::TempDir dir;
  testing::write_mini_dataset(dir / "data");
  PrepareConfig cfg;
  cfg.seed = 5;
  const DatasetManifest m = prepare_dataset(dir / "data", cfg);

  // 16 clips per command; unknown capped and background trimmed to 16.
  for (int c = 0; c < kNumCommands; ++c) CHECK(m.class_counts[static_cast<std::size_t>(c)] == 16 + 13);
  CHECK(m.class_counts[kUnknownClass] == 16);
  CHECK(m.class_counts[kBackgroundClass] == 16);
  CHECK(m.count(Split::kVal) == 12 * 3);

  std::set<std::string> val_paths;
  for (const auto& r : m.records)
    if (r.split == Split::kVal) val_paths.insert(r.path);
  for (const auto& r : m.records) {
    if (r.augmentation.kind != Augmentation::Kind::kNoiseMixed) continue;
    CHECK(r.split == Split::kTrain);
    CHECK(r.augmentation.snr_db >= 5.0);
    CHECK(r.augmentation.snr_db <= 30.0);
    CHECK(val_paths.count(parse_clip_ref(r.path).file) == 0);
    CHECK(parse_clip_ref(r.augmentation.noise_path).start_sample.has_value());
  }
  CHECK(prepare_dataset(dir / "data", cfg).records == m.records);

  const auto& mixed = *std::find_if(m.records.begin(), m.records.end(), [](const auto& r) {
    return r.augmentation.kind == Augmentation::Kind::kNoiseMixed;
  });
  const AudioClip audio = load_record_audio(dir / "data", mixed);
  CHECK(audio.samples.size() == 16000);

  SUBCASE("background top-up when noise is scarce") {
    testing::TempDir small;
    testing::MiniDatasetSpec spec;
    spec.noise_files = 1;
    spec.noise_seconds = 3.5;
    testing::write_mini_dataset(small / "data", spec);
    cfg.augment = false;
    const auto s = prepare_dataset(small / "data", cfg);
    CHECK(s.class_counts[kBackgroundClass] == 16);
  }
}

TEST_CASE("manifest serialization") {
  testing::TempDir dir;
  testing::write_mini_dataset(dir / "data");
  std::ofstream(dir / "data/yes/bad.wav") << "RIFF????";
  PrepareConfig cfg;
  cfg.seed = 9;
  const DatasetManifest m = prepare_dataset(dir / "data", cfg);
  REQUIRE(m.skipped.size() == 1);

  write_manifest(m, dir / "m.jsonl");
  const DatasetManifest back = read_manifest(dir / "m.jsonl");
  CHECK(back.records == m.records);
  CHECK(back.seed == 9);
  CHECK(back.skipped == m.skipped);
  CHECK(back.class_counts == m.class_counts);
  write_manifest(back, dir / "m2.jsonl");
  CHECK(testing::read_file_text(dir / "m.jsonl") == testing::read_file_text(dir / "m2.jsonl"));

  std::string text = manifest_to_jsonl(m);
  CHECK_THROWS_AS(manifest_from_jsonl(text + "{\"path\": 3}\n"), FormatError);
  CHECK_THROWS_AS(manifest_from_jsonl("not json\n"), FormatError);
  const auto pos = text.find("\"label\":\"yes\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 13, "\"label\":\"zzz\"");
  CHECK_THROWS(manifest_from_jsonl(text));
}
