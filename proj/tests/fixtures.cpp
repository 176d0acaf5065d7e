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

#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sys/wait.h>
#include <unistd.h>

#include "speechcmd/labels.hpp"
#include "speechcmd/rng.hpp"

namespace speechcmd::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

AudioClip synth_tone(double freq_hz, double seconds, int rate, double amplitude, double phase) {
  AudioClip clip;
  clip.sample_rate = rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    clip.samples[i] = static_cast<float>(
        amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate + phase));
  return clip;
}

namespace {

AudioClip word_clip(double f1, double f2, SplitMix64& rng) {
  constexpr int kRate = 16000;
  const double seconds = rng.uniform(0.7, 1.0);
  const auto n = static_cast<std::size_t>(seconds * kRate);
  const double jitter = rng.uniform(0.97, 1.03);
  const double amp = rng.uniform(0.2, 0.5);
  AudioClip clip{std::vector<float>(n), kRate};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    const double env = std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    const double v = 0.6 * std::sin(2 * std::numbers::pi * f1 * jitter * t) +
                     0.4 * std::sin(2 * std::numbers::pi * f2 * jitter * t);
    clip.samples[i] = static_cast<float>(amp * env * v + 0.005 * rng.normal());
  }
  return clip;
}

}  // namespace

void write_mini_dataset(const fs::path& root, const MiniDatasetSpec& spec) {
  SplitMix64 rng(spec.seed);
  fs::create_directories(root);
  for (int c = 0; c < kNumCommands; ++c) {
    const fs::path dir = root / std::string(class_name(c));
    fs::create_directories(dir);
    const double f1 = 250.0 * std::pow(1.3, c);
    const double f2 = f1 * (c % 2 == 0 ? 1.5 : 2.5);
    for (std::size_t i = 0; i < spec.clips_per_command; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "spk%03zu_nohash_0.wav", i);
      write_wav(dir / name, word_clip(f1, f2, rng));
    }
  }
  const char* unknown_words[] = {"bird", "tree", "house", "marvin"};
  for (std::size_t w = 0; w < spec.unknown_words && w < std::size(unknown_words); ++w) {
    const fs::path dir = root / unknown_words[w];
    fs::create_directories(dir);
    for (std::size_t i = 0; i < spec.clips_per_unknown_word; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "spk%03zu_nohash_0.wav", i);
      const double f1 = rng.uniform(4200.0, 6000.0);
      write_wav(dir / name, word_clip(f1, f1 * 0.8, rng));
    }
  }
  const fs::path noise_dir = root / std::string(kBackgroundNoiseDir);
  fs::create_directories(noise_dir);
  for (std::size_t k = 0; k < spec.noise_files; ++k) {
    AudioClip noise{std::vector<float>(static_cast<std::size_t>(spec.noise_seconds * 16000)), 16000};
    double brown = 0.0;
    for (auto& s : noise.samples) {
      const double white = rng.normal();
      brown = 0.98 * brown + 0.02 * white;
      s = static_cast<float>(k % 2 == 0 ? 0.1 * white : 1.5 * brown);
    }
    write_wav(noise_dir / ("noise" + std::to_string(k) + ".wav"), noise);
  }
}

ClusterSet make_clusters(std::size_t n_per_class, std::size_t dim, double sigma, std::uint64_t seed) {
  SplitMix64 rng(seed);
  ClusterSet out;
  out.means = Eigen::MatrixXd(kNumClasses, static_cast<Eigen::Index>(dim));
  for (Eigen::Index c = 0; c < kNumClasses; ++c)
    for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(dim); ++d) out.means(c, d) = 3.0 * rng.normal();

  const std::size_t n_train = n_per_class * 4 / 5;
  const std::size_t n_val = n_per_class - n_train;
  out.train.features.resize(static_cast<Eigen::Index>(n_train * kNumClasses), static_cast<Eigen::Index>(dim));
  out.val.features.resize(static_cast<Eigen::Index>(n_val * kNumClasses), static_cast<Eigen::Index>(dim));
  std::size_t tr = 0, va = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      LabeledSet& set = i < n_train ? out.train : out.val;
      std::size_t& row = i < n_train ? tr : va;
      for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(dim); ++d)
        set.features(static_cast<Eigen::Index>(row), d) = static_cast<float>(out.means(c, d) + sigma * rng.normal());
      set.labels.push_back(c);
      ++row;
    }
  }
  return out;
}

std::string read_file_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CommandResult run_command(const std::string& command_line, bool with_stderr) {
  CommandResult result;
  const std::string full = command_line + (with_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = ::popen(full.c_str(), "r");
  if (pipe == nullptr) return result;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string shell_quote(const std::string& arg) {
  std::string q = "'";
  for (char c : arg) {
    if (c == '\'') q += "'\\''";
    else q += c;
  }
  return q + "'";
}

}  // namespace speechcmd::testing
