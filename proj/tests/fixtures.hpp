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

// Shared helpers for the unit and acceptance suites: scratch directories,
// a synthetic Speech Commands tree, and separable embedding clusters.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "speechcmd/audio.hpp"
#include "speechcmd/head.hpp"

namespace speechcmd::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "speechcmd");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct MiniDatasetSpec {
  std::size_t clips_per_command = 16;
  std::size_t clips_per_unknown_word = 10;
  std::size_t unknown_words = 2;
  std::size_t noise_files = 2;
  double noise_seconds = 12.5;
  std::uint64_t seed = 7;
};

// Writes <root>/<word>/<id>.wav for the ten commands, a few non-command
// words and _background_noise_/*.wav. Each command is a distinct two-tone
// chord with per-clip jitter, so log-mel patches separate the classes.
void write_mini_dataset(const std::filesystem::path& root, const MiniDatasetSpec& spec = {});

AudioClip synth_tone(double freq_hz, double seconds, int rate, double amplitude, double phase = 0.0);

struct ClusterSet {
  LabeledSet train;
  LabeledSet val;
  Eigen::MatrixXd means;  // [classes x dim]
};

// n_per_class Gaussian samples around well-separated means, split 80/20 per class.
ClusterSet make_clusters(std::size_t n_per_class, std::size_t dim, double sigma, std::uint64_t seed);

std::string read_file_text(const std::filesystem::path& path);

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command line and captures stdout, plus stderr when asked.
CommandResult run_command(const std::string& command_line, bool with_stderr = false);

// Single-quotes an argument for the shell.
std::string shell_quote(const std::string& arg);

}  // namespace speechcmd::testing
