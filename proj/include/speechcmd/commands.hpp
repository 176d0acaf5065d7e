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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "speechcmd/dataset.hpp"
#include "speechcmd/dsp.hpp"
#include "speechcmd/head.hpp"
#include "speechcmd/metrics.hpp"

namespace speechcmd {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitIo = 3,
};

/// Every tunable of the pipeline. Defaults are the reference settings
/// (16 kHz, 1 s segments, 25/10 ms framing, 50 bands, Adam with batch 128,
/// learning rate 0.0003, 15 epochs, 80/20 split).
struct RunConfig {
  std::uint64_t seed = 0;
  PrepareConfig dataset;
  FrontendConfig frontend;
  std::vector<std::size_t> hidden_dims{512};
  TrainConfig train;
  std::size_t threads = 1;

  // Copies the seed into the stage configs that consume it.
  void propagate_seed();
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
// Overlays keys present in `j` onto `cfg`; unknown keys are rejected.
void merge_json(RunConfig& cfg, const nlohmann::ordered_json& j);
RunConfig load_config_file(const std::filesystem::path& path);

/// Feature rows aligned with manifest records.
struct AlignedFeatures {
  RowMatrixXf rows;                   // one row per kept record
  std::vector<std::size_t> record_of;  // manifest index of each row
};

// Reads an FPZ1 (plus its exclusion sidecar) or EMB1 file and aligns it to
// the manifest. Throws InvalidInput on a row-count mismatch.
AlignedFeatures load_features(const DatasetManifest& manifest,
                              const std::filesystem::path& features_path, bool embeddings);

// Rows of `aligned` whose record is in `split`.
LabeledSet select_split(const DatasetManifest& manifest, const AlignedFeatures& aligned, Split split);

std::filesystem::path exclusion_sidecar(const std::filesystem::path& features_path);
std::filesystem::path epoch_checkpoint_path(const std::filesystem::path& ckpt, std::size_t epoch);

struct PrepareOptions {
  std::filesystem::path root;
  std::filesystem::path out_manifest;
};

struct FeaturizeOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_fpz;
};

struct TrainOptions {
  std::filesystem::path features;
  bool embeddings = false;
  std::filesystem::path manifest;
  std::filesystem::path out_checkpoint;
  std::filesystem::path out_history;
  bool checkpoint_every_epoch = false;
};

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path features;
  bool embeddings = false;
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  std::filesystem::path history;  // optional, for curves.svg
};

struct PredictOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path audio;
  std::filesystem::path embeddings;  // optional EMB1 holding the clip's row
  std::size_t row = 0;
};

struct ReportOptions {
  std::filesystem::path confusion_csv;
  std::filesystem::path history_csv;  // optional
  std::filesystem::path out_dir;
};

// Each command throws InvalidInput / FormatError / IOError on failure.
DatasetManifest cmd_prepare(const PrepareOptions& opts, const RunConfig& cfg);
void cmd_featurize(const FeaturizeOptions& opts, const RunConfig& cfg);
TrainHistory cmd_train(const TrainOptions& opts, const RunConfig& cfg);
MetricReport cmd_eval(const EvalOptions& opts, const RunConfig& cfg);
Prediction cmd_predict(const PredictOptions& opts, const RunConfig& cfg);
MetricReport cmd_report(const ReportOptions& opts);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace speechcmd
