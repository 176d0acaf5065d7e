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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "speechcmd/labels.hpp"

namespace speechcmd {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct HeadConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims{512};
  std::size_t n_classes = kNumClasses;
  std::uint64_t seed = 0;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // [out x in]
  Eigen::VectorXd bias;    // [out]
};

/// Fully connected stack: ReLU after every hidden layer, softmax at the end.
/// Gradients and Adam moments reuse the same shape.
struct HeadParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols()); }
  std::size_t n_classes() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows()); }
  std::size_t parameter_count() const;
  HeadParams zeros_like() const;
  bool same_shape(const HeadParams& other) const;
};

struct TrainConfig {
  std::size_t epochs = 15;
  std::size_t batch_size = 128;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool shuffle_each_epoch = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdamState {
  HeadParams m;
  HeadParams v;
  std::size_t step = 0;  // number of updates applied so far
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double seconds = 0.0;
  std::size_t steps = 0;  // optimizer steps taken in this epoch
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t total_steps = 0;
};

/// Features (one row per sample) with integer labels in [0, n_classes).
struct LabeledSet {
  RowMatrixXf features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// Glorot-uniform weights from SplitMix64(cfg.seed), zero biases.
HeadParams init_head(const HeadConfig& cfg);

// Row-wise class probabilities [B x n_classes].
RowMatrixXd forward(const HeadParams& params, const RowMatrixXd& batch);

// Mean of -ln(max(p[label], 1e-12)).
double cross_entropy(const RowMatrixXd& probs, std::span<const int> labels);

// Analytic gradient of mean cross-entropy with respect to every parameter.
HeadParams backward(const HeadParams& params, const RowMatrixXd& batch,
                    std::span<const int> labels);

AdamState make_adam_state(const HeadParams& params);

// One bias-corrected Adam update; `state.step` becomes the new step index t.
void adam_step(AdamState& state, HeadParams& params, const HeadParams& grads,
               const TrainConfig& cfg);

using EpochCallback = std::function<void(const EpochRecord&, const HeadParams&)>;

// Mini-batch Adam for cfg.epochs epochs. The final partial batch is kept.
// Validation runs once per epoch. Returns the last-epoch parameters.
std::pair<HeadParams, TrainHistory> train(const LabeledSet& train_set, const LabeledSet& val_set,
                                          const HeadConfig& head_cfg, const TrainConfig& train_cfg,
                                          const EpochCallback& on_epoch = {});

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

// Argmax with ties going to the lowest class index.
Prediction predict(const HeadParams& params, std::span<const float> features);
std::vector<int> predict_labels(const HeadParams& params, const RowMatrixXf& features);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<int> predictions;
};

Evaluation evaluate(const HeadParams& params, const LabeledSet& set, std::size_t batch_size = 512);

// HDP1 checkpoint: "HDP1", u32 layer count, per layer u32 in and u32 out,
// then per layer the weight [out x in] row-major and the bias, float32 LE.
void save_checkpoint(const HeadParams& params, const std::filesystem::path& path);
HeadParams load_checkpoint(const std::filesystem::path& path);

}  // namespace speechcmd
