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

#include "speechcmd/head.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "speechcmd/errors.hpp"
#include "speechcmd/log.hpp"
#include "speechcmd/rng.hpp"
#include "speechcmd/storage.hpp"

namespace speechcmd {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr std::uint64_t kSaltShuffle = 0x73687566666c6500ULL;

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t n_classes) {
  if (labels.size() != rows)
    throw InvalidInput("label count " + std::to_string(labels.size()) + " does not match batch size " +
                       std::to_string(rows));
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw InvalidInput("label " + std::to_string(y) + " out of range");
}

void check_batch(const HeadParams& params, const RowMatrixXd& batch) {
  if (params.layers.empty()) throw InvalidInput("head has no layers");
  if (static_cast<std::size_t>(batch.cols()) != params.input_dim())
    throw InvalidInput("feature width " + std::to_string(batch.cols()) + " does not match head input " +
                       std::to_string(params.input_dim()));
  if (!batch.allFinite()) throw InvalidInput("batch contains non-finite values");
}

void softmax_rows(RowMatrixXd& logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

// Keeps pre-activations of every layer so backward can reuse them.
struct ForwardTrace {
  std::vector<RowMatrixXd> inputs;  // input to layer l
  std::vector<RowMatrixXd> pre;     // affine output of layer l
  RowMatrixXd probs;
};

ForwardTrace forward_trace(const HeadParams& params, const RowMatrixXd& batch) {
  check_batch(params, batch);
  ForwardTrace t;
  RowMatrixXd a = batch;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    RowMatrixXd z = a * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    t.inputs.push_back(std::move(a));
    if (l + 1 < params.layers.size()) {
      a = z.cwiseMax(0.0);
    } else {
      t.probs = z;
      softmax_rows(t.probs);
    }
    t.pre.push_back(std::move(z));
  }
  return t;
}

RowMatrixXd gather_rows(const RowMatrixXf& features, std::span<const std::size_t> idx) {
  RowMatrixXd out(static_cast<Eigen::Index>(idx.size()), features.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(idx[i])).cast<double>();
  return out;
}

int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (Eigen::Index c = 1; c < row.size(); ++c)
    if (row(c) > row(best)) best = static_cast<int>(c);
  return best;
}

}  // namespace

std::size_t HeadParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

HeadParams HeadParams::zeros_like() const {
  HeadParams z;
  for (const auto& l : layers)
    z.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  return z;
}

bool HeadParams::same_shape(const HeadParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weight.rows() != other.layers[i].weight.rows() ||
        layers[i].weight.cols() != other.layers[i].weight.cols() ||
        layers[i].bias.size() != other.layers[i].bias.size())
      return false;
  }
  return true;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidInput("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidInput("Adam epsilon must be > 0");
}

HeadParams init_head(const HeadConfig& cfg) {
  if (cfg.input_dim == 0 || cfg.n_classes == 0)
    throw InvalidInput("init_head: input_dim and n_classes must be positive");
  for (std::size_t h : cfg.hidden_dims)
    if (h == 0) throw InvalidInput("init_head: hidden layer width must be positive");

  std::vector<std::size_t> dims{cfg.input_dim};
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(cfg.n_classes);

  SplitMix64 rng(cfg.seed);
  HeadParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

RowMatrixXd forward(const HeadParams& params, const RowMatrixXd& batch) {
  return forward_trace(params, batch).probs;
}

double cross_entropy(const RowMatrixXd& probs, std::span<const int> labels) {
  check_labels(labels, static_cast<std::size_t>(probs.rows()), static_cast<std::size_t>(probs.cols()));
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    total -= std::log(std::max(probs(static_cast<Eigen::Index>(i), labels[i]), kProbFloor));
  return total / static_cast<double>(labels.size());
}

HeadParams backward(const HeadParams& params, const RowMatrixXd& batch, std::span<const int> labels) {
  ForwardTrace t = forward_trace(params, batch);
  check_labels(labels, static_cast<std::size_t>(batch.rows()), params.n_classes());
  HeadParams grads = params.zeros_like();
  if (labels.empty()) return grads;

  // d(mean CE)/d(logits) = (softmax - onehot) / B
  RowMatrixXd delta = t.probs;
  for (std::size_t i = 0; i < labels.size(); ++i) delta(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
  delta /= static_cast<double>(labels.size());

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    grads.layers[l].weight = delta.transpose() * t.inputs[l];
    grads.layers[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    RowMatrixXd upstream = delta * params.layers[l].weight;
    delta = upstream.cwiseProduct((t.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return grads;
}

AdamState make_adam_state(const HeadParams& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(AdamState& state, HeadParams& params, const HeadParams& grads, const TrainConfig& cfg) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v))
    throw InvalidInput("adam_step: parameter, gradient and state shapes differ");
  const std::size_t t = ++state.step;
  const double correct1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double correct2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));

  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    p.array() -= cfg.learning_rate * (m.array() / correct1) /
                 ((v.array() / correct2).sqrt() + cfg.epsilon);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, state.m.layers[l].weight, state.v.layers[l].weight,
           grads.layers[l].weight);
    update(params.layers[l].bias, state.m.layers[l].bias, state.v.layers[l].bias,
           grads.layers[l].bias);
  }
}

Evaluation evaluate(const HeadParams& params, const LabeledSet& set, std::size_t batch_size) {
  Evaluation ev;
  ev.predictions.reserve(set.size());
  if (set.size() == 0) return ev;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += batch_size) {
    const std::size_t end = std::min(set.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const RowMatrixXd probs = forward(params, gather_rows(set.features, idx));
    const std::span<const int> labels(set.labels.data() + start, end - start);
    loss_sum += cross_entropy(probs, labels) * static_cast<double>(labels.size());
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      const int pred = argmax_row(probs.row(r));
      ev.predictions.push_back(pred);
      if (pred == labels[static_cast<std::size_t>(r)]) ++correct;
    }
  }
  ev.loss = loss_sum / static_cast<double>(set.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(set.size());
  return ev;
}

std::pair<HeadParams, TrainHistory> train(const LabeledSet& train_set, const LabeledSet& val_set,
                                          const HeadConfig& head_cfg, const TrainConfig& cfg,
                                          const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.size() == 0 || val_set.size() == 0)
    throw InvalidInput("train: training and validation sets must be non-empty");
  if (static_cast<std::size_t>(train_set.features.rows()) != train_set.size() ||
      static_cast<std::size_t>(val_set.features.rows()) != val_set.size())
    throw InvalidInput("train: feature rows do not match label count");
  if (static_cast<std::size_t>(train_set.features.cols()) != head_cfg.input_dim ||
      static_cast<std::size_t>(val_set.features.cols()) != head_cfg.input_dim)
    throw InvalidInput("train: feature width does not match head input_dim");
  check_labels(train_set.labels, train_set.size(), head_cfg.n_classes);
  check_labels(val_set.labels, val_set.size(), head_cfg.n_classes);

  std::vector<bool> seen(head_cfg.n_classes, false);
  for (int y : train_set.labels) seen[static_cast<std::size_t>(y)] = true;
  for (std::size_t c = 0; c < seen.size(); ++c)
    if (!seen[c])
      log::warn("train.coverage", "class " + std::to_string(c) + " has no training samples",
                {{"class", c}});

  HeadParams params = init_head(head_cfg);
  AdamState state = make_adam_state(params);
  TrainHistory history;
  SplitMix64 shuffle_rng = SplitMix64(cfg.seed).fork(kSaltShuffle);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.shuffle_each_epoch) shuffle(std::span<std::size_t>(order), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::vector<int> labels;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const RowMatrixXd batch = gather_rows(train_set.features, idx);
      labels.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = train_set.labels[idx[i]];

      // Training metrics come from the pre-update forward pass, like a
      // running training curve.
      const RowMatrixXd probs = forward(params, batch);
      loss_sum += cross_entropy(probs, labels) * static_cast<double>(labels.size());
      for (Eigen::Index r = 0; r < probs.rows(); ++r)
        if (argmax_row(probs.row(r)) == labels[static_cast<std::size_t>(r)]) ++correct;

      adam_step(state, params, backward(params, batch, labels), cfg);
      ++rec.steps;
    }
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());

    const Evaluation val = evaluate(params, val_set);
    rec.val_loss = val.loss;
    rec.val_acc = val.accuracy;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.total_steps += rec.steps;
    history.epochs.push_back(rec);

    log::info("train.epoch",
              "epoch " + std::to_string(epoch) + "/" + std::to_string(cfg.epochs) +
                  " train_loss=" + std::to_string(rec.train_loss) +
                  " train_acc=" + std::to_string(rec.train_acc) +
                  " val_loss=" + std::to_string(rec.val_loss) +
                  " val_acc=" + std::to_string(rec.val_acc) + " steps=" + std::to_string(rec.steps),
              {{"epoch", epoch},
               {"train_loss", rec.train_loss},
               {"train_acc", rec.train_acc},
               {"val_loss", rec.val_loss},
               {"val_acc", rec.val_acc},
               {"steps", rec.steps}});
    if (on_epoch) on_epoch(rec, params);
  }
  return {std::move(params), std::move(history)};
}

Prediction predict(const HeadParams& params, std::span<const float> features) {
  RowMatrixXd row(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = features[i];
  const RowMatrixXd probs = forward(params, row);
  Prediction p;
  p.label = argmax_row(probs.row(0));
  p.probabilities.assign(probs.data(), probs.data() + probs.cols());
  return p;
}

std::vector<int> predict_labels(const HeadParams& params, const RowMatrixXf& features) {
  LabeledSet set{features, std::vector<int>(static_cast<std::size_t>(features.rows()), 0)};
  return evaluate(params, set).predictions;
}

void save_checkpoint(const HeadParams& params, const std::filesystem::path& path) {
  std::vector<unsigned char> out{'H', 'D', 'P', '1'};
  binio::put_u32(out, static_cast<std::uint32_t>(params.layers.size()));
  for (const auto& l : params.layers) {
    binio::put_u32(out, static_cast<std::uint32_t>(l.weight.cols()));
    binio::put_u32(out, static_cast<std::uint32_t>(l.weight.rows()));
  }
  for (const auto& l : params.layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite())
      throw InvalidInput("save_checkpoint: parameters contain non-finite values");
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        binio::put_f32(out, static_cast<float>(l.weight(r, c)));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) binio::put_f32(out, static_cast<float>(l.bias(r)));
  }
  binio::write_file(path, out);
}

HeadParams load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = binio::read_file(path);
  if (bytes.size() < 8) throw FormatError("truncated HDP1 header", bytes.size());
  if (std::memcmp(bytes.data(), "HDP1", 4) != 0) throw FormatError("bad magic, expected \"HDP1\"", 0);
  const std::uint32_t n_layers = binio::get_u32(bytes.data() + 4);
  const std::size_t header = 8 + 8 * static_cast<std::size_t>(n_layers);
  if (n_layers == 0) throw FormatError("checkpoint has no layers", 4);
  if (bytes.size() < header) throw FormatError("truncated HDP1 layer table", bytes.size());

  HeadParams p;
  std::size_t expected = header;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint32_t in = binio::get_u32(bytes.data() + 8 + 8 * l);
    const std::uint32_t out = binio::get_u32(bytes.data() + 12 + 8 * l);
    if (in == 0 || out == 0) throw FormatError("zero layer dimension", 8 + 8 * l);
    if (l > 0 && in != p.layers.back().weight.rows())
      throw FormatError("layer dimensions do not chain", 8 + 8 * l);
    p.layers.push_back({Eigen::MatrixXd(out, in), Eigen::VectorXd(out)});
    expected += 4 * (static_cast<std::size_t>(in) * out + out);
  }
  if (bytes.size() != expected)
    throw FormatError("expected " + std::to_string(expected) + " bytes, file has " +
                          std::to_string(bytes.size()),
                      std::min(expected, bytes.size()));
  std::size_t pos = header;
  for (auto& l : p.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c, pos += 4)
        l.weight(r, c) = binio::get_f32(bytes.data() + pos);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r, pos += 4) l.bias(r) = binio::get_f32(bytes.data() + pos);
  }
  return p;
}

}  // namespace speechcmd
