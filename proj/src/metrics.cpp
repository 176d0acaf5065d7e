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

#include "speechcmd/metrics.hpp"

#include <string>

#include "speechcmd/errors.hpp"

namespace speechcmd {

namespace {

struct Ratio {
  double value = 0.0;
  bool undefined = false;
};

Ratio ratio(double num, double den) {
  if (den == 0.0) return {0.0, true};
  return {num / den, false};
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < n_; ++c) t += at(c, c);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t t = 0;
  for (std::size_t p = 0; p < n_; ++p) t += at(truth, p);
  return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::uint64_t t = 0;
  for (std::size_t r = 0; r < n_; ++r) t += at(r, pred);
  return t;
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels,
                          std::size_t n_classes) {
  if (preds.size() != labels.size())
    throw InvalidInput("confusion: " + std::to_string(preds.size()) + " predictions for " +
                       std::to_string(labels.size()) + " labels");
  ConfusionMatrix cm(n_classes);
  const auto n = static_cast<int>(n_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= n || labels[i] < 0 || labels[i] >= n)
      throw InvalidInput("confusion: class index out of range at sample " + std::to_string(i));
    ++cm.at(static_cast<std::size_t>(labels[i]), static_cast<std::size_t>(preds[i]));
  }
  return cm;
}

MetricReport metrics(const ConfusionMatrix& cm) {
  MetricReport r;
  r.total = cm.total();
  if (r.total == 0) throw InvalidInput("metrics: confusion matrix is empty");
  const auto total = static_cast<double>(r.total);
  const std::size_t n = cm.n_classes();

  std::uint64_t sum_tp = 0, sum_fp = 0, sum_fn = 0, sum_tn = 0;
  for (std::size_t c = 0; c < n; ++c) {
    ClassMetrics m;
    m.tp = cm.at(c, c);
    m.fp = cm.col_sum(c) - m.tp;
    m.fn = cm.row_sum(c) - m.tp;
    m.tn = r.total - m.tp - m.fp - m.fn;
    const auto tp = static_cast<double>(m.tp), fp = static_cast<double>(m.fp),
               fn = static_cast<double>(m.fn), tn = static_cast<double>(m.tn);

    m.accuracy = (tp + tn) / total;
    const Ratio precision = ratio(tp, tp + fp);
    const Ratio recall = ratio(tp, tp + fn);
    const Ratio specificity = ratio(tn, tn + fp);
    m.precision = precision.value;
    m.precision_undefined = precision.undefined;
    m.recall = recall.value;
    m.recall_undefined = recall.undefined;
    m.specificity = specificity.value;
    m.specificity_undefined = specificity.undefined;
    const Ratio f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    m.f1 = f1.value;
    m.f1_undefined = f1.undefined;

    r.macro.accuracy += m.accuracy;
    r.macro.precision += m.precision;
    r.macro.recall += m.recall;
    r.macro.f1 += m.f1;
    r.macro.specificity += m.specificity;
    sum_tp += m.tp;
    sum_fp += m.fp;
    sum_fn += m.fn;
    sum_tn += m.tn;
    r.per_class.push_back(m);
  }
  const auto k = static_cast<double>(n);
  r.macro.accuracy /= k;
  r.macro.precision /= k;
  r.macro.recall /= k;
  r.macro.f1 /= k;
  r.macro.specificity /= k;

  const auto tp = static_cast<double>(sum_tp), fp = static_cast<double>(sum_fp),
             fn = static_cast<double>(sum_fn), tn = static_cast<double>(sum_tn);
  r.micro.accuracy = (tp + tn) / (tp + tn + fp + fn);
  r.micro.precision = ratio(tp, tp + fp).value;
  r.micro.recall = ratio(tp, tp + fn).value;
  r.micro.f1 = ratio(2.0 * r.micro.precision * r.micro.recall, r.micro.precision + r.micro.recall).value;
  r.micro.specificity = ratio(tn, tn + fp).value;

  r.overall_accuracy = static_cast<double>(cm.trace()) / total;
  return r;
}

std::vector<std::optional<double>> per_class_accuracy(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> out(cm.n_classes());
  for (std::size_t c = 0; c < cm.n_classes(); ++c) {
    const std::uint64_t row = cm.row_sum(c);
    if (row > 0) out[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(row);
  }
  return out;
}

}  // namespace speechcmd
