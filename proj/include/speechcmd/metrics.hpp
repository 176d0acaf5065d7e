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
#include <optional>
#include <span>
#include <vector>

#include "speechcmd/labels.hpp"

namespace speechcmd {

/// counts(t, p): samples of true class t predicted as p.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = kNumClasses)
      : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t n_classes() const { return n_; }
  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_.at(truth * n_ + pred); }
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_.at(truth * n_ + pred); }

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t pred) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels,
                          std::size_t n_classes = kNumClasses);

/// One-vs-rest view of one class. A ratio whose denominator is zero is
/// reported as 0 and its `*_undefined` flag is set.
struct ClassMetrics {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  bool specificity_undefined = false;
};

struct AveragedMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
};

struct MetricReport {
  std::vector<ClassMetrics> per_class;
  AveragedMetrics macro;  // unweighted mean over all classes
  AveragedMetrics micro;  // from pooled TP/FP/FN/TN
  double overall_accuracy = 0.0;  // trace / total
  std::uint64_t total = 0;
};

// Throws InvalidInput when the matrix is empty.
MetricReport metrics(const ConfusionMatrix& cm);

// cm(c, c) / row_sum(c); nullopt for classes with no samples.
std::vector<std::optional<double>> per_class_accuracy(const ConfusionMatrix& cm);

}  // namespace speechcmd
