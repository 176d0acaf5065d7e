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

#include <filesystem>
#include <string>
#include <vector>

#include "speechcmd/head.hpp"
#include "speechcmd/metrics.hpp"

namespace speechcmd {

// Shortest decimal form that round-trips to the same double.
std::string format_number(double value);

// epoch,train_loss,train_acc,val_loss,val_acc,seconds
std::string history_to_csv(const TrainHistory& history);
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
TrainHistory read_history_csv(const std::filesystem::path& path);

// 13 x 13 grid; first row and column hold class names.
std::string confusion_to_csv(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_csv(const std::string& text);
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);

// metric,name,value rows: per-class metrics, per-class accuracy, macro and
// micro averages, overall accuracy. Undefined per-class values appear as 0.
std::string metrics_to_csv(const MetricReport& report, const ConfusionMatrix& cm);

// Accuracy and loss against epoch, train and validation series.
std::string render_curves_svg(const TrainHistory& history);
// Row-normalized percentages, one cell per (true, predicted) pair.
std::string render_confusion_svg(const ConfusionMatrix& cm);

struct ReportFiles {
  std::filesystem::path metrics_csv;
  std::filesystem::path confusion_csv;
  std::filesystem::path confusion_svg;
  std::filesystem::path curves_svg;  // empty when no history was given
};

// Writes metrics.csv, confusion.csv, confusion.svg and, for a non-empty
// history, curves.svg into out_dir (created if missing).
ReportFiles render_report(const MetricReport& report, const ConfusionMatrix& cm,
                          const TrainHistory& history, const std::filesystem::path& out_dir);

}  // namespace speechcmd
