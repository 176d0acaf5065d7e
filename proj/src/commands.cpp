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

#include "speechcmd/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "speechcmd/audio.hpp"
#include "speechcmd/errors.hpp"
#include "speechcmd/log.hpp"
#include "speechcmd/metrics.hpp"
#include "speechcmd/report.hpp"
#include "speechcmd/storage.hpp"

namespace speechcmd {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot write " + path.string());
  out << text;
  if (!out) throw IOError("write failed for " + path.string());
}

std::vector<std::size_t> parse_hidden(const std::string& spec) {
  std::vector<std::size_t> dims;
  if (spec.empty() || spec == "none") return dims;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      dims.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidInput("--hidden expects comma-separated positive widths or \"none\", got \"" + spec + "\"");
    }
  }
  return dims;
}

std::string hidden_to_string(const std::vector<std::size_t>& dims) {
  if (dims.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? "," : "") + std::to_string(dims[i]);
  return out;
}

template <typename T>
void take(const ojson& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

void reject_unknown(const ojson& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* known) { return k == known; }))
      throw InvalidInput("config: unknown key \"" + where + k + "\"");
  }
}

void log_banner(const char* command, const RunConfig& cfg) {
  const ojson j = to_json(cfg);
  log::info("run.config", std::string(command) + " config: " + j.dump(), {{"command", command}, {"config", j}});
}

}  // namespace

void RunConfig::propagate_seed() {
  dataset.seed = seed;
  train.seed = seed;
}

ojson to_json(const RunConfig& cfg) {
  ojson j;
  j["seed"] = cfg.seed;
  j["dataset"] = {{"train_fraction", cfg.dataset.train_fraction},
                  {"cap_unknown", cfg.dataset.cap_unknown},
                  {"balance_background", cfg.dataset.balance_background},
                  {"augment", cfg.dataset.augment},
                  {"snr_min_db", cfg.dataset.snr_min_db},
                  {"snr_max_db", cfg.dataset.snr_max_db}};
  j["frontend"] = {{"sample_rate", cfg.frontend.frame.sample_rate},
                   {"segment_duration_s", cfg.frontend.segment_duration_s},
                   {"frame_duration_s", cfg.frontend.frame.frame_duration_s},
                   {"hop_duration_s", cfg.frontend.frame.hop_duration_s},
                   {"n_bands", cfg.frontend.n_bands},
                   {"f_min_hz", cfg.frontend.f_min_hz},
                   {"f_max_hz", cfg.frontend.f_max_hz},
                   {"log_floor", cfg.frontend.log_floor}};
  j["model"] = {{"hidden_dims", cfg.hidden_dims}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"beta1", cfg.train.beta1},
                {"beta2", cfg.train.beta2},
                {"epsilon", cfg.train.epsilon},
                {"shuffle_each_epoch", cfg.train.shuffle_each_epoch}};
  j["threads"] = cfg.threads;
  return j;
}

void merge_json(RunConfig& cfg, const ojson& j) {
  try {
    reject_unknown(j, {"seed", "dataset", "frontend", "model", "train", "threads"}, "");
    take(j, "seed", cfg.seed);
    take(j, "threads", cfg.threads);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      reject_unknown(d, {"train_fraction", "cap_unknown", "balance_background", "augment", "snr_min_db", "snr_max_db"},
                     "dataset.");
      take(d, "train_fraction", cfg.dataset.train_fraction);
      take(d, "cap_unknown", cfg.dataset.cap_unknown);
      take(d, "balance_background", cfg.dataset.balance_background);
      take(d, "augment", cfg.dataset.augment);
      take(d, "snr_min_db", cfg.dataset.snr_min_db);
      take(d, "snr_max_db", cfg.dataset.snr_max_db);
    }
    if (j.contains("frontend")) {
      const auto& f = j.at("frontend");
      reject_unknown(f, {"sample_rate", "segment_duration_s", "frame_duration_s", "hop_duration_s", "n_bands",
                         "f_min_hz", "f_max_hz", "log_floor"},
                     "frontend.");
      take(f, "sample_rate", cfg.frontend.frame.sample_rate);
      take(f, "segment_duration_s", cfg.frontend.segment_duration_s);
      take(f, "frame_duration_s", cfg.frontend.frame.frame_duration_s);
      take(f, "hop_duration_s", cfg.frontend.frame.hop_duration_s);
      take(f, "n_bands", cfg.frontend.n_bands);
      take(f, "f_min_hz", cfg.frontend.f_min_hz);
      take(f, "f_max_hz", cfg.frontend.f_max_hz);
      take(f, "log_floor", cfg.frontend.log_floor);
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      reject_unknown(m, {"hidden_dims"}, "model.");
      take(m, "hidden_dims", cfg.hidden_dims);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      reject_unknown(t, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "shuffle_each_epoch"},
                     "train.");
      take(t, "epochs", cfg.train.epochs);
      take(t, "batch_size", cfg.train.batch_size);
      take(t, "learning_rate", cfg.train.learning_rate);
      take(t, "beta1", cfg.train.beta1);
      take(t, "beta2", cfg.train.beta2);
      take(t, "epsilon", cfg.train.epsilon);
      take(t, "shuffle_each_epoch", cfg.train.shuffle_each_epoch);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  cfg.propagate_seed();
}

RunConfig load_config_file(const fs::path& path) {
  RunConfig cfg;
  ojson j;
  try {
    j = ojson::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what(), e.byte);
  }
  merge_json(cfg, j);
  return cfg;
}

fs::path exclusion_sidecar(const fs::path& features_path) {
  fs::path p = features_path;
  p += ".excluded.json";
  return p;
}

fs::path epoch_checkpoint_path(const fs::path& ckpt, std::size_t epoch) {
  char tag[32];
  std::snprintf(tag, sizeof tag, ".epoch%02zu", epoch);
  fs::path out = ckpt.parent_path() / (ckpt.stem().string() + tag + ckpt.extension().string());
  return out;
}

AlignedFeatures load_features(const DatasetManifest& manifest, const fs::path& features_path, bool embeddings) {
  std::set<std::size_t> excluded;
  const fs::path sidecar = exclusion_sidecar(features_path);
  if (fs::exists(sidecar)) {
    try {
      const ojson j = ojson::parse(read_text(sidecar));
      for (const auto& e : j.at("excluded")) excluded.insert(e.at("index").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("exclusion sidecar: ") + e.what(), 0);
    }
  }

  std::size_t n_rows = 0, dim = 0;
  std::vector<float> values;
  if (embeddings) {
    EmbeddingMatrix m = read_embeddings(features_path);
    n_rows = m.n_rows;
    dim = m.dim;
    values = std::move(m.values);
  } else {
    PatchFile f = read_patches(features_path);
    n_rows = f.n_patches;
    dim = f.patch_size();
    values = std::move(f.values);
  }

  AlignedFeatures out;
  // Embedding files keep a (zero) row for excluded clips; FPZ1 files omit them.
  const std::size_t expected = embeddings ? manifest.records.size() : manifest.records.size() - excluded.size();
  if (n_rows != expected)
    throw InvalidInput(features_path.string() + " has " + std::to_string(n_rows) + " rows but the manifest needs " +
                       std::to_string(expected));
  out.rows.resize(static_cast<Eigen::Index>(manifest.records.size() - excluded.size()),
                  static_cast<Eigen::Index>(dim));
  std::size_t src = 0, dst = 0;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const bool skip = excluded.count(i) > 0;
    if (skip && !embeddings) continue;
    if (!skip) {
      std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(src * dim), dim,
                  out.rows.row(static_cast<Eigen::Index>(dst)).data());
      out.record_of.push_back(i);
      ++dst;
    }
    ++src;
  }
  return out;
}

LabeledSet select_split(const DatasetManifest& manifest, const AlignedFeatures& aligned, Split split) {
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < aligned.record_of.size(); ++r)
    if (manifest.records[aligned.record_of[r]].split == split) rows.push_back(static_cast<Eigen::Index>(r));
  LabeledSet set;
  set.features.resize(static_cast<Eigen::Index>(rows.size()), aligned.rows.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    set.features.row(static_cast<Eigen::Index>(i)) = aligned.rows.row(rows[i]);
    set.labels.push_back(manifest.records[aligned.record_of[static_cast<std::size_t>(rows[i])]].label);
  }
  return set;
}

DatasetManifest cmd_prepare(const PrepareOptions& opts, const RunConfig& cfg) {
  log_banner("prepare", cfg);
  PrepareConfig pc = cfg.dataset;
  pc.seed = cfg.seed;
  DatasetManifest m = prepare_dataset(opts.root, pc);
  write_manifest(m, opts.out_manifest);
  ojson counts = ojson::object();
  for (int c = 0; c < kNumClasses; ++c) counts[std::string(class_name(c))] = m.class_counts[static_cast<std::size_t>(c)];
  log::info("prepare.done",
            "wrote " + std::to_string(m.records.size()) + " records (" + std::to_string(m.count(Split::kTrain)) +
                " train, " + std::to_string(m.count(Split::kVal)) + " val) to " + opts.out_manifest.string(),
            {{"records", m.records.size()}, {"class_counts", counts}, {"skipped", m.skipped.size()}});
  return m;
}

void cmd_featurize(const FeaturizeOptions& opts, const RunConfig& cfg) {
  log_banner("featurize", cfg);
  cfg.frontend.validate();
  const DatasetManifest m = read_manifest(opts.manifest);
  const fs::path root = m.root;
  const std::size_t n = m.records.size();

  std::vector<FeaturePatch> patches(n);
  std::vector<std::string> failure(n);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      try {
        const AudioClip clip = load_record_audio(root, m.records[i]);
        patches[i] = mean_patch(featurize(clip, m.records[i].path, cfg.frontend));
      } catch (const std::exception& e) {
        failure[i] = e.what();
        if (failure[i].empty()) failure[i] = "unknown error";
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, n));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  std::vector<FeaturePatch> kept;
  ojson excluded = ojson::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (!failure[i].empty()) {
      log::warn("featurize.skip", "skipping " + m.records[i].path + ": " + failure[i],
                {{"index", i}, {"path", m.records[i].path}});
      excluded.push_back({{"index", i}, {"path", m.records[i].path}, {"reason", failure[i]}});
      continue;
    }
    kept.push_back(std::move(patches[i]));
  }
  PatchFile file;
  file.n_patches = static_cast<std::uint32_t>(kept.size());
  file.n_frames = static_cast<std::uint32_t>(cfg.frontend.n_frames());
  file.n_bands = static_cast<std::uint32_t>(cfg.frontend.n_bands);
  file.values.reserve(file.patch_size() * kept.size());
  for (const auto& p : kept) file.values.insert(file.values.end(), p.values.data().begin(), p.values.data().end());
  write_patches(file, opts.out_fpz);
  write_text(exclusion_sidecar(opts.out_fpz), ojson{{"excluded", excluded}}.dump(1) + "\n");
  log::info("featurize.done",
            "wrote " + std::to_string(kept.size()) + " patches of " + std::to_string(file.n_frames) + "x" +
                std::to_string(file.n_bands) + " to " + opts.out_fpz.string(),
            {{"patches", kept.size()}, {"excluded", excluded.size()}});
}

TrainHistory cmd_train(const TrainOptions& opts, const RunConfig& cfg) {
  log_banner("train", cfg);
  log::info("train.banner",
            "epochs=" + std::to_string(cfg.train.epochs) + " batch_size=" + std::to_string(cfg.train.batch_size) +
                " learning_rate=" + format_number(cfg.train.learning_rate) +
                " hidden=" + hidden_to_string(cfg.hidden_dims));
  const DatasetManifest m = read_manifest(opts.manifest);
  const AlignedFeatures aligned = load_features(m, opts.features, opts.embeddings);
  const LabeledSet train_set = select_split(m, aligned, Split::kTrain);
  const LabeledSet val_set = select_split(m, aligned, Split::kVal);

  HeadConfig head;
  head.input_dim = static_cast<std::size_t>(aligned.rows.cols());
  head.hidden_dims = cfg.hidden_dims;
  head.seed = cfg.seed;
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;

  EpochCallback on_epoch;
  if (opts.checkpoint_every_epoch)
    on_epoch = [&](const EpochRecord& rec, const HeadParams& params) {
      save_checkpoint(params, epoch_checkpoint_path(opts.out_checkpoint, rec.epoch));
    };
  auto [params, history] = train(train_set, val_set, head, tc, on_epoch);
  save_checkpoint(params, opts.out_checkpoint);
  if (!opts.out_history.empty()) write_history_csv(history, opts.out_history);
  log::info("train.done",
            "optimizer steps: " + std::to_string(history.total_steps) + " (" +
                std::to_string(train_set.size()) + " training rows, " + std::to_string(val_set.size()) +
                " validation rows)",
            {{"steps", history.total_steps}, {"train_rows", train_set.size()}, {"val_rows", val_set.size()}});
  return history;
}

MetricReport cmd_eval(const EvalOptions& opts, const RunConfig& cfg) {
  log_banner("eval", cfg);
  const HeadParams params = load_checkpoint(opts.checkpoint);
  const DatasetManifest m = read_manifest(opts.manifest);
  const AlignedFeatures aligned = load_features(m, opts.features, opts.embeddings);
  if (static_cast<std::size_t>(aligned.rows.cols()) != params.input_dim())
    throw InvalidInput("checkpoint expects " + std::to_string(params.input_dim()) + " features, " +
                       opts.features.string() + " provides " + std::to_string(aligned.rows.cols()));
  if (params.n_classes() != static_cast<std::size_t>(kNumClasses))
    throw InvalidInput("checkpoint has " + std::to_string(params.n_classes()) + " outputs, expected 12");
  const LabeledSet val_set = select_split(m, aligned, Split::kVal);
  if (val_set.size() == 0) throw InvalidInput("manifest has no validation records");

  const Evaluation ev = evaluate(params, val_set);
  const ConfusionMatrix cm = confusion(ev.predictions, val_set.labels);
  const MetricReport report = metrics(cm);
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& pc = report.per_class[c];
    if (pc.precision_undefined || pc.recall_undefined || pc.f1_undefined || pc.specificity_undefined)
      log::warn("eval.undefined", "class " + std::string(class_name(static_cast<int>(c))) +
                                      " has an undefined metric (reported as 0)",
                {{"class", class_name(static_cast<int>(c))}});
  }
  TrainHistory history;
  if (!opts.history.empty()) history = read_history_csv(opts.history);
  render_report(report, cm, history, opts.out_dir);

  std::cout << "validation samples: " << report.total << '\n'
            << "overall accuracy: " << format_number(report.overall_accuracy) << '\n'
            << "macro precision: " << format_number(report.macro.precision) << '\n'
            << "macro recall: " << format_number(report.macro.recall) << '\n'
            << "macro f1: " << format_number(report.macro.f1) << '\n'
            << "macro specificity: " << format_number(report.macro.specificity) << '\n';
  return report;
}

Prediction cmd_predict(const PredictOptions& opts, const RunConfig& cfg) {
  const HeadParams params = load_checkpoint(opts.checkpoint);
  std::vector<float> features;
  if (!opts.embeddings.empty()) {
    const EmbeddingMatrix e = read_embeddings(opts.embeddings);
    if (opts.row >= e.n_rows)
      throw InvalidInput("row " + std::to_string(opts.row) + " out of range for " + opts.embeddings.string());
    features.assign(e.values.begin() + static_cast<std::ptrdiff_t>(opts.row * e.dim),
                    e.values.begin() + static_cast<std::ptrdiff_t>((opts.row + 1) * e.dim));
  } else {
    if (params.input_dim() != cfg.frontend.patch_size())
      throw InvalidInput("checkpoint expects " + std::to_string(params.input_dim()) +
                         "-dimensional embeddings; pass --embeddings with the exporter output");
    const AudioClip clip = read_wav(opts.audio);
    const FeaturePatch patch = mean_patch(featurize(clip, opts.audio.string(), cfg.frontend));
    features = patch.values.data();
  }
  if (features.size() != params.input_dim())
    throw InvalidInput("feature width " + std::to_string(features.size()) + " does not match checkpoint input " +
                       std::to_string(params.input_dim()));
  const Prediction p = predict(params, features);

  char line[96];
  std::snprintf(line, sizeof line, "prediction: %s %.6f\n", std::string(class_name(p.label)).c_str(),
                p.probabilities[static_cast<std::size_t>(p.label)]);
  std::cout << line;
  for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
    std::snprintf(line, sizeof line, "%s %.6f\n", std::string(class_name(static_cast<int>(c))).c_str(),
                  p.probabilities[c]);
    std::cout << line;
  }
  return p;
}

MetricReport cmd_report(const ReportOptions& opts) {
  const ConfusionMatrix cm = read_confusion_csv(opts.confusion_csv);
  const MetricReport report = metrics(cm);
  TrainHistory history;
  if (!opts.history_csv.empty()) history = read_history_csv(opts.history_csv);
  render_report(report, cm, history, opts.out_dir);
  std::cout << "overall accuracy: " << format_number(report.overall_accuracy) << '\n'
            << "macro f1: " << format_number(report.macro.f1) << '\n';
  return report;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Speech-command recognition toolkit: log-mel front-end, dataset preparation, "
               "classifier head training and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "speechcmd 1.0.0");

  RunConfig cfg;
  std::string config_path;
  bool json_logs = false;
  std::string hidden = hidden_to_string(cfg.hidden_dims);

  // Options overlay the config file only when given explicitly.
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>> overlays;
  auto track = [&](CLI::Option* opt, std::function<void(RunConfig&, const RunConfig&)> copy) {
    overlays.emplace_back(opt, std::move(copy));
    return opt;
  };

  app.add_option("--config", config_path, "JSON config file (defaults < config < flags)");
  app.add_flag("--json", json_logs, "Emit log events as JSON lines on stderr");
  track(app.add_option("--seed", cfg.seed, "Seed for every random choice"),
        [](RunConfig& d, const RunConfig& s) { d.seed = s.seed; });

  auto add_frontend = [&](CLI::App* sub) {
    track(sub->add_option("--sample-rate", cfg.frontend.frame.sample_rate, "Front-end sample rate (Hz)"),
          [](RunConfig& d, const RunConfig& s) { d.frontend.frame.sample_rate = s.frontend.frame.sample_rate; });
    track(sub->add_option("--segment-duration", cfg.frontend.segment_duration_s, "Segment length (s)"),
          [](RunConfig& d, const RunConfig& s) { d.frontend.segment_duration_s = s.frontend.segment_duration_s; });
    track(sub->add_option("--frame-duration", cfg.frontend.frame.frame_duration_s, "Frame length (s)"),
          [](RunConfig& d, const RunConfig& s) { d.frontend.frame.frame_duration_s = s.frontend.frame.frame_duration_s; });
    track(sub->add_option("--hop-duration", cfg.frontend.frame.hop_duration_s, "Hop length (s)"),
          [](RunConfig& d, const RunConfig& s) { d.frontend.frame.hop_duration_s = s.frontend.frame.hop_duration_s; });
    track(sub->add_option("--bands", cfg.frontend.n_bands, "Number of mel bands"),
          [](RunConfig& d, const RunConfig& s) { d.frontend.n_bands = s.frontend.n_bands; });
    track(sub->add_option("--f-min", cfg.frontend.f_min_hz, "Lowest filterbank edge (Hz)"),
          [](RunConfig& d, const RunConfig& s) { d.frontend.f_min_hz = s.frontend.f_min_hz; });
    track(sub->add_option("--f-max", cfg.frontend.f_max_hz, "Highest filterbank edge (Hz, <=0 for Nyquist)"),
          [](RunConfig& d, const RunConfig& s) { d.frontend.f_max_hz = s.frontend.f_max_hz; });
  };
  auto add_train = [&](CLI::App* sub) {
    track(sub->add_option("--epochs", cfg.train.epochs, "Training epochs"),
          [](RunConfig& d, const RunConfig& s) { d.train.epochs = s.train.epochs; });
    track(sub->add_option("--batch-size", cfg.train.batch_size, "Mini-batch size"),
          [](RunConfig& d, const RunConfig& s) { d.train.batch_size = s.train.batch_size; });
    track(sub->add_option("--lr", cfg.train.learning_rate, "Adam learning rate"),
          [](RunConfig& d, const RunConfig& s) { d.train.learning_rate = s.train.learning_rate; });
    track(sub->add_option("--beta1", cfg.train.beta1, "Adam beta1"),
          [](RunConfig& d, const RunConfig& s) { d.train.beta1 = s.train.beta1; });
    track(sub->add_option("--beta2", cfg.train.beta2, "Adam beta2"),
          [](RunConfig& d, const RunConfig& s) { d.train.beta2 = s.train.beta2; });
    track(sub->add_option("--epsilon", cfg.train.epsilon, "Adam epsilon"),
          [](RunConfig& d, const RunConfig& s) { d.train.epsilon = s.train.epsilon; });
    track(sub->add_flag("--shuffle,!--no-shuffle", cfg.train.shuffle_each_epoch, "Reshuffle every epoch"),
          [](RunConfig& d, const RunConfig& s) { d.train.shuffle_each_epoch = s.train.shuffle_each_epoch; });
    track(sub->add_option("--hidden", hidden, "Hidden layer widths, e.g. 512 or 512,256 or none"),
          [](RunConfig& d, const RunConfig& s) { d.hidden_dims = s.hidden_dims; });
  };

  PrepareOptions prep;
  auto* prepare = app.add_subcommand("prepare", "Scan a Speech Commands tree and write a manifest");
  prepare->add_option("--root", prep.root, "Dataset root directory")->required();
  prepare->add_option("--out", prep.out_manifest, "Output manifest (JSON lines)")->required();
  track(prepare->add_option("--train-fraction", cfg.dataset.train_fraction, "Training share of each class"),
        [](RunConfig& d, const RunConfig& s) { d.dataset.train_fraction = s.dataset.train_fraction; });
  track(prepare->add_flag("--augment,!--no-augment", cfg.dataset.augment, "Add noise-mixed training copies"),
        [](RunConfig& d, const RunConfig& s) { d.dataset.augment = s.dataset.augment; });
  track(prepare->add_flag("--cap-unknown,!--no-cap-unknown", cfg.dataset.cap_unknown,
                          "Subsample unknown words to the largest command class"),
        [](RunConfig& d, const RunConfig& s) { d.dataset.cap_unknown = s.dataset.cap_unknown; });
  track(prepare->add_flag("--balance-background,!--no-balance-background", cfg.dataset.balance_background,
                          "Match the background count to the smallest command class"),
        [](RunConfig& d, const RunConfig& s) { d.dataset.balance_background = s.dataset.balance_background; });
  track(prepare->add_option("--snr-min", cfg.dataset.snr_min_db, "Lowest augmentation SNR (dB)"),
        [](RunConfig& d, const RunConfig& s) { d.dataset.snr_min_db = s.dataset.snr_min_db; });
  track(prepare->add_option("--snr-max", cfg.dataset.snr_max_db, "Highest augmentation SNR (dB)"),
        [](RunConfig& d, const RunConfig& s) { d.dataset.snr_max_db = s.dataset.snr_max_db; });

  FeaturizeOptions feat;
  auto* featurize_cmd = app.add_subcommand("featurize", "Compute one log-mel patch per manifest record (FPZ1)");
  featurize_cmd->add_option("--manifest", feat.manifest, "Manifest from prepare")->required();
  featurize_cmd->add_option("--out", feat.out_fpz, "Output FPZ1 file")->required();
  track(featurize_cmd->add_option("--threads", cfg.threads, "Worker threads (output is order-independent)"),
        [](RunConfig& d, const RunConfig& s) { d.threads = s.threads; });
  add_frontend(featurize_cmd);

  TrainOptions tr;
  std::string train_features, train_embeddings;
  auto* train_cmd = app.add_subcommand("train", "Train the classifier head with Adam");
  auto* tf = train_cmd->add_option("--features", train_features, "FPZ1 features from featurize");
  auto* te = train_cmd->add_option("--embeddings", train_embeddings, "EMB1 backbone embeddings");
  tf->excludes(te);
  train_cmd->add_option("--manifest", tr.manifest, "Manifest from prepare")->required();
  train_cmd->add_option("--out", tr.out_checkpoint, "Output HDP1 checkpoint")->required();
  train_cmd->add_option("--history", tr.out_history, "Per-epoch history CSV");
  train_cmd->add_flag("--checkpoint-every-epoch", tr.checkpoint_every_epoch,
                      "Also save <out>.epochNN checkpoints after every epoch");
  add_train(train_cmd);

  EvalOptions ev;
  std::string eval_features, eval_embeddings;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the validation split");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "HDP1 checkpoint")->required();
  auto* ef = eval_cmd->add_option("--features", eval_features, "FPZ1 features");
  auto* ee = eval_cmd->add_option("--embeddings", eval_embeddings, "EMB1 embeddings");
  ef->excludes(ee);
  eval_cmd->add_option("--manifest", ev.manifest, "Manifest from prepare")->required();
  eval_cmd->add_option("--out", ev.out_dir, "Report directory")->required();
  eval_cmd->add_option("--history", ev.history, "History CSV for the training curves plot");

  PredictOptions pr;
  auto* predict_cmd = app.add_subcommand("predict", "Classify one audio clip");
  predict_cmd->add_option("--checkpoint", pr.checkpoint, "HDP1 checkpoint")->required();
  auto* pa = predict_cmd->add_option("--audio", pr.audio, "WAV file");
  auto* pe = predict_cmd->add_option("--embeddings", pr.embeddings, "EMB1 file holding the clip embedding");
  predict_cmd->add_option("--row", pr.row, "Row of --embeddings to classify");
  pa->excludes(pe);
  add_frontend(predict_cmd);

  ReportOptions rep;
  auto* report_cmd = app.add_subcommand("report", "Recompute metrics and plots from a confusion CSV");
  report_cmd->add_option("--confusion", rep.confusion_csv, "confusion.csv from eval")->required();
  report_cmd->add_option("--history", rep.history_csv, "History CSV from train");
  report_cmd->add_option("--out", rep.out_dir, "Report directory")->required();

  for (auto* sub : {prepare, featurize_cmd, train_cmd, eval_cmd, predict_cmd, report_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  log::set_format(json_logs ? log::Format::kJson : log::Format::kText);

  try {
    cfg.hidden_dims = parse_hidden(hidden);
    if (!config_path.empty()) {
      const RunConfig base = load_config_file(config_path);
      const RunConfig flags = cfg;
      cfg = base;
      for (const auto& [opt, copy] : overlays)
        if (opt->count() > 0) copy(cfg, flags);
    }
    cfg.propagate_seed();

    if (*prepare) {
      cmd_prepare(prep, cfg);
    } else if (*featurize_cmd) {
      cmd_featurize(feat, cfg);
    } else if (*train_cmd) {
      if (train_features.empty() == train_embeddings.empty())
        throw InvalidInput("train needs exactly one of --features or --embeddings");
      tr.embeddings = !train_embeddings.empty();
      tr.features = tr.embeddings ? train_embeddings : train_features;
      cmd_train(tr, cfg);
    } else if (*eval_cmd) {
      if (eval_features.empty() == eval_embeddings.empty())
        throw InvalidInput("eval needs exactly one of --features or --embeddings");
      ev.embeddings = !eval_embeddings.empty();
      ev.features = ev.embeddings ? eval_embeddings : eval_features;
      cmd_eval(ev, cfg);
    } else if (*predict_cmd) {
      if (pr.audio.empty() && pr.embeddings.empty())
        throw InvalidInput("predict needs --audio or --embeddings");
      cmd_predict(pr, cfg);
    } else if (*report_cmd) {
      cmd_report(rep);
    }
  } catch (const IOError& e) {
    log::error("io_error", e.what());
    return kExitIo;
  } catch (const InvalidInput& e) {
    log::error("invalid_input", e.what());
    return kExitValidation;
  } catch (const FormatError& e) {
    log::error("format_error", e.what());
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    log::error("io_error", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    log::error("failure", e.what());
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace speechcmd
