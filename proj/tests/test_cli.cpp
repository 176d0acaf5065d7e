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
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "speechcmd/dataset.hpp"
#include "speechcmd/head.hpp"
#include "speechcmd/metrics.hpp"
#include "speechcmd/report.hpp"
#include "speechcmd/storage.hpp"

using namespace speechcmd;
namespace fs = std::filesystem;

namespace {

testing::CommandResult cli(const std::vector<std::string>& args, bool with_stderr = false) {
  std::string line = testing::shell_quote(SPEECHCMD_CLI_PATH);
  for (const auto& a : args) line += " " + testing::shell_quote(a);
  return testing::run_command(line, with_stderr);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Shared small pipeline: a prepared manifest and its features.
struct Pipeline {
  testing::TempDir dir{"speechcmd-cli"};
  fs::path data = dir / "data";
  fs::path manifest = dir / "m.jsonl";
  fs::path fpz = dir / "f.fpz";

  Pipeline() {
    testing::write_mini_dataset(data);
    REQUIRE(cli({"--seed", "3", "prepare", "--root", data.string(), "--out", manifest.string()}).exit_code == 0);
    REQUIRE(cli({"featurize", "--manifest", manifest.string(), "--out", fpz.string()}).exit_code == 0);
  }
};

}  // namespace

TEST_CASE("exit codes") {
  testing::TempDir dir;
  CHECK(cli({"prepare", "--root", (dir / "missing").string(), "--out", (dir / "m.jsonl").string()}).exit_code == 3);
  CHECK(cli({"prepare", "--root", dir.path().string()}).exit_code == 2);
  CHECK(cli({"bogus"}).exit_code == 2);
  CHECK(cli({"train", "--manifest", "x", "--out", "y", "--epochs", "many"}).exit_code == 2);
  CHECK(cli({"--help"}).exit_code == 0);

  std::ofstream(dir / "bad.json") << "{\"train\": {\"epochz\": 3}}";
  CHECK(cli({"--config", (dir / "bad.json").string(), "prepare", "--root", dir.path().string(), "--out",
             (dir / "m.jsonl").string()})
            .exit_code == 2);
}

TEST_CASE("pipeline through the binary") {
  Pipeline p;

  SUBCASE("prepare is byte-reproducible") {
    const fs::path again = p.dir / "m2.jsonl";
    REQUIRE(cli({"--seed", "3", "prepare", "--root", p.data.string(), "--out", again.string()}).exit_code == 0);
    CHECK(testing::read_file_text(p.manifest) == testing::read_file_text(again));
    const fs::path other = p.dir / "m3.jsonl";
    REQUIRE(cli({"--seed", "4", "prepare", "--root", p.data.string(), "--out", other.string()}).exit_code == 0);
    CHECK(testing::read_file_text(p.manifest) != testing::read_file_text(other));
  }

  SUBCASE("featurize writes one 98x50 patch per record") {
    const DatasetManifest m = read_manifest(p.manifest);
    const PatchFile f = read_patches(p.fpz);
    CHECK(f.n_frames == 98);
    CHECK(f.n_bands == 50);
    CHECK(f.n_patches == m.records.size());
    CHECK(fs::exists(p.fpz.string() + ".excluded.json"));
    const fs::path threaded = p.dir / "t.fpz";
    REQUIRE(cli({"featurize", "--manifest", p.manifest.string(), "--out", threaded.string(), "--threads", "3"})
                .exit_code == 0);
    CHECK(testing::read_file_text(threaded) == testing::read_file_text(p.fpz));
  }

  SUBCASE("one epoch takes ceil(N / batch) steps") {
    const DatasetManifest m = read_manifest(p.manifest);
    const std::size_t n_train = m.count(Split::kTrain);
    const auto r = cli({"train", "--features", p.fpz.string(), "--manifest", p.manifest.string(), "--out",
                        (p.dir / "h.hdp").string(), "--epochs", "1", "--hidden", "32"},
                       true);
    REQUIRE(r.exit_code == 0);
    const std::string expect = "optimizer steps: " + std::to_string((n_train + 127) / 128);
    CHECK(r.out.find(expect) != std::string::npos);
    CHECK(r.out.find("batch_size=128") != std::string::npos);
  }

  SUBCASE("flags override the config file, which overrides defaults") {
    std::ofstream(p.dir / "cfg.json") << R"({"train": {"epochs": 3}, "model": {"hidden_dims": [16]}})";
    const fs::path hist = p.dir / "hist.csv";
    auto train_with = [&](std::vector<std::string> extra) {
      std::vector<std::string> args{"--config", (p.dir / "cfg.json").string(), "train", "--features", p.fpz.string(),
                                    "--manifest", p.manifest.string(), "--out", (p.dir / "c.hdp").string(),
                                    "--history", hist.string()};
      args.insert(args.end(), extra.begin(), extra.end());
      REQUIRE(cli(args).exit_code == 0);
      return read_history_csv(hist).epochs.size();
    };
    CHECK(train_with({}) == 3);
    CHECK(load_checkpoint(p.dir / "c.hdp").layers[0].weight.rows() == 16);
    CHECK(train_with({"--epochs", "2"}) == 2);
  }

  SUBCASE("train, eval and report agree") {
    const fs::path ckpt = p.dir / "h.hdp", hist = p.dir / "h.csv", out = p.dir / "eval";
    REQUIRE(cli({"train", "--features", p.fpz.string(), "--manifest", p.manifest.string(), "--out", ckpt.string(),
                 "--history", hist.string(), "--epochs", "2", "--hidden", "32", "--checkpoint-every-epoch"})
                .exit_code == 0);
    CHECK(fs::exists(p.dir / "h.epoch01.hdp"));
    CHECK(fs::exists(p.dir / "h.epoch02.hdp"));
    const auto r = cli({"eval", "--checkpoint", ckpt.string(), "--features", p.fpz.string(), "--manifest",
                        p.manifest.string(), "--out", out.string(), "--history", hist.string()});
    REQUIRE(r.exit_code == 0);
    for (const char* f : {"metrics.csv", "confusion.csv", "confusion.svg", "curves.svg"}) CHECK(fs::exists(out / f));

    const ConfusionMatrix cm = read_confusion_csv(out / "confusion.csv");
    const DatasetManifest m = read_manifest(p.manifest);
    CHECK(cm.total() == m.count(Split::kVal));
    const MetricReport rep = metrics(cm);
    CHECK(r.out.find("overall accuracy: " + format_number(rep.overall_accuracy)) != std::string::npos);
    const auto last = read_history_csv(hist).epochs.back();
    CHECK(rep.overall_accuracy == doctest::Approx(last.val_acc));

    const fs::path rep_dir = p.dir / "rep";
    REQUIRE(cli({"report", "--confusion", (out / "confusion.csv").string(), "--out", rep_dir.string()}).exit_code == 0);
    CHECK(testing::read_file_text(rep_dir / "metrics.csv") == testing::read_file_text(out / "metrics.csv"));
    CHECK_FALSE(fs::exists(rep_dir / "curves.svg"));
  }

  SUBCASE("width mismatch between checkpoint and features") {
    save_checkpoint(init_head({7, {}, 12, 0}), p.dir / "w.hdp");
    CHECK(cli({"eval", "--checkpoint", (p.dir / "w.hdp").string(), "--features", p.fpz.string(), "--manifest",
               p.manifest.string(), "--out", (p.dir / "e").string()})
              .exit_code == 2);
  }
}

TEST_CASE("predict") {
  testing::TempDir dir;
  const fs::path ckpt = dir / "zero.hdp";
  save_checkpoint(init_head({98 * 50, {8}, 12, 0}).zeros_like(), ckpt);
  write_wav(dir / "silence.wav", AudioClip{std::vector<float>(16000, 0.0f), 16000});

  const auto r = cli({"predict", "--checkpoint", ckpt.string(), "--audio", (dir / "silence.wav").string()});
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 13);
  CHECK(lines[0] == "prediction: yes 0.083333");
  double sum = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream in(lines[i]);
    std::string name;
    double prob;
    in >> name >> prob;
    CHECK(name == class_name(static_cast<int>(i - 1)));
    sum += prob;
  }
  CHECK(std::abs(sum - 1.0) < 1e-5);

  std::ofstream(dir / "text.wav") << "hello";
  CHECK(cli({"predict", "--checkpoint", ckpt.string(), "--audio", (dir / "text.wav").string()}).exit_code == 2);
  CHECK(cli({"predict", "--checkpoint", ckpt.string(), "--audio", (dir / "none.wav").string()}).exit_code == 3);

  // Embedding input path.
  save_checkpoint(init_head({3, {}, 12, 0}).zeros_like(), dir / "e.hdp");
  write_embeddings(EmbeddingMatrix{2, 3, {0, 0, 0, 1, 1, 1}}, dir / "e.emb1");
  CHECK(cli({"predict", "--checkpoint", (dir / "e.hdp").string(), "--embeddings", (dir / "e.emb1").string(), "--row",
             "1"})
            .exit_code == 0);
  CHECK(cli({"predict", "--checkpoint", (dir / "e.hdp").string(), "--embeddings", (dir / "e.emb1").string(), "--row",
             "2"})
            .exit_code == 2);
  CHECK(cli({"predict", "--checkpoint", (dir / "e.hdp").string(), "--audio", (dir / "silence.wav").string()})
            .exit_code == 2);
}
