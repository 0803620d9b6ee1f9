// Copyright 2026 The provrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "cli_runner.hpp"
#include "json.hpp"
#include "provrec/provrec.hpp"

using namespace provrec;
using cli::quote;
namespace fs = std::filesystem;

namespace {

const std::string kData = PROVREC_TEST_DATA;

std::string value_of(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string k, v;
  while (in >> k >> v)
    if (k == key) return v;
  return {};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = cli::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return quote((dir / name).string()); }

  /// ingest the fixture corpus into matrix.csv
  void ingest_fixture() {
    auto r = cli::run("ingest --records " + quote(kData + "/records.jsonl") + " --manifests " +
                      quote(kData + "/manifests.csv") + " --out " + path("triplets.csv") + " --matrix-out " +
                      path("matrix.csv"));
    ASSERT_EQ(r.exit_code, 0);
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, Help) {
  EXPECT_EQ(cli::run("--help").exit_code, 0);
  EXPECT_EQ(cli::run("train --help").exit_code, 0);
  EXPECT_EQ(cli::run("").exit_code, 1);
  EXPECT_EQ(cli::run("bogus").exit_code, 1);
}

TEST_F(Cli, IngestWritesTripletsAndReport) {
  auto r = cli::run("ingest --records " + quote(kData + "/records.jsonl") + " --manifests " +
                    quote(kData + "/manifests.csv") + " --out " + path("t.csv"));
  ASSERT_EQ(r.exit_code, 0);
  auto report = nlohmann::json::parse(io::read_file(dir / "t.csv.report.json"));
  auto triplets = parse_triplets(io::read_file(dir / "t.csv"));
  EXPECT_EQ(triplets.size(), report["counts"]["attributed"].get<std::size_t>());
  EXPECT_EQ(value_of(r.out, "attributed"), std::to_string(triplets.size()));
  EXPECT_EQ(report["counts"]["rejected"], 2);
  EXPECT_EQ(report["counts"]["unattributable"], 1);
  EXPECT_EQ(report["counts"]["tied"], 1);
}

TEST_F(Cli, IngestErrors) {
  const std::string manifests = " --manifests " + quote(kData + "/manifests.csv");
  EXPECT_EQ(cli::run("ingest --records " + path("missing.jsonl") + manifests + " --out " + path("t.csv")).exit_code,
            2);
  io::write_file_atomic(dir / "empty.jsonl", "");
  auto r = cli::run("ingest --records " + path("empty.jsonl") + manifests + " --out " + path("t.csv"));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(value_of(r.out, "records"), "0");
  EXPECT_TRUE(parse_triplets(io::read_file(dir / "t.csv")).empty());
  EXPECT_EQ(cli::run("ingest --records " + quote(kData + "/records.jsonl") + manifests + " --out " + path("t.csv") +
                     " --tie-policy nope")
                .exit_code,
            1);
}

TEST_F(Cli, TrainIsReproducible) {
  ingest_fixture();
  const auto cmd = "train --matrix " + path("matrix.csv") + " --out " + path("a.model");
  auto a = cli::run(cmd);
  ASSERT_EQ(a.exit_code, 0);
  const auto first = io::read_file(dir / "a.model");
  fs::remove(dir / "a.model");
  auto b = cli::run(cmd);
  ASSERT_EQ(b.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(io::read_file(dir / "a.model"), first);

  auto model = load_model(dir / "a.model");
  auto matrix = load_matrix(dir / "matrix.csv");
  EXPECT_EQ(value_of(a.out, "objective"), format_score(objective(model, matrix)));
  EXPECT_EQ(value_of(a.out, "iterations"), std::to_string(model.iterations));
  EXPECT_EQ(model.config, TrainConfig{});
}

TEST_F(Cli, TrainRejectsBadConfig) {
  ingest_fixture();
  const auto base = "train --matrix " + path("matrix.csv") + " --out " + path("m");
  EXPECT_EQ(cli::run(base + " --rank 0").exit_code, 1);
  EXPECT_EQ(cli::run(base + " --lambda -1").exit_code, 1);
  EXPECT_EQ(cli::run(base + " --rank abc").exit_code, 1);
  EXPECT_FALSE(fs::exists(dir / "m"));
  EXPECT_EQ(cli::run("train --matrix " + path("nope.csv") + " --out " + path("m")).exit_code, 2);
}

TEST_F(Cli, RecommendAndPredict) {
  ingest_fixture();
  ASSERT_EQ(cli::run("train --matrix " + path("matrix.csv") + " --out " + path("m")).exit_code, 0);
  auto r = cli::run("recommend --model " + path("m") + " --dataset ds-preventad");
  ASSERT_EQ(r.exit_code, 0);
  auto table = csv::parse(r.out, "recommendations");
  EXPECT_EQ(table.header, (std::vector<std::string>{"rank", "subject_id", "score", "predicted_outcome", "cold_start"}));
  EXPECT_LE(table.rows.size(), 10u);
  EXPECT_FALSE(table.rows.empty());
  for (std::size_t j = 1; j < table.rows.size(); ++j)
    EXPECT_GE(std::stod(table.rows[j - 1].second[2]), std::stod(table.rows[j].second[2]));

  auto none = cli::run("recommend --model " + path("m") + " --dataset ds-preventad --top-n 0");
  EXPECT_EQ(none.exit_code, 0);
  EXPECT_TRUE(csv::parse(none.out, "r").rows.empty());
  EXPECT_EQ(cli::run("recommend --model " + path("m") + " --dataset nope").exit_code, 2);
  EXPECT_EQ(cli::run("recommend --model " + path("m")).exit_code, 1);
  EXPECT_EQ(cli::run("recommend --model " + path("m") + " --dataset a --pipeline b").exit_code, 1);

  auto p = cli::run("predict --model " + path("m") + " --dataset ds-preventad --pipeline doi:10.5281/zenodo.4043546");
  ASSERT_EQ(p.exit_code, 0);
  EXPECT_EQ(csv::parse(p.out, "p").rows.size(), 1u);
}

TEST_F(Cli, EvaluateSynthetic) {
  auto s = cli::run("synth --out " + path("syn.csv") + " --truth-out " + path("truth.json"));
  ASSERT_EQ(s.exit_code, 0);
  EXPECT_EQ(value_of(s.out, "entries"), "288");
  auto r = cli::run("evaluate --matrix " + path("syn.csv") + " --out " + path("eval.json") + " --roc-out " +
                    path("roc.csv") + " --scores-out " + path("scores.csv"));
  ASSERT_EQ(r.exit_code, 0);
  auto report = nlohmann::json::parse(io::read_file(dir / "eval.json"));
  const double a = report["auc"];
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
  EXPECT_EQ(report["per_fold_auc"].size(), 10u);
  EXPECT_EQ(value_of(r.out, "auc"), format_score(a));

  // The roc subcommand on the held-out scores reproduces the pooled curve.
  auto roc = cli::run("roc --scores " + path("scores.csv") + " --out " + path("roc2.csv"));
  ASSERT_EQ(roc.exit_code, 0);
  EXPECT_EQ(csv::parse(io::read_file(dir / "roc.csv"), "a").rows.size(),
            csv::parse(io::read_file(dir / "roc2.csv"), "b").rows.size());

  EXPECT_EQ(cli::run("evaluate --matrix " + path("syn.csv") + " --out " + path("e") + " --k-folds 1000").exit_code, 1);
  EXPECT_EQ(cli::run("evaluate --matrix " + path("syn.csv") + " --out " + path("e") + " --k-folds 0").exit_code, 1);
}

TEST_F(Cli, EvaluateWithSurvey) {
  ingest_fixture();
  auto r = cli::run("evaluate --matrix " + path("matrix.csv") + " --survey " + quote(kData + "/survey.csv") +
                    " --k-folds 5 --out " + path("eval.json") + " --baseline-roc-out " + path("base.csv"));
  ASSERT_EQ(r.exit_code, 0);
  auto report = nlohmann::json::parse(io::read_file(dir / "eval.json"));
  EXPECT_TRUE(report["baseline_auc"].is_number());
  EXPECT_FALSE(value_of(r.out, "baseline_auc").empty());
  EXPECT_TRUE(fs::exists(dir / "base.csv"));
}
