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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "provrec/matrix.hpp"

using namespace provrec;

namespace {

ExecutionTriplet trip(std::string p, std::string d, int r, std::optional<std::string> ts = std::nullopt) {
  ExecutionTriplet t{std::move(p), std::move(d), r == 2 ? Outcome::success : Outcome::failed, std::nullopt};
  if (ts) t.timestamp = parse_timestamp(*ts);
  return t;
}

std::vector<ExecutionTriplet> random_triplets(std::mt19937_64& gen, int n) {
  std::vector<ExecutionTriplet> t;
  for (int j = 0; j < n; ++j)
    t.push_back(trip("P" + std::to_string(gen() % 5), "D" + std::to_string(gen() % 4), gen() % 2 ? 2 : 1));
  return t;
}

}  // namespace

TEST(Aggregate, AnySuccess) {
  std::vector<ExecutionTriplet> t{trip("P", "D", 2), trip("P", "D", 1)};
  auto m = aggregate(t);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.rating(0, 0), Outcome::success);
}

TEST(Aggregate, MajorityTiesGoToFailure) {
  std::vector<ExecutionTriplet> t{trip("P", "D", 1), trip("P", "D", 1), trip("P", "D", 2)};
  EXPECT_EQ(aggregate(t, ConflictPolicy::majority).rating(0, 0), Outcome::failed);
  std::vector<ExecutionTriplet> even{trip("P", "D", 1), trip("P", "D", 2)};
  EXPECT_EQ(aggregate(even, ConflictPolicy::majority).rating(0, 0), Outcome::failed);
  std::vector<ExecutionTriplet> win{trip("P", "D", 2), trip("P", "D", 1), trip("P", "D", 2)};
  EXPECT_EQ(aggregate(win, ConflictPolicy::majority).rating(0, 0), Outcome::success);
}

TEST(Aggregate, LatestTimestamp) {
  std::vector<ExecutionTriplet> t{trip("P", "D", 2, "2021-01-02T00:00:00Z"), trip("P", "D", 1, "2021-01-01T00:00:00Z"),
                                  trip("Q", "D", 2, "2021-01-01T00:00:00Z"), trip("Q", "D", 1, "2021-01-03T00:00:00Z")};
  auto m = aggregate(t, ConflictPolicy::latest_timestamp);
  EXPECT_EQ(m.rating(0, 0), Outcome::success);
  EXPECT_EQ(m.rating(1, 0), Outcome::failed);
}

TEST(Aggregate, LatestTimestampNeedsTimestamps) {
  std::vector<ExecutionTriplet> t{trip("P", "D", 2, "2021-01-02T00:00:00Z"), trip("P", "X", 1)};
  try {
    aggregate(t, ConflictPolicy::latest_timestamp);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("(P, X)"), std::string::npos);
  }
}

TEST(Aggregate, IndexOrderIsFirstAppearance) {
  std::vector<ExecutionTriplet> t{trip("P2", "D9", 1), trip("P1", "D3", 2), trip("P2", "D3", 2)};
  auto m = aggregate(t);
  EXPECT_EQ(m.pipelines(), (std::vector<std::string>{"P2", "P1"}));
  EXPECT_EQ(m.datasets(), (std::vector<std::string>{"D9", "D3"}));
  EXPECT_EQ(m.pipeline_index("P1"), 1u);
  EXPECT_EQ(m.dataset_index("nope"), std::nullopt);
}

TEST(Aggregate, EmptyIsValid) {
  auto m = aggregate({});
  EXPECT_TRUE(m.empty());
  EXPECT_EQ(m.n_pipelines(), 0u);
  EXPECT_THROW(density(m), InvalidArgument);
}

TEST(Aggregate, ExecutionCorpusShape) {
  std::vector<ExecutionTriplet> t;
  std::mt19937_64 gen(3);
  std::vector<int> cells(704);
  for (int c = 0; c < 704; ++c) cells[c] = c;
  std::shuffle(cells.begin(), cells.end(), gen);
  // Every pipeline and dataset appears at least once.
  for (int p = 0; p < 32; ++p) t.push_back(trip("P" + std::to_string(p), "D" + std::to_string(p % 22), 1));
  std::set<int> used;
  for (int p = 0; p < 32; ++p) used.insert(p * 22 + p % 22);
  for (int c : cells) {
    if (t.size() == 288) break;
    if (used.count(c)) continue;
    t.push_back(trip("P" + std::to_string(c / 22), "D" + std::to_string(c % 22), 2));
  }
  auto m = aggregate(t);
  EXPECT_EQ(m.size(), 288u);
  EXPECT_EQ(m.n_pipelines(), 32u);
  EXPECT_EQ(m.n_datasets(), 22u);
  EXPECT_NEAR(density(m), 288.0 / 704.0, 1e-15);
  EXPECT_NEAR(density(m), 0.409, 1e-3);
}

TEST(Density, Cases) {
  UtilityMatrix full(
      {"a", "b"}, {"x", "y"},
      {{0, 0, Outcome::success}, {0, 1, Outcome::failed}, {1, 0, Outcome::failed}, {1, 1, Outcome::success}});
  EXPECT_EQ(density(full), 1.0);
  UtilityMatrix none({"a", "b", "c"}, {"x", "y", "z"}, {});
  EXPECT_EQ(density(none), 0.0);
  UtilityMatrix no_cols({"a"}, {}, {});
  EXPECT_THROW(density(no_cols), InvalidArgument);
}

TEST(UtilityMatrix, ConstructorInvariants) {
  EXPECT_THROW(UtilityMatrix({"a", "a"}, {"x"}, {}), InvalidArgument);
  EXPECT_THROW(UtilityMatrix({"a"}, {"x"}, {{0, 1, Outcome::success}}), InvalidArgument);
  EXPECT_THROW(UtilityMatrix({"a"}, {"x"}, {{0, 0, Outcome::success}, {0, 0, Outcome::failed}}), InvalidArgument);
  EXPECT_THROW(UtilityMatrix({"a"}, {"x"}, {{0, 0, static_cast<Outcome>(3)}}), InvalidArgument);
}

TEST(AggregateProperties, Idempotent) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_triplets(gen, 1 + static_cast<int>(gen() % 30));
    for (auto policy : {ConflictPolicy::any_success, ConflictPolicy::majority}) {
      auto m = aggregate(t, policy);
      EXPECT_EQ(aggregate(m.to_triplets(), policy), m);
    }
  }
}

TEST(AggregateProperties, OrderInvariantRatings) {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_triplets(gen, 1 + static_cast<int>(gen() % 30));
    for (auto policy : {ConflictPolicy::any_success, ConflictPolicy::majority}) {
      auto base = aggregate(t, policy);
      auto shuffled = t;
      std::shuffle(shuffled.begin(), shuffled.end(), gen);
      auto other = aggregate(shuffled, policy);
      ASSERT_EQ(other.size(), base.size());
      for (const auto& e : base.entries()) {
        auto u = other.pipeline_index(base.pipelines()[e.pipeline]);
        auto i = other.dataset_index(base.datasets()[e.dataset]);
        ASSERT_TRUE(u && i);
        EXPECT_EQ(other.rating(*u, *i), e.rating);
      }
    }
  }
}

TEST(AggregateProperties, AnySuccessMeansSomeSuccess) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_triplets(gen, 1 + static_cast<int>(gen() % 30));
    auto m = aggregate(t);
    for (const auto& e : m.entries()) {
      const bool any = std::any_of(t.begin(), t.end(), [&](const auto& x) {
        return x.pipeline_id == m.pipelines()[e.pipeline] && x.dataset_id == m.datasets()[e.dataset] &&
               x.outcome == Outcome::success;
      });
      EXPECT_EQ(e.rating == Outcome::success, any);
    }
  }
}

TEST(MatrixFile, BitExactRoundTrip) {
  auto dir = std::filesystem::path(::testing::TempDir()) / "matrix_roundtrip";
  std::filesystem::create_directories(dir);
  // Header lists an id with no entries; rows use quoting.
  UtilityMatrix m({"doi:a,1", "P2", "P-unused"}, {"D1", "D\"2"},
                  {{1, 1, Outcome::success}, {0, 0, Outcome::failed}, {0, 1, Outcome::success}});
  nlohmann::json run = {{"seed", 5}};
  save_matrix(dir / "m.csv", m, run, "comment");
  auto loaded = load_matrix(dir / "m.csv");
  EXPECT_EQ(loaded, m);
  save_matrix(dir / "m2.csv", loaded, run, "comment");
  EXPECT_EQ(io::read_file(dir / "m.csv"), io::read_file(dir / "m2.csv"));
  EXPECT_EQ(io::read_file(dir / "m.csv.meta.json"), io::read_file(dir / "m2.csv.meta.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "m.csv.tmp"));
}

TEST(MatrixFile, RowsWithoutHeaderUseFirstAppearance) {
  auto m = parse_matrix("pipeline_id,dataset_id,rating\nB,Y,2\nA,X,1\nB,X,1\n", std::nullopt);
  EXPECT_EQ(m.pipelines(), (std::vector<std::string>{"B", "A"}));
  EXPECT_EQ(m.rating(0, 1), Outcome::failed);
}

TEST(MatrixFile, HeaderMismatchIsParseError) {
  const char* rows = "pipeline_id,dataset_id,rating\nA,X,2\n";
  EXPECT_THROW(parse_matrix(rows, std::string_view(R"({"format":"provrec-matrix","n_pipelines":1,"n_datasets":1,)"
                                                   R"("n_entries":1,"pipelines":["B"],"datasets":["X"]})")),
               ParseError);
  EXPECT_THROW(parse_matrix(rows, std::string_view(R"({"format":"provrec-matrix","n_pipelines":2,"n_datasets":1,)"
                                                   R"("pipelines":["A"],"datasets":["X"]})")),
               ParseError);
  EXPECT_THROW(parse_matrix(rows, std::string_view("not json")), ParseError);
  EXPECT_THROW(load_matrix("/nonexistent/matrix.csv"), IoError);
}
