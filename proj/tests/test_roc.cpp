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

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "provrec/roc.hpp"

using namespace provrec;

namespace {

constexpr auto S = Outcome::success;
constexpr auto F = Outcome::failed;

const std::vector<ScoredExample> kSix{{0.9, S}, {0.8, F}, {0.7, S}, {0.6, S}, {0.3, F}, {0.1, F}};

}  // namespace

TEST(Roc, ExtremeThresholds) {
  const std::vector<double> low{0.0}, high{1.0};
  auto all = roc_curve(kSix, low);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].tpr, 1.0);
  EXPECT_EQ(all[0].fpr, 1.0);
  auto none = roc_curve(kSix, high);
  EXPECT_EQ(none[0].tpr, 0.0);
  EXPECT_EQ(none[0].fpr, 0.0);
}

TEST(Roc, HandCountedConfusion) {
  const std::vector<double> t{0.65};
  auto p = roc_curve(kSix, t).at(0);
  EXPECT_EQ(p.tp, 2u);
  EXPECT_EQ(p.fp, 1u);
  EXPECT_EQ(p.tn, 2u);
  EXPECT_EQ(p.fn, 1u);
  EXPECT_DOUBLE_EQ(p.tpr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(p.fpr, 1.0 / 3.0);
  // score equal to the threshold counts as positive
  const std::vector<double> eq{0.7};
  EXPECT_EQ(roc_curve(kSix, eq).at(0).tp, 2u);
}

TEST(Roc, DefaultSweepAndAuc) {
  auto curve = roc_curve(kSix);
  EXPECT_EQ(curve.size(), 8u);  // six scores plus two sentinels
  EXPECT_EQ(curve.front().fpr, 0.0);
  EXPECT_EQ(curve.front().tpr, 0.0);
  EXPECT_EQ(curve.back().fpr, 1.0);
  EXPECT_EQ(curve.back().tpr, 1.0);
  EXPECT_NEAR(auc(curve), 7.0 / 9.0, 1e-12);
}

TEST(Auc, Corners) {
  const std::vector<RocPoint> chance{{0, 0, 0}, {0, 1, 1}};
  EXPECT_DOUBLE_EQ(auc(chance), 0.5);
  RocPoint perfect;
  perfect.tpr = 1.0;
  perfect.fpr = 0.0;
  EXPECT_DOUBLE_EQ(auc(std::vector<RocPoint>{perfect}), 1.0);
  EXPECT_THROW(auc(std::vector<RocPoint>{}), InvalidArgument);
}

TEST(Auc, PerfectAndInverted) {
  std::vector<ScoredExample> s{{0.9, S}, {0.8, S}, {0.2, F}, {0.1, F}};
  EXPECT_DOUBLE_EQ(auc(roc_curve(s)), 1.0);
  for (auto& x : s) x.score = -x.score;
  EXPECT_DOUBLE_EQ(auc(roc_curve(s)), 0.0);
}

TEST(Auc, EqualsConcordanceOnRandomSets) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 499;
    const int levels = 1 + static_cast<int>(gen() % 40);  // few levels force ties
    std::vector<ScoredExample> s(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j].score = static_cast<double>(gen() % levels) / 7.0;
      s[j].label = gen() % 2 ? S : F;
    }
    s[0].label = S;
    s[1].label = F;
    EXPECT_NEAR(auc(roc_curve(s)), oracle::concordance(s), 1e-12) << "trial " << trial;
  }
}

TEST(Roc, MonotoneInThreshold) {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> v(0.0, 2.0);
  std::vector<ScoredExample> s(300);
  for (auto& x : s) x = {v(gen), gen() % 2 ? S : F};
  std::vector<double> t;
  for (double tau = -0.1; tau < 2.2; tau += 0.01) t.push_back(tau);
  auto curve = roc_curve(s, t);
  std::sort(curve.begin(), curve.end(), [](auto& a, auto& b) { return a.threshold < b.threshold; });
  for (std::size_t j = 1; j < curve.size(); ++j) {
    EXPECT_LE(curve[j].tpr, curve[j - 1].tpr);
    EXPECT_LE(curve[j].fpr, curve[j - 1].fpr);
  }
}

TEST(Roc, Errors) {
  const std::vector<ScoredExample> pos{{0.5, S}, {0.7, S}};
  const std::vector<ScoredExample> neg{{0.5, F}};
  EXPECT_THROW(roc_curve(pos), InvalidArgument);
  EXPECT_THROW(roc_curve(neg), InvalidArgument);
  EXPECT_THROW(roc_curve(kSix, std::vector<double>{}), InvalidArgument);
  const std::vector<ScoredExample> nan{{std::nan(""), S}, {0.1, F}};
  EXPECT_THROW(roc_curve(nan), InvalidArgument);
}

TEST(Auc, CoinFlipNearHalf) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> v(0.0, 1.0);
  std::vector<ScoredExample> s(2000);
  for (auto& x : s) x = {v(gen), v(gen) < 0.5 ? S : F};
  EXPECT_NEAR(auc(roc_curve(s)), 0.5, 0.05);
}

TEST(Roc, TextFormats) {
  auto curve = roc_curve(kSix, std::vector<double>{std::numeric_limits<double>::infinity(), 0.65});
  auto text = format_roc(curve);
  EXPECT_EQ(text,
            "threshold,fpr,tpr,tp,fp,tn,fn\n"
            "inf,0,0,0,0,3,3\n"
            "0.65000000000000002,0.33333333333333331,0.66666666666666663,2,1,2,1\n");
  auto j = roc_to_json(curve);
  EXPECT_EQ(j[0]["threshold"], "inf");
  EXPECT_EQ(j[1]["tp"], 2);
}

TEST(Roc, ParseScored) {
  auto s = parse_scored("# run\nscore,label,extra\n0.5,2,x\n-1e-3,1,y\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].score, 0.5);
  EXPECT_EQ(s[0].label, S);
  EXPECT_EQ(s[1].label, F);
  EXPECT_THROW(parse_scored("label,score\n1,2\n"), ParseError);
  EXPECT_THROW(parse_scored("score,label\nabc,2\n"), ParseError);
  EXPECT_THROW(parse_scored("score,label\n0.5,3\n"), ParseError);
  EXPECT_THROW(parse_scored("score,label\nnan,1\n"), ParseError);
}
