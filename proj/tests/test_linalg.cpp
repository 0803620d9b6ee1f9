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
#include "provrec/linalg.hpp"

using namespace provrec;

TEST(SpdSolve, KnownSystem) {
  // [[4,2],[2,3]] x = [2,1] -> x = [0.5, 0]
  auto x = spd_solve({4, 2, 2, 3}, {2, 1}, 2);
  EXPECT_NEAR(x[0], 0.5, 1e-15);
  EXPECT_NEAR(x[1], 0.0, 1e-15);
}

TEST(SpdSolve, SingularSystemIsJittered) {
  // Rank one: [[1,1],[1,1]] x = [2,2]. Any x with x0 + x1 = 2 solves it.
  auto x = spd_solve({1, 1, 1, 1}, {2, 2}, 2);
  EXPECT_NEAR(x[0] + x[1], 2.0, 1e-6);
  EXPECT_NEAR(x[0], 1.0, 1e-6);  // jitter picks the minimum-norm solution
  auto zero = spd_solve({0, 0, 0, 0}, {0, 0}, 2);
  EXPECT_EQ(zero, (std::vector<double>{0.0, 0.0}));
}

TEST(SpdSolve, IndefiniteSystemFails) {
  EXPECT_THROW(spd_solve({-1}, {1}, 1), NumericError);
  EXPECT_THROW(spd_solve({std::numeric_limits<double>::quiet_NaN()}, {1}, 1), NumericError);
  EXPECT_THROW(spd_solve({1, 0, 0}, {1}, 1), InvalidArgument);
}

TEST(RidgeSolve, MatchesGaussianEliminationOracle) {
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::uniform_real_distribution<double> lam(0.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + gen() % 8;
    const std::size_t rows = 1 + gen() % 15;
    const double lambda = trial % 10 == 0 ? 1e-3 : lam(gen);
    std::vector<std::vector<double>> a(rows, std::vector<double>(k));
    std::vector<double> b(rows);
    for (auto& r : a)
      for (auto& v : r) v = val(gen);
    for (auto& v : b) v = 1.0 + static_cast<double>(gen() % 2);
    std::vector<std::span<const double>> design;
    for (const auto& r : a) design.emplace_back(r);
    auto x = ridge_solve(design, b, lambda, k);
    auto expected = oracle::ridge(a, b, lambda);
    double scale = 0.0, diff = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      scale = std::max(scale, std::abs(expected[j]));
      diff = std::max(diff, std::abs(x[j] - expected[j]));
    }
    EXPECT_LE(diff, 1e-8 * std::max(scale, 1e-300)) << "trial " << trial;
  }
}

TEST(DenseMatrix, RowViews) {
  DenseMatrix m(2, 3, 1.0);
  m(1, 2) = 5.0;
  EXPECT_EQ(m.row(1)[2], 5.0);
  EXPECT_EQ(dot(m.row(0), m.row(1)), 7.0);
  EXPECT_EQ(squared_norm(m.row(1)), 27.0);
}
