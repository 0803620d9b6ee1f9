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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "provrec/error.hpp"

namespace provrec {

/// Row-major dense matrix of doubles. Holds factor matrices and the small
/// k x k systems of the ALS solves.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

namespace detail {

// In-place Cholesky of the k x k row-major SPD matrix `s` (lower factor
// written into the lower triangle) followed by forward/back substitution
// on `b`. Returns false when a pivot falls below `pivot_floor`.
inline bool cholesky_solve_inplace(std::vector<double>& s, std::vector<double>& b, std::size_t k,
                                   double pivot_floor) {
  for (std::size_t j = 0; j < k; ++j) {
    double d = s[j * k + j];
    for (std::size_t p = 0; p < j; ++p) d -= s[j * k + p] * s[j * k + p];
    if (!(d > pivot_floor)) return false;
    const double l = std::sqrt(d);
    s[j * k + j] = l;
    for (std::size_t i = j + 1; i < k; ++i) {
      double v = s[i * k + j];
      for (std::size_t p = 0; p < j; ++p) v -= s[i * k + p] * s[j * k + p];
      s[i * k + j] = v / l;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    double v = b[i];
    for (std::size_t p = 0; p < i; ++p) v -= s[i * k + p] * b[p];
    b[i] = v / s[i * k + i];
  }
  for (std::size_t i = k; i-- > 0;) {
    double v = b[i];
    for (std::size_t p = i + 1; p < k; ++p) v -= s[p * k + i] * b[p];
    b[i] = v / s[i * k + i];
  }
  return true;
}

}  // namespace detail

/// Relative pivot floor below which a system is treated as singular, and
/// the diagonal jitter (relative to max(1, largest diagonal)) added on the
/// single retry.
inline constexpr double kPivotFloor = 1e-13;
inline constexpr double kJitter = 1e-10;

/// Solves S x = rhs for a symmetric positive (semi)definite k x k system by
/// Cholesky. A singular system is retried once with diagonal jitter.
inline std::vector<double> spd_solve(std::vector<double> system, std::vector<double> rhs, std::size_t k) {
  if (system.size() != k * k || rhs.size() != k) throw InvalidArgument("spd_solve: dimension mismatch");
  double max_diag = 0.0;
  for (std::size_t j = 0; j < k; ++j) max_diag = std::max(max_diag, std::abs(system[j * k + j]));
  const double floor = kPivotFloor * std::max(1.0, max_diag);

  auto s = system;
  auto x = rhs;
  if (detail::cholesky_solve_inplace(s, x, k, floor)) return x;

  const double jitter = kJitter * std::max(1.0, max_diag);
  for (std::size_t j = 0; j < k; ++j) system[j * k + j] += jitter;
  if (detail::cholesky_solve_inplace(system, rhs, k, floor)) return rhs;
  throw NumericError("linear system is singular even after diagonal jitter");
}

/// Ridge regression over the rows of `design` (each of width k):
/// solves (AᵀA + reg I) x = Aᵀb.
inline std::vector<double> ridge_solve(std::span<const std::span<const double>> design, std::span<const double> target,
                                       double reg, std::size_t k) {
  if (design.size() != target.size()) throw InvalidArgument("ridge_solve: design/target length mismatch");
  std::vector<double> system(k * k, 0.0), rhs(k, 0.0);
  for (std::size_t r = 0; r < design.size(); ++r) {
    const auto a = design[r];
    for (std::size_t i = 0; i < k; ++i) {
      rhs[i] += a[i] * target[r];
      for (std::size_t j = 0; j <= i; ++j) system[i * k + j] += a[i] * a[j];
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    system[i * k + i] += reg;
    for (std::size_t j = 0; j < i; ++j) system[j * k + i] = system[i * k + j];
  }
  return spd_solve(std::move(system), std::move(rhs), k);
}

}  // namespace provrec
