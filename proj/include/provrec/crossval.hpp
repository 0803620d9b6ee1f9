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
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "provrec/error.hpp"
#include "provrec/factorization.hpp"
#include "provrec/matrix.hpp"
#include "provrec/parallel.hpp"
#include "provrec/random.hpp"
#include "provrec/roc.hpp"

namespace provrec {

/// fold[e] is the fold of matrix entry e.
using FoldAssignment = std::vector<std::size_t>;

/// Random partition of the observed entries into k folds whose sizes differ
/// by at most one. When stratified, successes are dealt round-robin first
/// and failures continue the rotation, so every fold's class mix tracks the
/// global one.
inline FoldAssignment kfold_split(const UtilityMatrix& m, std::size_t k, std::uint64_t seed, bool stratified = true) {
  if (k == 0) throw InvalidArgument("k_folds must be at least 1");
  if (k > m.size())
    throw InvalidArgument("k_folds (" + std::to_string(k) + ") exceeds the number of observed entries (" +
                          std::to_string(m.size()) + ")");
  std::mt19937_64 gen(seed);
  std::vector<std::size_t> order;
  order.reserve(m.size());
  if (stratified) {
    std::vector<std::size_t> success, failure;
    for (std::size_t e = 0; e < m.size(); ++e)
      (m.entries()[e].rating == Outcome::success ? success : failure).push_back(e);
    shuffle(std::span(success), gen);
    shuffle(std::span(failure), gen);
    order.insert(order.end(), success.begin(), success.end());
    order.insert(order.end(), failure.begin(), failure.end());
  } else {
    order.resize(m.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span(order), gen);
  }
  FoldAssignment fold(m.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold[order[pos]] = pos % k;
  return fold;
}

struct HeldOutScore {
  std::size_t entry = 0;
  std::size_t fold = 0;
  double score = 0.0;
  Outcome label = Outcome::failed;
  bool cold_start = false;
};

struct CrossValidationResult {
  std::size_t k_folds = 0;
  FoldAssignment folds;
  std::vector<HeldOutScore> held_out;  // entry order
  std::vector<RocPoint> roc;           // pooled over folds
  double auc = 0.0;
  std::vector<std::optional<double>> per_fold_auc;  // nullopt for single-class folds
  std::size_t cold_start_predictions = 0;
};

/// k-fold cross validation of ALS: each fold is scored by a model trained on
/// the remaining folds, then all held-out scores are pooled into one ROC.
/// Empty `thresholds` sweeps every distinct held-out score.
inline CrossValidationResult cross_validate(const UtilityMatrix& m, const TrainConfig& config, std::size_t k,
                                            std::uint64_t seed, std::span<const double> thresholds = {},
                                            bool stratified = true, unsigned jobs = 1) {
  config.validate();
  CrossValidationResult res;
  res.k_folds = k;
  res.folds = kfold_split(m, k, seed, stratified);
  res.held_out.resize(m.size());

  parallel_for(k, jobs, [&](std::size_t f) {
    std::vector<MatrixEntry> train;
    for (std::size_t e = 0; e < m.size(); ++e)
      if (res.folds[e] != f) train.push_back(m.entries()[e]);
    const auto model = als_fit(m.with_entries(std::move(train)), config);
    for (std::size_t e = 0; e < m.size(); ++e) {
      if (res.folds[e] != f) continue;
      const auto& entry = m.entries()[e];
      const auto pred = predict_raw(model, entry.pipeline, entry.dataset);
      res.held_out[e] = {e, f, pred.score, entry.rating, pred.cold_start};
    }
  });

  std::vector<ScoredExample> pooled;
  std::vector<std::vector<ScoredExample>> by_fold(k);
  pooled.reserve(m.size());
  for (const auto& h : res.held_out) {
    pooled.push_back({h.score, h.label});
    by_fold[h.fold].push_back({h.score, h.label});
    if (h.cold_start) ++res.cold_start_predictions;
  }
  res.roc = thresholds.empty() ? roc_curve(pooled) : roc_curve(pooled, thresholds);
  res.auc = auc(res.roc);
  for (const auto& fs : by_fold) {
    const bool both = std::any_of(fs.begin(), fs.end(), [](auto& s) { return s.label == Outcome::success; }) &&
                      std::any_of(fs.begin(), fs.end(), [](auto& s) { return s.label == Outcome::failed; });
    res.per_fold_auc.push_back(both ? std::optional<double>(auc(roc_curve(fs))) : std::nullopt);
  }
  return res;
}

}  // namespace provrec
