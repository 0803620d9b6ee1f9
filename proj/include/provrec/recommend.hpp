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
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "provrec/csv.hpp"
#include "provrec/error.hpp"
#include "provrec/factorization.hpp"

namespace provrec {

/// Rounding threshold at which recommendations are reported by default.
inline constexpr double kDefaultThreshold = 1.2;

/// Rounds a raw score to an outcome: success iff score >= threshold.
/// Infinite thresholds are allowed so ROC sweeps can use sentinels.
inline Outcome classify(double score, double threshold) {
  if (!std::isfinite(score)) throw InvalidArgument("classify: score is not finite");
  if (std::isnan(threshold)) throw InvalidArgument("classify: threshold is NaN");
  return score >= threshold ? Outcome::success : Outcome::failed;
}

struct Recommendation {
  std::size_t index = 0;  // row or column of the subject in the model
  std::string subject_id;
  double score = 0.0;
  Outcome predicted_outcome = Outcome::failed;
  bool cold_start = false;
};

namespace detail {

template <typename ScoreFn>
std::vector<Recommendation> rank_subjects(const std::vector<std::string>& ids, std::size_t top_n, double threshold,
                                          ScoreFn&& score_of) {
  std::vector<Recommendation> out;
  if (top_n == 0) return out;
  for (std::size_t s = 0; s < ids.size(); ++s) {
    const Prediction pred = score_of(s);
    const Outcome o = classify(pred.score, threshold);
    if (o == Outcome::success) out.push_back({s, ids[s], pred.score, o, pred.cold_start});
  }
  std::stable_sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    return a.score > b.score;  // stable: equal scores keep index order
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

}  // namespace detail

/// Pipelines predicted to run on `dataset_id`, best first.
inline std::vector<Recommendation> recommend_pipelines(const FactorModel& model, std::string_view dataset_id,
                                                       std::size_t top_n, double threshold = kDefaultThreshold) {
  const auto i = dataset_column(model, dataset_id);
  return detail::rank_subjects(model.pipelines, top_n, threshold,
                               [&](std::size_t u) { return predict_raw(model, u, i); });
}

/// Datasets `pipeline_id` is predicted to run on, best first.
inline std::vector<Recommendation> recommend_datasets(const FactorModel& model, std::string_view pipeline_id,
                                                      std::size_t top_n, double threshold = kDefaultThreshold) {
  const auto u = pipeline_row(model, pipeline_id);
  return detail::rank_subjects(model.datasets, top_n, threshold,
                               [&](std::size_t i) { return predict_raw(model, u, i); });
}

inline std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// `rank,subject_id,score,predicted_outcome,cold_start`; rank is 1-based.
inline std::string format_recommendations(const std::vector<Recommendation>& recs, std::string_view comment = {}) {
  std::string out = csv::comment_block(comment);
  out += "rank,subject_id,score,predicted_outcome,cold_start\n";
  for (std::size_t r = 0; r < recs.size(); ++r) {
    const auto& x = recs[r];
    out += std::to_string(r + 1) + ',' + csv::escape(x.subject_id) + ',' + format_score(x.score) + ',' +
           std::to_string(rating_value(x.predicted_outcome)) + ',' + (x.cold_start ? "true" : "false") + '\n';
  }
  return out;
}

}  // namespace provrec
