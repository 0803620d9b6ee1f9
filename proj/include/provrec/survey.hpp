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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "provrec/csv.hpp"
#include "provrec/error.hpp"
#include "provrec/matrix.hpp"
#include "provrec/roc.hpp"

namespace provrec {

/// Self-reported knowledge level of an expert about a pipeline and dataset.
enum class Confidence : int { none = 0, some = 1, good = 2, expert = 3 };

struct ExpertVote {
  std::string expert_id;
  std::optional<Outcome> prediction;  // only given at good or expert confidence
  Confidence confidence = Confidence::none;
};

using PairKey = std::pair<std::string, std::string>;  // (pipeline_id, dataset_id)

struct ExpertSurvey {
  std::map<PairKey, std::vector<ExpertVote>> votes;
};

namespace detail {

inline std::optional<Confidence> parse_confidence(std::string_view s) {
  if (s == "0" || s == "none") return Confidence::none;
  if (s == "1" || s == "some") return Confidence::some;
  if (s == "2" || s == "good") return Confidence::good;
  if (s == "3" || s == "expert") return Confidence::expert;
  return std::nullopt;
}

}  // namespace detail

/// Reads `pipeline_id,dataset_id,expert_id,prediction,confidence`.
/// prediction is "success", "failure" or empty; confidence is 0-3 or
/// none/some/good/expert.
inline ExpertSurvey parse_survey(std::string_view text, std::string_view source = "survey") {
  auto table = csv::parse(text, source);
  if (table.header != std::vector<std::string>{"pipeline_id", "dataset_id", "expert_id", "prediction", "confidence"})
    throw ParseError(std::string(source) + ": header must be 'pipeline_id,dataset_id,expert_id,prediction,confidence'");
  ExpertSurvey survey;
  for (auto& [line, row] : table.rows) {
    auto where = std::string(source) + ":" + std::to_string(line) + ": ";
    if (row[0].empty() || row[1].empty()) throw ParseError(where + "empty pipeline_id or dataset_id");
    ExpertVote vote;
    vote.expert_id = row[2];
    if (row[3] == "success")
      vote.prediction = Outcome::success;
    else if (row[3] == "failure")
      vote.prediction = Outcome::failed;
    else if (!row[3].empty())
      throw ParseError(where + "prediction must be success, failure or empty");
    auto conf = detail::parse_confidence(row[4]);
    if (!conf) throw ParseError(where + "bad confidence '" + row[4] + "'");
    vote.confidence = *conf;
    if (vote.prediction && vote.confidence < Confidence::good)
      throw ParseError(where + "predictions require good or expert confidence");
    survey.votes[{row[0], row[1]}].push_back(std::move(vote));
  }
  return survey;
}

/// Share of predicting experts who expect success; nullopt without
/// predictions for the pair.
inline std::optional<double> expert_fraction(const ExpertSurvey& survey, const PairKey& pair) {
  auto it = survey.votes.find(pair);
  if (it == survey.votes.end()) return std::nullopt;
  std::size_t total = 0, success = 0;
  for (const auto& v : it->second) {
    if (!v.prediction) continue;
    ++total;
    if (*v.prediction == Outcome::success) ++success;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(success) / static_cast<double>(total);
}

struct BaselineResult {
  std::vector<ScoredExample> scored;  // fraction vs actual outcome, survey order
  std::vector<RocPoint> roc;
  double auc = 0.0;
};

/// ROC of the expert-fraction predictor over pairs that both have expert
/// predictions and an observed outcome. Empty `thresholds` sweeps every
/// distinct fraction.
inline BaselineResult expert_roc(const ExpertSurvey& survey, const UtilityMatrix& m,
                                 std::span<const double> thresholds = {}) {
  BaselineResult result;
  for (const auto& [pair, votes] : survey.votes) {
    auto u = m.pipeline_index(pair.first);
    auto i = m.dataset_index(pair.second);
    if (!u || !i) continue;
    auto observed = m.rating(*u, *i);
    auto fraction = expert_fraction(survey, pair);
    if (!observed || !fraction) continue;
    result.scored.push_back({*fraction, *observed});
  }
  if (result.scored.empty()) throw DataError("expert_roc: no pair has both expert predictions and an execution");
  result.roc = thresholds.empty() ? roc_curve(result.scored) : roc_curve(result.scored, thresholds);
  result.auc = auc(result.roc);
  return result;
}

struct MannWhitneyResult {
  double u = 0.0;  // statistic of the first sample
  double z = 0.0;
  double p_value = 1.0;
};

/// Two-sided Mann-Whitney U test with normal approximation, tie-corrected
/// variance and continuity correction.
inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("mann_whitney_u: both samples must be nonempty");
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  std::vector<std::pair<double, int>> all;
  all.reserve(a.size() + b.size());
  for (double x : a) all.emplace_back(x, 0);
  for (double x : b) all.emplace_back(x, 1);
  std::sort(all.begin(), all.end());
  const double n = n1 + n2;
  double rank_sum_a = 0.0, tie_term = 0.0;
  for (std::size_t j = 0; j < all.size();) {
    std::size_t k = j;
    while (k < all.size() && all[k].first == all[j].first) ++k;
    const double t = static_cast<double>(k - j);
    const double mid_rank = (static_cast<double>(j + 1) + static_cast<double>(k)) / 2.0;
    for (std::size_t r = j; r < k; ++r)
      if (all[r].second == 0) rank_sum_a += mid_rank;
    tie_term += t * t * t - t;
    j = k;
  }
  MannWhitneyResult res;
  res.u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
  const double mean = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return res;  // every value tied: no evidence of a difference
  const double dev = std::max(0.0, std::abs(res.u - mean) - 0.5);
  res.z = dev / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(res.z / std::sqrt(2.0)));
  return res;
}

struct ConfidenceComparison {
  double mean_conf_success = 0.0;
  double mean_conf_failure = 0.0;
  std::size_t n_success = 0;
  std::size_t n_failure = 0;
  double u_statistic = 0.0;  // U of the successful-execution group
  double p_value = 1.0;
};

/// Compares per-pair mean expert confidence between executions that
/// succeeded and executions that failed. Every vote for an executed pair
/// counts toward its mean, with or without a prediction.
inline ConfidenceComparison confidence_comparison(const ExpertSurvey& survey, const UtilityMatrix& m) {
  std::vector<double> success, failure;
  for (const auto& [pair, votes] : survey.votes) {
    if (votes.empty()) continue;
    auto u = m.pipeline_index(pair.first);
    auto i = m.dataset_index(pair.second);
    if (!u || !i) continue;
    auto observed = m.rating(*u, *i);
    if (!observed) continue;
    double sum = 0.0;
    for (const auto& v : votes) sum += static_cast<int>(v.confidence);
    (*observed == Outcome::success ? success : failure).push_back(sum / static_cast<double>(votes.size()));
  }
  if (success.empty()) throw DataError("confidence_comparison: no voted pair executed successfully");
  if (failure.empty()) throw DataError("confidence_comparison: no voted pair failed");
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto test = mann_whitney_u(success, failure);
  return {mean(success), mean(failure), success.size(), failure.size(), test.u, test.p_value};
}

inline nlohmann::json confidence_to_json(const ConfidenceComparison& c) {
  return {{"mean_conf_success", c.mean_conf_success},
          {"mean_conf_failure", c.mean_conf_failure},
          {"n_success", c.n_success},
          {"n_failure", c.n_failure},
          {"u_statistic", c.u_statistic},
          {"p_value", c.p_value}};
}

}  // namespace provrec
