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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "provrec/crossval.hpp"
#include "provrec/factorization.hpp"
#include "provrec/matrix.hpp"
#include "provrec/roc.hpp"
#include "provrec/survey.hpp"
#include "provrec/synthetic.hpp"

namespace provrec {

struct EvaluationConfig {
  TrainConfig train;
  std::size_t k_folds = 10;
  std::uint64_t seed = 42;
  std::vector<double> thresholds;  // empty: every distinct held-out score
  bool stratified = true;
};

struct EvaluationReport {
  EvaluationConfig config;
  std::size_t n_entries = 0;
  CrossValidationResult cv;
  std::optional<BaselineResult> baseline;
  std::optional<ConfidenceComparison> confidence;

  double mean_fold_auc() const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& a : cv.per_fold_auc)
      if (a) {
        s += *a;
        ++n;
      }
    return n ? s / static_cast<double>(n) : 0.0;
  }
};

/// Cross validation plus, when a survey is given, the expert baseline on
/// the same matrix. The confidence comparison is included when both outcome
/// classes have voted pairs.
inline EvaluationReport evaluate(const UtilityMatrix& m, const EvaluationConfig& config,
                                 const ExpertSurvey* survey = nullptr, unsigned jobs = 1) {
  EvaluationReport report;
  report.config = config;
  report.n_entries = m.size();
  report.cv = cross_validate(m, config.train, config.k_folds, config.seed, config.thresholds, config.stratified, jobs);
  if (survey) {
    report.baseline = expert_roc(*survey, m);
    try {
      report.confidence = confidence_comparison(*survey, m);
    } catch (const DataError&) {
      report.confidence.reset();
    }
  }
  return report;
}

inline nlohmann::json report_to_json(const EvaluationReport& r, const nlohmann::json& run = nullptr) {
  nlohmann::json j;
  j["format"] = "provrec-evaluation";
  j["version"] = 1;
  auto thresholds = nlohmann::json::array();
  for (double t : r.config.thresholds) thresholds.push_back(threshold_to_json(t));
  j["config"] = {{"train", config_to_json(r.config.train)},
                 {"k_folds", r.config.k_folds},
                 {"seed", r.config.seed},
                 {"stratified", r.config.stratified},
                 {"thresholds", r.config.thresholds.empty() ? nlohmann::json("distinct-scores") : thresholds}};
  j["n_entries"] = r.n_entries;
  j["fold_assignments"] = r.cv.folds;
  std::vector<std::size_t> sizes(r.cv.k_folds, 0);
  for (auto f : r.cv.folds) ++sizes[f];
  j["fold_sizes"] = sizes;
  j["auc"] = r.cv.auc;
  auto per_fold = nlohmann::json::array();
  for (const auto& a : r.cv.per_fold_auc) per_fold.push_back(a ? nlohmann::json(*a) : nlohmann::json(nullptr));
  j["per_fold_auc"] = std::move(per_fold);
  j["mean_fold_auc"] = r.mean_fold_auc();
  j["cold_start_predictions"] = r.cv.cold_start_predictions;
  j["roc"] = roc_to_json(r.cv.roc);
  if (r.baseline) {
    j["baseline_auc"] = r.baseline->auc;
    j["baseline_pairs"] = r.baseline->scored.size();
    j["baseline_roc"] = roc_to_json(r.baseline->roc);
  }
  if (r.confidence) j["confidence_comparison"] = confidence_to_json(*r.confidence);
  if (!run.is_null()) j["run"] = run;
  return j;
}

/// `score,label,pipeline_id,dataset_id,fold,cold_start` for every held-out
/// prediction. The score and label columns can be fed back to roc_curve.
inline std::string format_held_out(const UtilityMatrix& m, const CrossValidationResult& cv,
                                   std::string_view comment = {}) {
  std::string out = csv::comment_block(comment);
  out += "score,label,pipeline_id,dataset_id,fold,cold_start\n";
  for (const auto& h : cv.held_out) {
    const auto& e = m.entries()[h.entry];
    out += format_score(h.score) + ',' + std::to_string(rating_value(h.label)) + ',' +
           csv::escape(m.pipelines()[e.pipeline]) + ',' + csv::escape(m.datasets()[e.dataset]) + ',' +
           std::to_string(h.fold) + ',' + (h.cold_start ? "true" : "false") + '\n';
  }
  return out;
}

}  // namespace provrec
