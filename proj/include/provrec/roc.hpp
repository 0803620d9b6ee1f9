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
#include <charconv>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "provrec/error.hpp"
#include "provrec/recommend.hpp"

namespace provrec {

/// A real-valued prediction and the outcome that actually happened.
struct ScoredExample {
  double score = 0.0;
  Outcome label = Outcome::failed;
};

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  bool operator==(const RocPoint&) const = default;
};

/// Every distinct score, plus -inf and +inf, in descending order. Sweeping
/// these yields the exact empirical ROC.
inline std::vector<double> distinct_score_thresholds(std::span<const ScoredExample> scored) {
  std::vector<double> t;
  t.reserve(scored.size() + 2);
  t.push_back(std::numeric_limits<double>::infinity());
  for (const auto& s : scored) t.push_back(s.score);
  t.push_back(-std::numeric_limits<double>::infinity());
  std::sort(t.begin(), t.end(), std::greater<>());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

/// One ROC point per threshold; an example is predicted positive when
/// classify(score, threshold) is success. Points are sorted by fpr, then
/// tpr, ascending.
inline std::vector<RocPoint> roc_curve(std::span<const ScoredExample> scored, std::span<const double> thresholds) {
  if (thresholds.empty()) throw InvalidArgument("roc_curve: no thresholds");
  std::vector<double> pos, neg;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) throw InvalidArgument("roc_curve: non-finite score");
    (s.label == Outcome::success ? pos : neg).push_back(s.score);
  }
  if (pos.empty()) throw InvalidArgument("roc_curve: no positive (rating 2) examples");
  if (neg.empty()) throw InvalidArgument("roc_curve: no negative (rating 1) examples");
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  auto at_or_above = [](const std::vector<double>& v, double t) {
    // matches classify(): score >= t
    return static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), t));
  };
  std::vector<RocPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    if (std::isnan(t)) throw InvalidArgument("roc_curve: NaN threshold");
    RocPoint p;
    p.threshold = t;
    p.tp = at_or_above(pos, t);
    p.fp = at_or_above(neg, t);
    p.fn = pos.size() - p.tp;
    p.tn = neg.size() - p.fp;
    p.tpr = static_cast<double>(p.tp) / static_cast<double>(pos.size());
    p.fpr = static_cast<double>(p.fp) / static_cast<double>(neg.size());
    points.push_back(p);
  }
  std::stable_sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
    if (a.fpr != b.fpr) return a.fpr < b.fpr;
    if (a.tpr != b.tpr) return a.tpr < b.tpr;
    return a.threshold > b.threshold;
  });
  return points;
}

inline std::vector<RocPoint> roc_curve(std::span<const ScoredExample> scored) {
  const auto t = distinct_score_thresholds(scored);
  return roc_curve(scored, t);
}

/// Trapezoidal area under the ROC points, after adding the (0,0) and (1,1)
/// corners when missing.
inline double auc(std::span<const RocPoint> points) {
  if (points.empty()) throw InvalidArgument("auc: no ROC points");
  std::vector<std::pair<double, double>> xy;
  xy.reserve(points.size() + 2);
  for (const auto& p : points) xy.emplace_back(p.fpr, p.tpr);
  if (std::find(xy.begin(), xy.end(), std::pair{0.0, 0.0}) == xy.end()) xy.emplace_back(0.0, 0.0);
  if (std::find(xy.begin(), xy.end(), std::pair{1.0, 1.0}) == xy.end()) xy.emplace_back(1.0, 1.0);
  if (xy.size() < 2) throw InvalidArgument("auc: fewer than two points");
  std::sort(xy.begin(), xy.end());
  double area = 0.0;
  for (std::size_t j = 1; j < xy.size(); ++j)
    area += (xy[j].first - xy[j - 1].first) * (xy[j].second + xy[j - 1].second) * 0.5;
  return area;
}

/// Infinite thresholds are written as the strings "inf" / "-inf".
inline nlohmann::json threshold_to_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

inline nlohmann::json roc_to_json(std::span<const RocPoint> points) {
  auto arr = nlohmann::json::array();
  for (const auto& p : points)
    arr.push_back({{"threshold", threshold_to_json(p.threshold)},
                   {"fpr", p.fpr},
                   {"tpr", p.tpr},
                   {"tp", p.tp},
                   {"fp", p.fp},
                   {"tn", p.tn},
                   {"fn", p.fn}});
  return arr;
}

/// `threshold,fpr,tpr,tp,fp,tn,fn`
inline std::string format_roc(std::span<const RocPoint> points, std::string_view comment = {}) {
  std::string out = csv::comment_block(comment);
  out += "threshold,fpr,tpr,tp,fp,tn,fn\n";
  for (const auto& p : points)
    out += format_score(p.threshold) + ',' + format_score(p.fpr) + ',' + format_score(p.tpr) + ',' +
           std::to_string(p.tp) + ',' + std::to_string(p.fp) + ',' + std::to_string(p.tn) + ',' +
           std::to_string(p.fn) + '\n';
  return out;
}

/// Reads `score,label` rows (label 1 or 2).
inline std::vector<ScoredExample> parse_scored(std::string_view text, std::string_view source = "scores") {
  auto table = csv::parse(text, source);
  if (table.header.size() < 2 || table.header[0] != "score" || table.header[1] != "label")
    throw ParseError(std::string(source) + ": header must start with 'score,label'");
  std::vector<ScoredExample> out;
  for (auto& [line, row] : table.rows) {
    auto where = std::string(source) + ":" + std::to_string(line) + ": ";
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(row[0].data(), row[0].data() + row[0].size(), score);
    if (ec != std::errc{} || ptr != row[0].data() + row[0].size() || !std::isfinite(score))
      throw ParseError(where + "bad score '" + row[0] + "'");
    if (row[1] != "1" && row[1] != "2") throw ParseError(where + "label must be 1 or 2");
    out.push_back({score, row[1] == "2" ? Outcome::success : Outcome::failed});
  }
  return out;
}

}  // namespace provrec
