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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "provrec/error.hpp"
#include "provrec/io.hpp"
#include "provrec/linalg.hpp"
#include "provrec/matrix.hpp"
#include "provrec/parallel.hpp"
#include "provrec/random.hpp"

namespace provrec {

struct TrainConfig {
  std::size_t rank = 8;
  double lambda = 0.1;
  std::size_t max_iterations = 20;
  double tolerance = 1e-4;  // relative objective decrease per iteration; 0 disables early stop
  std::uint64_t seed = 42;
  std::optional<double> init_scale;  // defaults to 1/sqrt(rank)
  bool weighted_lambda = false;      // scale lambda by each row's observation count

  double effective_init_scale() const {
    return init_scale ? *init_scale : 1.0 / std::sqrt(static_cast<double>(rank));
  }

  void validate() const {
    if (rank < 1) throw InvalidArgument("rank must be at least 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
    if (!(tolerance >= 0.0) || !std::isfinite(tolerance)) throw InvalidArgument("tolerance must be finite and >= 0");
    const double s = effective_init_scale();
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("init_scale must be finite and > 0");
  }

  bool operator==(const TrainConfig&) const = default;
};

inline nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"rank", c.rank},
          {"lambda", c.lambda},
          {"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance},
          {"seed", c.seed},
          {"init_scale", c.init_scale ? nlohmann::json(*c.init_scale) : nlohmann::json(nullptr)},
          {"weighted_lambda", c.weighted_lambda}};
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.rank = j.at("rank").get<std::size_t>();
  c.lambda = j.at("lambda").get<double>();
  c.max_iterations = j.at("max_iterations").get<std::size_t>();
  c.tolerance = j.at("tolerance").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("init_scale").is_null()) c.init_scale = j["init_scale"].get<double>();
  c.weighted_lambda = j.at("weighted_lambda").get<bool>();
  return c;
}

/// Latent-factor model: row u of `p` is pipeline u's factor vector, row i
/// of `q` is dataset i's. Rows that had no observations at training time
/// keep their initial values; predictions for them fall back to
/// `global_mean`.
struct FactorModel {
  DenseMatrix p;
  DenseMatrix q;
  std::size_t rank = 0;
  double lambda = 0.0;
  bool weighted_lambda = false;
  double global_mean = 0.0;
  std::vector<std::string> pipelines;
  std::vector<std::string> datasets;
  std::vector<std::size_t> pipeline_observations;
  std::vector<std::size_t> dataset_observations;
  TrainConfig config;
  std::vector<double> trace;  // objective at start, then after every half-sweep
  std::size_t iterations = 0;

  bool cold_pipeline(std::size_t u) const { return pipeline_observations[u] == 0; }
  bool cold_dataset(std::size_t i) const { return dataset_observations[i] == 0; }

  bool operator==(const FactorModel&) const = default;
};

namespace als {

/// Observed ratings grouped by row and by column.
struct Observations {
  std::vector<std::vector<std::pair<std::size_t, double>>> by_pipeline;
  std::vector<std::vector<std::pair<std::size_t, double>>> by_dataset;
};

inline Observations index_observations(const UtilityMatrix& m) {
  Observations obs;
  obs.by_pipeline.resize(m.n_pipelines());
  obs.by_dataset.resize(m.n_datasets());
  for (const auto& e : m.entries()) {
    const double r = rating_value(e.rating);
    obs.by_pipeline[e.pipeline].emplace_back(e.dataset, r);
    obs.by_dataset[e.dataset].emplace_back(e.pipeline, r);
  }
  return obs;
}

/// One half-sweep: with `fixed` held constant, replaces every observed row
/// of `solved` by its ridge solution. Rows without observations are left
/// untouched.
inline void update_rows(DenseMatrix& solved, const DenseMatrix& fixed,
                        const std::vector<std::vector<std::pair<std::size_t, double>>>& lists, double lambda,
                        bool weighted, unsigned jobs) {
  const std::size_t k = solved.cols();
  parallel_for(solved.rows(), jobs, [&](std::size_t r) {
    const auto& list = lists[r];
    if (list.empty()) return;
    std::vector<std::span<const double>> design;
    std::vector<double> target;
    design.reserve(list.size());
    target.reserve(list.size());
    for (const auto& [c, rating] : list) {
      design.push_back(fixed.row(c));
      target.push_back(rating);
    }
    const double reg = weighted ? lambda * static_cast<double>(list.size()) : lambda;
    auto x = ridge_solve(design, target, reg, k);
    std::copy(x.begin(), x.end(), solved.row(r).begin());
  });
}

}  // namespace als

/// Regularized squared error over the observed set. Every factor row is
/// penalized once (scaled by its observation count when `weighted`).
inline double objective(const DenseMatrix& p, const DenseMatrix& q, const UtilityMatrix& m, double lambda,
                        bool weighted = false) {
  if (p.rows() != m.n_pipelines() || q.rows() != m.n_datasets() || p.cols() != q.cols())
    throw DataError("objective: factor dimensions do not match the matrix");
  double loss = 0.0;
  std::vector<std::size_t> n_p(p.rows(), 0), n_q(q.rows(), 0);
  for (const auto& e : m.entries()) {
    const double err = rating_value(e.rating) - dot(q.row(e.dataset), p.row(e.pipeline));
    loss += err * err;
    ++n_p[e.pipeline];
    ++n_q[e.dataset];
  }
  double reg = 0.0;
  for (std::size_t u = 0; u < p.rows(); ++u) reg += (weighted ? n_p[u] : 1.0) * squared_norm(p.row(u));
  for (std::size_t i = 0; i < q.rows(); ++i) reg += (weighted ? n_q[i] : 1.0) * squared_norm(q.row(i));
  return loss + lambda * reg;
}

namespace detail {
inline void check_aligned(const FactorModel& model, const UtilityMatrix& m) {
  if (model.pipelines != m.pipelines() || model.datasets != m.datasets())
    throw DataError("model and matrix index maps differ");
}
}  // namespace detail

inline double objective(const FactorModel& model, const UtilityMatrix& m) {
  detail::check_aligned(model, m);
  return objective(model.p, model.q, m, model.lambda, model.weighted_lambda);
}

/// Analytic gradient of the objective with respect to p_u:
/// 2 (lambda_u p_u - sum_i (r_ui - q_i.p_u) q_i).
inline std::vector<double> gradient_pipeline(const FactorModel& model, const UtilityMatrix& m, std::size_t u) {
  detail::check_aligned(model, m);
  const std::size_t k = model.rank;
  std::vector<double> g(k, 0.0);
  std::size_t n = 0;
  for (const auto& e : m.entries()) {
    if (e.pipeline != u) continue;
    ++n;
    const auto qi = model.q.row(e.dataset);
    const double err = rating_value(e.rating) - dot(qi, model.p.row(u));
    for (std::size_t j = 0; j < k; ++j) g[j] -= err * qi[j];
  }
  const double reg = model.weighted_lambda ? model.lambda * static_cast<double>(n) : model.lambda;
  for (std::size_t j = 0; j < k; ++j) g[j] = 2.0 * (g[j] + reg * model.p(u, j));
  return g;
}

/// Analytic gradient of the objective with respect to q_i.
inline std::vector<double> gradient_dataset(const FactorModel& model, const UtilityMatrix& m, std::size_t i) {
  detail::check_aligned(model, m);
  const std::size_t k = model.rank;
  std::vector<double> g(k, 0.0);
  std::size_t n = 0;
  for (const auto& e : m.entries()) {
    if (e.dataset != i) continue;
    ++n;
    const auto pu = model.p.row(e.pipeline);
    const double err = rating_value(e.rating) - dot(model.q.row(i), pu);
    for (std::size_t j = 0; j < k; ++j) g[j] -= err * pu[j];
  }
  const double reg = model.weighted_lambda ? model.lambda * static_cast<double>(n) : model.lambda;
  for (std::size_t j = 0; j < k; ++j) g[j] = 2.0 * (g[j] + reg * model.q(i, j));
  return g;
}

/// Seeded initial factors, uniform on [0, init_scale): all of p row by row,
/// then all of q.
inline FactorModel initial_model(const UtilityMatrix& m, const TrainConfig& config) {
  config.validate();
  FactorModel model;
  model.rank = config.rank;
  model.lambda = config.lambda;
  model.weighted_lambda = config.weighted_lambda;
  model.config = config;
  model.pipelines = m.pipelines();
  model.datasets = m.datasets();
  model.p = DenseMatrix(m.n_pipelines(), config.rank);
  model.q = DenseMatrix(m.n_datasets(), config.rank);
  std::mt19937_64 gen(config.seed);
  const double scale = config.effective_init_scale();
  auto draw = [&] { return uniform01(gen) * scale; };
  for (std::size_t u = 0; u < model.p.rows(); ++u)
    for (auto& v : model.p.row(u)) v = draw();
  for (std::size_t i = 0; i < model.q.rows(); ++i)
    for (auto& v : model.q.row(i)) v = draw();
  model.pipeline_observations.assign(m.n_pipelines(), 0);
  model.dataset_observations.assign(m.n_datasets(), 0);
  for (const auto& e : m.entries()) {
    ++model.pipeline_observations[e.pipeline];
    ++model.dataset_observations[e.dataset];
  }
  model.global_mean = m.mean_rating();
  return model;
}

/// Alternating least squares. Each iteration solves every observed p_u with
/// q fixed, then every observed q_i with p fixed. Stops after
/// max_iterations or once an iteration's relative objective decrease falls
/// below the tolerance.
/// Row solves within a half-sweep run on up to `jobs` threads; the result
/// does not depend on `jobs`.
inline FactorModel als_fit(const UtilityMatrix& m, const TrainConfig& config, unsigned jobs = 1) {
  if (m.empty()) throw InvalidArgument("cannot fit a matrix with no observed entries");
  auto model = initial_model(m, config);
  const auto obs = als::index_observations(m);
  auto current = objective(model.p, model.q, m, config.lambda, config.weighted_lambda);
  model.trace.push_back(current);
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    const double start = current;
    als::update_rows(model.p, model.q, obs.by_pipeline, config.lambda, config.weighted_lambda, jobs);
    model.trace.push_back(objective(model.p, model.q, m, config.lambda, config.weighted_lambda));
    als::update_rows(model.q, model.p, obs.by_dataset, config.lambda, config.weighted_lambda, jobs);
    current = objective(model.p, model.q, m, config.lambda, config.weighted_lambda);
    model.trace.push_back(current);
    model.iterations = it;
    if (!std::isfinite(current)) throw NumericError("objective diverged to a non-finite value");
    if (config.tolerance > 0.0 && (start <= 0.0 || (start - current) / start < config.tolerance)) break;
  }
  return model;
}

struct Prediction {
  double score = 0.0;
  bool cold_start = false;
};

inline Prediction predict_raw(const FactorModel& model, std::size_t u, std::size_t i) {
  if (u >= model.pipelines.size() || i >= model.datasets.size())
    throw InvalidArgument("predict_raw: index out of range");
  if (model.cold_pipeline(u) || model.cold_dataset(i)) return {model.global_mean, true};
  return {dot(model.q.row(i), model.p.row(u)), false};
}

inline std::size_t pipeline_row(const FactorModel& model, std::string_view id) {
  for (std::size_t u = 0; u < model.pipelines.size(); ++u)
    if (model.pipelines[u] == id) return u;
  throw UnknownId("unknown pipeline '" + std::string(id) + "'");
}

inline std::size_t dataset_column(const FactorModel& model, std::string_view id) {
  for (std::size_t i = 0; i < model.datasets.size(); ++i)
    if (model.datasets[i] == id) return i;
  throw UnknownId("unknown dataset '" + std::string(id) + "'");
}

inline Prediction predict(const FactorModel& model, std::string_view pipeline_id, std::string_view dataset_id) {
  return predict_raw(model, pipeline_row(model, pipeline_id), dataset_column(model, dataset_id));
}

// Model file: one JSON header line, then one line per factor row,
// "p <u> v..." or "q <i> v...", values printed with 17 significant digits.

inline std::string format_model(const FactorModel& model, const nlohmann::json& run = nullptr) {
  nlohmann::json h;
  h["format"] = "provrec-model";
  h["version"] = 1;
  h["k"] = model.rank;
  h["lambda"] = model.lambda;
  h["weighted_lambda"] = model.weighted_lambda;
  h["global_mean"] = model.global_mean;
  h["pipelines"] = model.pipelines;
  h["datasets"] = model.datasets;
  h["pipeline_observations"] = model.pipeline_observations;
  h["dataset_observations"] = model.dataset_observations;
  h["config"] = config_to_json(model.config);
  h["iterations"] = model.iterations;
  h["trace"] = model.trace;
  if (!run.is_null()) h["run"] = run;
  std::string out = h.dump() + "\n";
  char buf[32];
  auto emit = [&](char tag, const DenseMatrix& f) {
    for (std::size_t r = 0; r < f.rows(); ++r) {
      out += tag;
      out += ' ';
      out += std::to_string(r);
      for (double v : f.row(r)) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        out += buf;
      }
      out += '\n';
    }
  };
  emit('p', model.p);
  emit('q', model.q);
  return out;
}

inline FactorModel parse_model(std::string_view text, std::string_view source = "model") {
  auto fail = [&](const std::string& why) { return ParseError(std::string(source) + ": " + why); };
  auto lines = io::split_lines(text);
  if (lines.empty()) throw fail("empty model file");
  auto h = nlohmann::json::parse(lines[0], nullptr, false);
  if (h.is_discarded() || !h.is_object() || h.value("format", "") != "provrec-model")
    throw fail("missing provrec-model header");
  FactorModel model;
  try {
    model.rank = h.at("k").get<std::size_t>();
    model.lambda = h.at("lambda").get<double>();
    model.weighted_lambda = h.at("weighted_lambda").get<bool>();
    model.global_mean = h.at("global_mean").get<double>();
    model.pipelines = h.at("pipelines").get<std::vector<std::string>>();
    model.datasets = h.at("datasets").get<std::vector<std::string>>();
    model.pipeline_observations = h.at("pipeline_observations").get<std::vector<std::size_t>>();
    model.dataset_observations = h.at("dataset_observations").get<std::vector<std::size_t>>();
    model.config = config_from_json(h.at("config"));
    model.iterations = h.at("iterations").get<std::size_t>();
    model.trace = h.at("trace").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed header: ") + e.what());
  }
  if (model.rank < 1) throw fail("k must be at least 1");
  if (model.pipeline_observations.size() != model.pipelines.size() ||
      model.dataset_observations.size() != model.datasets.size())
    throw fail("observation counts do not match index maps");
  model.p = DenseMatrix(model.pipelines.size(), model.rank);
  model.q = DenseMatrix(model.datasets.size(), model.rank);
  std::vector<bool> seen_p(model.p.rows(), false), seen_q(model.q.rows(), false);

  for (std::size_t n = 1; n < lines.size(); ++n) {
    auto line = lines[n];
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(n + 1) + ": ";
    if (line.size() < 3 || (line[0] != 'p' && line[0] != 'q') || line[1] != ' ') throw fail(where + "bad factor row");
    auto& f = line[0] == 'p' ? model.p : model.q;
    auto& seen = line[0] == 'p' ? seen_p : seen_q;
    const char* cur = line.data() + 2;
    const char* end = line.data() + line.size();
    std::size_t r = 0;
    auto [ptr, ec] = std::from_chars(cur, end, r);
    if (ec != std::errc{} || r >= f.rows() || seen[r]) throw fail(where + "bad or repeated row index");
    seen[r] = true;
    cur = ptr;
    for (std::size_t j = 0; j < model.rank; ++j) {
      if (cur == end || *cur != ' ') throw fail(where + "too few values");
      ++cur;
      double v = 0.0;
      auto [p2, ec2] = std::from_chars(cur, end, v);
      if (ec2 != std::errc{} || !std::isfinite(v)) throw fail(where + "bad factor value");
      f(r, j) = v;
      cur = p2;
    }
    if (cur != end) throw fail(where + "too many values");
  }
  for (bool s : seen_p)
    if (!s) throw fail("missing p rows");
  for (bool s : seen_q)
    if (!s) throw fail("missing q rows");
  return model;
}

inline void save_model(const std::filesystem::path& path, const FactorModel& model,
                       const nlohmann::json& run = nullptr) {
  io::write_file_atomic(path, format_model(model, run));
}

inline FactorModel load_model(const std::filesystem::path& path) {
  return parse_model(io::read_file(path), path.string());
}

}  // namespace provrec
