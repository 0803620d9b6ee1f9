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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "provrec/csv.hpp"
#include "provrec/error.hpp"
#include "provrec/io.hpp"
#include "provrec/provenance.hpp"

namespace provrec {

struct MatrixEntry {
  std::size_t pipeline = 0;  // row u
  std::size_t dataset = 0;   // column i
  Outcome rating = Outcome::failed;

  bool operator==(const MatrixEntry&) const = default;
};

/// Sparse pipeline x dataset matrix of observed ratings. Row and column
/// order is fixed at construction; entries keep the order in which their
/// (pipeline, dataset) pair was first seen.
class UtilityMatrix {
 public:
  UtilityMatrix() = default;

  UtilityMatrix(std::vector<std::string> pipelines, std::vector<std::string> datasets,
                std::vector<MatrixEntry> entries)
      : pipelines_(std::move(pipelines)), datasets_(std::move(datasets)), entries_(std::move(entries)) {
    for (std::size_t u = 0; u < pipelines_.size(); ++u)
      if (!pipeline_index_.try_emplace(pipelines_[u], u).second)
        throw InvalidArgument("duplicate pipeline id '" + pipelines_[u] + "'");
    for (std::size_t i = 0; i < datasets_.size(); ++i)
      if (!dataset_index_.try_emplace(datasets_[i], i).second)
        throw InvalidArgument("duplicate dataset id '" + datasets_[i] + "'");
    for (std::size_t e = 0; e < entries_.size(); ++e) {
      const auto& entry = entries_[e];
      if (entry.pipeline >= pipelines_.size() || entry.dataset >= datasets_.size())
        throw InvalidArgument("matrix entry index out of range");
      if (entry.rating != Outcome::failed && entry.rating != Outcome::success)
        throw InvalidArgument("matrix rating must be 1 or 2");
      if (!cell_.try_emplace(key(entry.pipeline, entry.dataset), e).second)
        throw InvalidArgument("duplicate entry for (" + pipelines_[entry.pipeline] + ", " +
                              datasets_[entry.dataset] + ")");
    }
  }

  const std::vector<std::string>& pipelines() const { return pipelines_; }
  const std::vector<std::string>& datasets() const { return datasets_; }
  const std::vector<MatrixEntry>& entries() const { return entries_; }
  std::size_t n_pipelines() const { return pipelines_.size(); }
  std::size_t n_datasets() const { return datasets_.size(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::optional<std::size_t> pipeline_index(std::string_view id) const {
    auto it = pipeline_index_.find(std::string(id));
    if (it == pipeline_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> dataset_index(std::string_view id) const {
    auto it = dataset_index_.find(std::string(id));
    if (it == dataset_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<Outcome> rating(std::size_t u, std::size_t i) const {
    auto it = cell_.find(key(u, i));
    if (it == cell_.end()) return std::nullopt;
    return entries_[it->second].rating;
  }

  /// Mean of observed ratings; 0 for an empty matrix.
  double mean_rating() const {
    if (entries_.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : entries_) sum += rating_value(e.rating);
    return sum / static_cast<double>(entries_.size());
  }

  /// Same index maps, different observed set. Used to carve training folds.
  UtilityMatrix with_entries(std::vector<MatrixEntry> entries) const {
    return UtilityMatrix(pipelines_, datasets_, std::move(entries));
  }

  std::vector<ExecutionTriplet> to_triplets() const {
    std::vector<ExecutionTriplet> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back({pipelines_[e.pipeline], datasets_[e.dataset], e.rating, {}});
    return out;
  }

  bool operator==(const UtilityMatrix& o) const {
    return pipelines_ == o.pipelines_ && datasets_ == o.datasets_ && entries_ == o.entries_;
  }

 private:
  static std::uint64_t key(std::size_t u, std::size_t i) {
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(i);
  }

  std::vector<std::string> pipelines_;
  std::vector<std::string> datasets_;
  std::vector<MatrixEntry> entries_;
  std::unordered_map<std::string, std::size_t> pipeline_index_;
  std::unordered_map<std::string, std::size_t> dataset_index_;
  std::unordered_map<std::uint64_t, std::size_t> cell_;
};

/// How repeated executions of the same (pipeline, dataset) pair combine.
enum class ConflictPolicy {
  any_success,       // 2 if any execution succeeded
  majority,          // most frequent outcome; a tie counts as failure
  latest_timestamp,  // outcome of the most recent execution
};

inline std::optional<ConflictPolicy> parse_conflict_policy(std::string_view s) {
  if (s == "any-success") return ConflictPolicy::any_success;
  if (s == "majority") return ConflictPolicy::majority;
  if (s == "latest-timestamp") return ConflictPolicy::latest_timestamp;
  return std::nullopt;
}

inline UtilityMatrix aggregate(std::span<const ExecutionTriplet> triplets,
                               ConflictPolicy policy = ConflictPolicy::any_success) {
  struct Cell {
    std::size_t u, i;
    std::size_t successes = 0, failures = 0;
    Outcome latest = Outcome::failed;
    std::optional<Timestamp> latest_time;
  };
  std::vector<std::string> pipelines, datasets;
  std::unordered_map<std::string, std::size_t> p_index, d_index;
  std::vector<Cell> cells;
  std::unordered_map<std::uint64_t, std::size_t> cell_index;

  for (const auto& t : triplets) {
    auto [pit, p_new] = p_index.try_emplace(t.pipeline_id, pipelines.size());
    if (p_new) pipelines.push_back(t.pipeline_id);
    auto [dit, d_new] = d_index.try_emplace(t.dataset_id, datasets.size());
    if (d_new) datasets.push_back(t.dataset_id);
    const auto u = pit->second, i = dit->second;
    if (policy == ConflictPolicy::latest_timestamp && !t.timestamp)
      throw DataError("latest-timestamp policy: missing timestamp for pair (" + t.pipeline_id + ", " +
                      t.dataset_id + ")");
    auto k = (static_cast<std::uint64_t>(u) << 32) | i;
    auto [cit, c_new] = cell_index.try_emplace(k, cells.size());
    if (c_new) cells.push_back({u, i, 0, 0, Outcome::failed, std::nullopt});
    auto& cell = cells[cit->second];
    (t.outcome == Outcome::success ? cell.successes : cell.failures) += 1;
    // Equal timestamps: the later triplet in the stream wins.
    if (t.timestamp && (!cell.latest_time || *t.timestamp >= *cell.latest_time)) {
      cell.latest_time = t.timestamp;
      cell.latest = t.outcome;
    }
  }

  std::vector<MatrixEntry> entries;
  entries.reserve(cells.size());
  for (const auto& c : cells) {
    Outcome r = Outcome::failed;
    switch (policy) {
      case ConflictPolicy::any_success:
        r = c.successes > 0 ? Outcome::success : Outcome::failed;
        break;
      case ConflictPolicy::majority:
        r = c.successes > c.failures ? Outcome::success : Outcome::failed;
        break;
      case ConflictPolicy::latest_timestamp:
        r = c.latest;
        break;
    }
    entries.push_back({c.u, c.i, r});
  }
  return UtilityMatrix(std::move(pipelines), std::move(datasets), std::move(entries));
}

/// Fraction of observed cells.
inline double density(const UtilityMatrix& m) {
  if (m.n_pipelines() == 0 || m.n_datasets() == 0) throw InvalidArgument("density of a zero-dimension matrix");
  return static_cast<double>(m.size()) /
         (static_cast<double>(m.n_pipelines()) * static_cast<double>(m.n_datasets()));
}

/// `pipeline_id,dataset_id,rating` rows in entry order.
inline std::string format_matrix(const UtilityMatrix& m, std::string_view comment = {}) {
  std::string out = csv::comment_block(comment);
  out += "pipeline_id,dataset_id,rating\n";
  for (const auto& e : m.entries()) {
    out += csv::escape(m.pipelines()[e.pipeline]);
    out += ',';
    out += csv::escape(m.datasets()[e.dataset]);
    out += ',';
    out += std::to_string(rating_value(e.rating));
    out += '\n';
  }
  return out;
}

/// Sidecar header: dimensions and index order.
inline std::string format_matrix_header(const UtilityMatrix& m, const nlohmann::json& run = nullptr) {
  nlohmann::json j;
  j["format"] = "provrec-matrix";
  j["version"] = 1;
  j["n_pipelines"] = m.n_pipelines();
  j["n_datasets"] = m.n_datasets();
  j["n_entries"] = m.size();
  j["pipelines"] = m.pipelines();
  j["datasets"] = m.datasets();
  if (!run.is_null()) j["run"] = run;
  return j.dump(2) + "\n";
}

inline std::filesystem::path matrix_header_path(const std::filesystem::path& matrix_path) {
  auto p = matrix_path;
  p += ".meta.json";
  return p;
}

/// Rebuilds a matrix from its delimited rows and optional sidecar header.
/// Without a header, index order is first appearance in the rows. With one,
/// its order is authoritative and may list ids that have no entries.
inline UtilityMatrix parse_matrix(std::string_view rows_text, std::optional<std::string_view> header_text,
                                  ConflictPolicy policy = ConflictPolicy::any_success,
                                  std::string_view source = "matrix") {
  auto triplets = parse_triplets(rows_text, source);
  auto observed = aggregate(triplets, policy);
  if (!header_text) return observed;

  auto h = nlohmann::json::parse(*header_text, nullptr, false);
  if (h.is_discarded() || !h.is_object() || h.value("format", "") != "provrec-matrix")
    throw ParseError(std::string(source) + ": malformed matrix header");
  std::vector<std::string> pipelines, datasets;
  try {
    pipelines = h.at("pipelines").get<std::vector<std::string>>();
    datasets = h.at("datasets").get<std::vector<std::string>>();
    if (h.at("n_pipelines").get<std::size_t>() != pipelines.size() ||
        h.at("n_datasets").get<std::size_t>() != datasets.size())
      throw ParseError(std::string(source) + ": header dimensions disagree with index lists");
    if (h.contains("n_entries") && h["n_entries"].get<std::size_t>() != observed.size())
      throw ParseError(std::string(source) + ": header lists " + h["n_entries"].dump() + " entries, rows hold " +
                       std::to_string(observed.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(source) + ": malformed matrix header: " + e.what());
  }
  std::unordered_map<std::string, std::size_t> p_index, d_index;
  for (std::size_t u = 0; u < pipelines.size(); ++u) p_index.emplace(pipelines[u], u);
  for (std::size_t i = 0; i < datasets.size(); ++i) d_index.emplace(datasets[i], i);
  std::vector<MatrixEntry> entries;
  entries.reserve(observed.size());
  for (const auto& e : observed.entries()) {
    auto pit = p_index.find(observed.pipelines()[e.pipeline]);
    auto dit = d_index.find(observed.datasets()[e.dataset]);
    if (pit == p_index.end() || dit == d_index.end())
      throw ParseError(std::string(source) + ": row references an id missing from the header");
    entries.push_back({pit->second, dit->second, e.rating});
  }
  try {
    return UtilityMatrix(std::move(pipelines), std::move(datasets), std::move(entries));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
}

inline UtilityMatrix load_matrix(const std::filesystem::path& path,
                                 ConflictPolicy policy = ConflictPolicy::any_success) {
  auto rows = io::read_file(path);
  auto header_path = matrix_header_path(path);
  if (std::filesystem::exists(header_path)) {
    auto header = io::read_file(header_path);
    return parse_matrix(rows, std::string_view(header), policy, path.string());
  }
  return parse_matrix(rows, std::nullopt, policy, path.string());
}

inline void save_matrix(const std::filesystem::path& path, const UtilityMatrix& m, const nlohmann::json& run = nullptr,
                        std::string_view comment = {}) {
  io::write_file_atomic(path, format_matrix(m, comment));
  io::write_file_atomic(matrix_header_path(path), format_matrix_header(m, run));
}

}  // namespace provrec
