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
#include <istream>
#include <iterator>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "provrec/csv.hpp"
#include "provrec/error.hpp"
#include "provrec/io.hpp"
#include "provrec/timestamp.hpp"

namespace provrec {

/// Execution outcome on the rating scale used throughout: 1 = failed,
/// 2 = successful.
enum class Outcome : int { failed = 1, success = 2 };

constexpr int rating_value(Outcome o) { return static_cast<int>(o); }

constexpr std::optional<Outcome> outcome_from_rating(long long r) {
  if (r == 1) return Outcome::failed;
  if (r == 2) return Outcome::success;
  return std::nullopt;
}

/// Exit status 0 is success; anything else is a failure.
constexpr Outcome outcome_from_exit_code(std::int64_t exit_code) {
  return exit_code == 0 ? Outcome::success : Outcome::failed;
}

struct ProvenanceRecord {
  std::string record_id;
  std::string pipeline_id;
  std::set<std::string> input_hashes;
  std::set<std::string> output_hashes;
  std::int64_t exit_code = 0;
  std::optional<Timestamp> timestamp;
  std::optional<std::string> parameters_digest;
};

struct DatasetManifest {
  std::string dataset_id;
  std::set<std::string> hashes;

  std::size_t file_count() const { return hashes.size(); }
};

struct ExecutionTriplet {
  std::string pipeline_id;
  std::string dataset_id;
  Outcome outcome = Outcome::failed;
  std::optional<Timestamp> timestamp;

  bool operator==(const ExecutionTriplet&) const = default;
};

struct RecordRejection {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct RecordParseResult {
  std::vector<ProvenanceRecord> records;
  std::vector<RecordRejection> rejected;
};

namespace detail {

inline std::optional<std::string> read_hash_set(const nlohmann::json& obj, const char* key,
                                                std::set<std::string>& out) {
  const auto& arr = obj.at(key);
  if (!arr.is_array()) return std::string(key) + " is not an array";
  for (const auto& h : arr) {
    if (!h.is_string() || h.get_ref<const std::string&>().empty())
      return std::string(key) + " contains a non-string or empty entry";
    out.insert(h.get<std::string>());
  }
  return std::nullopt;
}

// Returns the rejection reason, or nullopt when `rec` was filled in.
inline std::optional<std::string> record_from_json(const nlohmann::json& j, std::size_t line,
                                                   ProvenanceRecord& rec) {
  if (!j.is_object()) return "line is not a JSON object";

  if (!j.contains("pipeline_id")) return "missing pipeline_id";
  if (!j["pipeline_id"].is_string() || j["pipeline_id"].get_ref<const std::string&>().empty())
    return "pipeline_id must be a nonempty string";
  rec.pipeline_id = j["pipeline_id"].get<std::string>();

  if (!j.contains("exit_code")) return "missing exit_code";
  if (!j["exit_code"].is_number_integer()) return "exit_code must be an integer";
  if (j["exit_code"].is_number_unsigned() &&
      j["exit_code"].get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    return "exit_code out of range";
  rec.exit_code = j["exit_code"].get<std::int64_t>();

  if (!j.contains("input_hashes")) return "missing input_hashes";
  if (auto err = read_hash_set(j, "input_hashes", rec.input_hashes)) return err;
  if (rec.input_hashes.empty()) return "input_hashes is empty";

  if (j.contains("output_hashes") && !j["output_hashes"].is_null())
    if (auto err = read_hash_set(j, "output_hashes", rec.output_hashes)) return err;

  if (j.contains("record_id") && !j["record_id"].is_null()) {
    if (!j["record_id"].is_string()) return "record_id must be a string";
    rec.record_id = j["record_id"].get<std::string>();
  } else {
    rec.record_id = "line-" + std::to_string(line);
  }

  if (j.contains("timestamp") && !j["timestamp"].is_null()) {
    if (!j["timestamp"].is_string()) return "timestamp must be a string";
    auto ts = parse_timestamp(j["timestamp"].get<std::string>());
    if (!ts) return "timestamp is not an ISO-8601 UTC instant";
    rec.timestamp = *ts;
  }

  if (j.contains("parameters_digest") && !j["parameters_digest"].is_null()) {
    if (!j["parameters_digest"].is_string()) return "parameters_digest must be a string";
    rec.parameters_digest = j["parameters_digest"].get<std::string>();
  }
  return std::nullopt;
}

}  // namespace detail

/// Parses line-delimited JSON provenance records. Malformed lines are
/// collected in `rejected` with their line number; blank lines are ignored.
inline RecordParseResult parse_records(std::string_view text) {
  RecordParseResult result;
  auto lines = io::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    auto line = lines[n];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      result.rejected.push_back({n + 1, "invalid JSON"});
      continue;
    }
    ProvenanceRecord rec;
    if (auto reason = detail::record_from_json(j, n + 1, rec))
      result.rejected.push_back({n + 1, std::move(*reason)});
    else
      result.records.push_back(std::move(rec));
  }
  return result;
}

inline RecordParseResult parse_records(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("error while reading provenance records");
  return parse_records(std::string_view(text));
}

inline nlohmann::json record_to_json(const ProvenanceRecord& rec) {
  nlohmann::json j;
  j["record_id"] = rec.record_id;
  j["pipeline_id"] = rec.pipeline_id;
  j["input_hashes"] = rec.input_hashes;
  j["output_hashes"] = rec.output_hashes;
  j["exit_code"] = rec.exit_code;
  if (rec.timestamp) j["timestamp"] = format_timestamp(*rec.timestamp);
  if (rec.parameters_digest) j["parameters_digest"] = *rec.parameters_digest;
  return j;
}

/// Parses a `dataset_id,hash` manifest table into one manifest per dataset,
/// in order of first appearance. Repeated hashes collapse.
inline std::vector<DatasetManifest> parse_manifests(std::string_view text,
                                                    std::string_view source = "manifests") {
  auto table = csv::parse(text, source);
  if (table.header != std::vector<std::string>{"dataset_id", "hash"})
    throw ParseError(std::string(source) + ": header must be 'dataset_id,hash'");
  std::vector<DatasetManifest> manifests;
  std::unordered_map<std::string, std::size_t> index;
  for (auto& [line, row] : table.rows) {
    if (row[0].empty() || row[1].empty())
      throw ParseError(std::string(source) + ":" + std::to_string(line) + ": empty dataset_id or hash");
    auto [it, inserted] = index.try_emplace(row[0], manifests.size());
    if (inserted) manifests.push_back({row[0], {}});
    manifests[it->second].hashes.insert(row[1]);
  }
  return manifests;
}

/// Result of matching one record against the manifest collection.
/// `dataset_ids` is empty when the record is unattributable, has one
/// element for a unique match, and several (sorted) on a tie.
struct Attribution {
  std::vector<std::string> dataset_ids;
  std::size_t overlap = 0;

  bool attributable() const { return !dataset_ids.empty(); }
  bool tied() const { return dataset_ids.size() > 1; }
};

/// Inverted hash index over a manifest collection.
class ManifestIndex {
 public:
  explicit ManifestIndex(std::span<const DatasetManifest> manifests) : manifests_(manifests) {
    std::unordered_set<std::string_view> seen;
    for (std::size_t m = 0; m < manifests.size(); ++m) {
      if (manifests[m].hashes.empty())
        throw InvalidArgument("manifest '" + manifests[m].dataset_id + "' has no hashes");
      if (!seen.insert(manifests[m].dataset_id).second)
        throw InvalidArgument("duplicate dataset_id '" + manifests[m].dataset_id + "' in manifests");
      for (const auto& h : manifests[m].hashes) by_hash_[h].push_back(m);
    }
  }

  std::size_t size() const { return manifests_.size(); }

  Attribution attribute(const ProvenanceRecord& record) const {
    std::unordered_map<std::size_t, std::size_t> counts;
    for (const auto& h : record.input_hashes) {
      auto it = by_hash_.find(h);
      if (it == by_hash_.end()) continue;
      for (auto m : it->second) ++counts[m];
    }
    Attribution result;
    for (const auto& [m, c] : counts) {
      if (c > result.overlap) {
        result.overlap = c;
        result.dataset_ids.assign(1, manifests_[m].dataset_id);
      } else if (c == result.overlap) {
        result.dataset_ids.push_back(manifests_[m].dataset_id);
      }
    }
    std::sort(result.dataset_ids.begin(), result.dataset_ids.end());
    return result;
  }

 private:
  std::span<const DatasetManifest> manifests_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_hash_;
};

/// Attributes a record to the dataset(s) sharing the most input hashes.
inline Attribution attribute_dataset(const ProvenanceRecord& record,
                                     std::span<const DatasetManifest> manifests) {
  if (manifests.empty()) throw InvalidArgument("attribute_dataset requires at least one manifest");
  return ManifestIndex(manifests).attribute(record);
}

enum class TiePolicy { emit_all, emit_none };

struct TiedRecord {
  std::string record_id;
  std::vector<std::string> dataset_ids;
  std::size_t overlap = 0;
};

struct AttributionReport {
  std::size_t records = 0;
  std::size_t attributed = 0;  // emitted (record, dataset) pairs == triplet count
  std::size_t unattributable = 0;
  std::size_t tied = 0;  // records whose best overlap was shared
  std::size_t rejected = 0;
  std::vector<std::string> unattributable_ids;
  std::vector<TiedRecord> ties;
  std::vector<RecordRejection> rejections;
};

struct TripletBatch {
  std::vector<ExecutionTriplet> triplets;
  AttributionReport report;
};

inline TripletBatch to_triplets(std::span<const ProvenanceRecord> records,
                                std::span<const DatasetManifest> manifests,
                                TiePolicy policy = TiePolicy::emit_all) {
  TripletBatch batch;
  auto& report = batch.report;
  report.records = records.size();
  if (manifests.empty()) {
    report.unattributable = records.size();
    for (const auto& r : records) report.unattributable_ids.push_back(r.record_id);
    return batch;
  }
  ManifestIndex index(manifests);
  for (const auto& rec : records) {
    auto attribution = index.attribute(rec);
    if (!attribution.attributable()) {
      ++report.unattributable;
      report.unattributable_ids.push_back(rec.record_id);
      continue;
    }
    if (attribution.tied()) {
      ++report.tied;
      report.ties.push_back({rec.record_id, attribution.dataset_ids, attribution.overlap});
      if (policy == TiePolicy::emit_none) continue;
    }
    for (auto& d : attribution.dataset_ids) {
      batch.triplets.push_back({rec.pipeline_id, d, outcome_from_exit_code(rec.exit_code), rec.timestamp});
      ++report.attributed;
    }
  }
  return batch;
}

inline nlohmann::json report_to_json(const AttributionReport& r) {
  nlohmann::json j;
  j["counts"] = {{"records", r.records},
                 {"attributed", r.attributed},
                 {"unattributable", r.unattributable},
                 {"tied", r.tied},
                 {"rejected", r.rejected}};
  j["unattributable_records"] = r.unattributable_ids;
  auto ties = nlohmann::json::array();
  for (const auto& t : r.ties)
    ties.push_back({{"record_id", t.record_id}, {"dataset_ids", t.dataset_ids}, {"overlap", t.overlap}});
  j["tied_records"] = std::move(ties);
  auto rejects = nlohmann::json::array();
  for (const auto& x : r.rejections) rejects.push_back({{"line", x.line}, {"reason", x.reason}});
  j["rejected_lines"] = std::move(rejects);
  return j;
}

/// Serializes triplets as `pipeline_id,dataset_id,outcome`, with a fourth
/// `timestamp` column when requested. `comment` goes in leading '#' lines.
inline std::string format_triplets(std::span<const ExecutionTriplet> triplets, bool with_timestamps = false,
                                   std::string_view comment = {}) {
  std::string out = csv::comment_block(comment);
  out += with_timestamps ? "pipeline_id,dataset_id,outcome,timestamp\n" : "pipeline_id,dataset_id,outcome\n";
  for (const auto& t : triplets) {
    out += csv::escape(t.pipeline_id);
    out += ',';
    out += csv::escape(t.dataset_id);
    out += ',';
    out += std::to_string(rating_value(t.outcome));
    if (with_timestamps) {
      out += ',';
      if (t.timestamp) out += format_timestamp(*t.timestamp);
    }
    out += '\n';
  }
  return out;
}

/// Reads triplets from delimited text. The rating column may be named
/// `outcome` or `rating`; an optional `timestamp` column is honoured.
inline std::vector<ExecutionTriplet> parse_triplets(std::string_view text, std::string_view source = "triplets") {
  auto table = csv::parse(text, source);
  const auto& h = table.header;
  bool ok = (h.size() == 3 || h.size() == 4) && h[0] == "pipeline_id" && h[1] == "dataset_id" &&
            (h[2] == "outcome" || h[2] == "rating") && (h.size() == 3 || h[3] == "timestamp");
  if (!ok)
    throw ParseError(std::string(source) + ": header must be 'pipeline_id,dataset_id,outcome[,timestamp]'");
  std::vector<ExecutionTriplet> triplets;
  triplets.reserve(table.rows.size());
  for (auto& [line, row] : table.rows) {
    auto where = std::string(source) + ":" + std::to_string(line) + ": ";
    if (row[0].empty() || row[1].empty()) throw ParseError(where + "empty pipeline_id or dataset_id");
    std::optional<Outcome> outcome;
    if (row[2] == "1") outcome = Outcome::failed;
    if (row[2] == "2") outcome = Outcome::success;
    if (!outcome) throw ParseError(where + "rating must be 1 or 2, got '" + row[2] + "'");
    ExecutionTriplet t{std::move(row[0]), std::move(row[1]), *outcome, std::nullopt};
    if (row.size() == 4 && !row[3].empty()) {
      t.timestamp = parse_timestamp(row[3]);
      if (!t.timestamp) throw ParseError(where + "bad timestamp '" + row[3] + "'");
    }
    triplets.push_back(std::move(t));
  }
  return triplets;
}

}  // namespace provrec
