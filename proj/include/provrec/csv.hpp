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

#include <string>
#include <string_view>
#include <vector>

#include "provrec/error.hpp"
#include "provrec/io.hpp"

namespace provrec::csv {

// Minimal RFC 4180 handling: fields may be double-quoted, with "" as an
// escaped quote. Quoted fields may not span lines.

inline std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  /// Data rows paired with their 1-based line number in the source.
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

/// Parses delimited text with a header row. Blank lines and lines starting
/// with '#' (run metadata) are skipped. Every row must have as many fields
/// as the header.
inline Table parse(std::string_view text, std::string_view source) {
  Table table;
  bool have_header = false;
  auto lines = io::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    auto line = lines[n];
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    try {
      fields = split_row(line);
    } catch (const ParseError& e) {
      throw ParseError(std::string(source) + ":" + std::to_string(n + 1) + ": " + e.what());
    }
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(std::string(source) + ":" + std::to_string(n + 1) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    table.rows.emplace_back(n + 1, std::move(fields));
  }
  if (!have_header) throw ParseError(std::string(source) + ": missing header row");
  return table;
}

/// Prefixes every line of `comment` with "# ". Empty input yields "".
inline std::string comment_block(std::string_view comment) {
  if (comment.empty()) return {};
  std::string out;
  for (auto line : io::split_lines(comment)) {
    out += "# ";
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace provrec::csv
