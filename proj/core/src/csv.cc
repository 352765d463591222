// Copyright 2026 The MTME Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtme/csv.h"

#include <fstream>
#include <sstream>

#include "mtme/error.h"

namespace mtme {

CsvTable parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> lines;
  std::vector<std::string> row;
  std::string field;
  std::size_t line = 1, row_line = 1;
  bool in_quotes = false, was_quoted = false, row_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    records.push_back(std::move(row));
    lines.push_back(row_line);
    row.clear();
    row_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!row_started) {
      row_started = true;
      row_line = line;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case ',':
        end_field();
        break;
      case '"':
        if (!field.empty() || was_quoted) {
          throw DataError("malformed CSV: stray quote on line " + std::to_string(line), line);
        }
        in_quotes = was_quoted = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_row();
        ++line;
        break;
      default:
        if (was_quoted) {
          throw DataError("malformed CSV: text after closing quote on line " +
                              std::to_string(line), line);
        }
        field += c;
    }
  }
  if (in_quotes) {
    throw DataError("malformed CSV: unterminated quoted field starting on line " +
                        std::to_string(row_line), row_line);
  }
  if (row_started) end_row();

  CsvTable table;
  if (records.empty()) throw DataError("CSV has no header row", 1);
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    // A blank line parses as a single empty field; skip it.
    if (records[r].size() == 1 && records[r][0].empty()) continue;
    if (records[r].size() != table.header.size()) {
      throw DataError("malformed CSV: line " + std::to_string(lines[r]) + " has " +
                          std::to_string(records[r].size()) + " fields, header has " +
                          std::to_string(table.header.size()),
                      lines[r]);
    }
    table.rows.push_back(std::move(records[r]));
    table.lines.push_back(lines[r]);
  }
  return table;
}

CsvSchema CsvSchema::jigsaw() {
  return {"comment_text",
          {"toxic", "severe_toxic", "obscene", "threat", "insult", "identity_hate"},
          std::string("id")};
}

Corpus corpus_from_csv(const CsvTable& table, const CsvSchema& schema) {
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == name) return i;
    }
    throw DataError("CSV has no column '" + name + "'", 1);
  };
  const std::size_t text_col = column(schema.text_column);
  std::vector<std::size_t> label_cols;
  for (const auto& l : schema.label_columns) label_cols.push_back(column(l));
  const std::optional<std::size_t> id_col =
      schema.id_column ? std::optional(column(*schema.id_column)) : std::nullopt;

  Corpus corpus;
  corpus.label_names = schema.label_columns;
  corpus.records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Record rec;
    rec.id = id_col ? row[*id_col] : std::to_string(r + 1);
    rec.text = row[text_col];
    for (std::size_t k = 0; k < label_cols.size(); ++k) {
      const std::string& cell = row[label_cols[k]];
      if (cell != "0" && cell != "1") {
        throw DataError("row " + std::to_string(r + 1) + " (line " + std::to_string(table.lines[r]) +
                            "): label '" + schema.label_columns[k] + "' must be 0 or 1, got '" +
                            cell + "'",
                        r + 1);
      }
      rec.labels.push_back(cell == "1" ? 1 : 0);
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

Corpus load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return corpus_from_csv(parse_csv(buf.str()), schema);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what(), e.location());
  }
}

}  // namespace mtme
