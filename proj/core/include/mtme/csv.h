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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtme/corpus.h"

namespace mtme {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Physical line (1-based) on which each row starts.
  std::vector<std::size_t> lines;
};

// RFC 4180: comma separated, CRLF or LF records, double-quoted fields may hold
// commas, quotes ("") and newlines. A UTF-8 byte-order mark is ignored.
// Every row must have as many fields as the header. Throws DataError with the
// offending line.
CsvTable parse_csv(std::string_view text);

struct CsvSchema {
  std::string text_column;
  std::vector<std::string> label_columns;
  std::optional<std::string> id_column;

  // Column names of the Jigsaw toxic comment data.
  static CsvSchema jigsaw();
};

// Label cells must be "0" or "1". Errors name the 1-based data row.
Corpus corpus_from_csv(const CsvTable& table, const CsvSchema& schema);
Corpus load_csv(const std::filesystem::path& path, const CsvSchema& schema);

}  // namespace mtme
