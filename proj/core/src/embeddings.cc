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

#include "mtme/embeddings.h"

#include <charconv>
#include <fstream>
#include <string_view>
#include <vector>

#include "mtme/error.h"

namespace mtme {
namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                std::size_t dim) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file '" + path.string() + "'");

  const std::size_t v = vocab.size();
  std::vector<double> values(v * dim, 0.0);
  std::vector<bool> filled(v, false);
  std::size_t covered = 0;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what, line_no);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      std::size_t count = 0, file_dim = 0;
      if (parse_number(fields[0], count) && parse_number(fields[1], file_dim)) {
        if (file_dim != dim) {
          fail("header declares dimension " + std::to_string(file_dim) + ", expected " +
               std::to_string(dim));
        }
        continue;
      }
    }
    if (fields.size() != dim + 1) {
      fail("expected a token and " + std::to_string(dim) + " values, found " +
           std::to_string(fields.size() - 1) + " values");
    }
    const std::int32_t id = vocab.index(std::string(fields[0]));
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_number(fields[j + 1], row[j])) {
        fail("unparseable number '" + std::string(fields[j + 1]) + "'");
      }
    }
    if (id < 2 || filled[static_cast<std::size_t>(id)]) continue;
    filled[static_cast<std::size_t>(id)] = true;
    ++covered;
    std::copy(row.begin(), row.end(),
              values.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(id) * dim));
  }
  EmbeddingMatrix m;
  m.table = EmbeddingTable(Tensor({v, dim}, std::move(values)));
  m.covered = covered;
  m.coverage = v > 2 ? static_cast<double>(covered) / static_cast<double>(v - 2) : 0.0;
  return m;
}

EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim, Rng& rng, double scale) {
  std::vector<double> values(vocab_size * dim);
  for (double& x : values) x = rng.uniform(-scale, scale);
  return EmbeddingTable(Tensor({vocab_size, dim}, std::move(values)));
}

}  // namespace mtme
