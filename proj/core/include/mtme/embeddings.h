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

#include <cstddef>
#include <filesystem>

#include "mtme/corpus.h"
#include "mtme/layers.h"
#include "mtme/rng.h"

namespace mtme {

inline constexpr std::size_t kDefaultEmbeddingDim = 300;

// A vocabulary-aligned embedding table and how much of the vocabulary the
// source file covered. Reserved and uncovered rows are zero.
struct EmbeddingMatrix {
  EmbeddingTable table;
  std::size_t covered = 0;  // non-reserved tokens found in the file
  double coverage = 0.0;    // covered / (vocab size − 2); 0 for an empty vocabulary
};

// GloVe / fastText text format: "token v1 ... v_dim" per line, optionally
// preceded by a "count dim" header line. Tokens match exactly; the first
// occurrence of a token wins. Throws DataError with the line number on a
// dimension mismatch or an unparseable number.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                std::size_t dim = kDefaultEmbeddingDim);

// Uniform(−scale, scale) rows; reserved rows zero.
EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim, Rng& rng,
                                 double scale = 1.0);

}  // namespace mtme
