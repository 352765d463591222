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
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mtme/rng.h"
#include "mtme/tensor.h"

namespace mtme {

struct Record {
  std::string id;
  std::string text;
  std::vector<std::uint8_t> labels;
};

struct Corpus {
  std::vector<Record> records;
  std::vector<std::string> label_names;

  std::size_t size() const { return records.size(); }
  // Throws ConfigError for an unknown label.
  std::size_t label_index(const std::string& name) const;
  // Throws DataError naming the first inconsistent record.
  void validate() const;
};

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kOovId = 1;

class Vocabulary {
 public:
  // Only the reserved "<pad>" and "<oov>" entries.
  Vocabulary();
  // Tokens in index order starting at 2.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  std::size_t size() const { return tokens_.size(); }
  // kOovId when absent.
  std::int32_t index(const std::string& token) const;
  const std::string& token(std::int32_t id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Tokens ordered by descending frequency, ties by first occurrence, filtered
// by min_freq, then truncated to max_size entries beyond the reserved two.
Vocabulary build_vocab(const Corpus& corpus, std::size_t min_freq = 2,
                       std::size_t max_size = 100000);

// Token ids of one text: OOV mapped to kOovId, tail-truncated to seq_len and
// tail-padded with kPadId.
std::vector<std::int32_t> encode_text(const std::string& text, const Vocabulary& vocab,
                                      std::size_t seq_len, std::size_t* length = nullptr);
// Tokens of an id sequence, stopping at the first padding id.
std::vector<std::string> decode_ids(std::span<const std::int32_t> ids, const Vocabulary& vocab);

struct EncodedDataset {
  IdMatrix ids;                      // [N×seq_len]
  std::vector<std::size_t> lengths;  // token counts before truncation
  std::size_t num_labels = 0;
  std::vector<double> labels;  // row-major [N×num_labels]
  std::vector<std::string> label_names;

  std::size_t size() const { return ids.rows; }
  EncodedDataset subset(std::span<const std::size_t> rows) const;
};

EncodedDataset encode(const Corpus& corpus, const Vocabulary& vocab, std::size_t seq_len);

struct EncodedBatch {
  IdMatrix ids;
  Tensor labels;  // [B×num_labels]
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> rows;  // source row of each batch entry
};

// One epoch: a fresh shuffle drawn from `rng`, consecutive slices of
// batch_size, the last possibly shorter.
std::vector<EncodedBatch> batches(const EncodedDataset& data, std::size_t batch_size, Rng& rng);
// In-order batches without shuffling (evaluation).
std::vector<EncodedBatch> sequential_batches(const EncodedDataset& data, std::size_t batch_size);

// Seeded partition of 0..n−1 into sorted {train, validation} index lists;
// validation receives round(fraction·n) indices, at least one and at most n−1.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double fraction,
                                                                            Rng& rng);

// split_indices applied to the rows of `data`.
std::pair<EncodedDataset, EncodedDataset> split_validation(const EncodedDataset& data,
                                                           double fraction, Rng& rng);

struct LabelStats {
  std::vector<std::string> label_names;
  std::vector<std::size_t> positives;
  std::vector<double> fractions;
  // cardinality[k] = number of records with exactly k positive labels.
  std::vector<std::size_t> cardinality;
  std::size_t records = 0;
};

LabelStats label_stats(const Corpus& corpus);

// Script name → number of documents containing at least one codepoint of it.
using ScriptHistogram = std::map<std::string, std::size_t>;

ScriptHistogram detect_scripts(const Corpus& corpus);
// Descending count, ties by name; at most k entries.
std::vector<std::pair<std::string, std::size_t>> top_scripts(const ScriptHistogram& h,
                                                             std::size_t k = 30);

// Token counts over records whose `label` equals `positive`; descending
// count, ties lexicographic, at most top_k entries.
std::vector<std::pair<std::string, std::size_t>> term_frequencies(const Corpus& corpus,
                                                                  const std::string& label,
                                                                  bool positive,
                                                                  std::size_t top_k = 1000);

}  // namespace mtme
