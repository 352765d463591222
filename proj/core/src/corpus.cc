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

#include "mtme/corpus.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mtme/error.h"
#include "mtme/text.h"

namespace mtme {

std::size_t Corpus::label_index(const std::string& name) const {
  for (std::size_t i = 0; i < label_names.size(); ++i) {
    if (label_names[i] == name) return i;
  }
  throw ConfigError("unknown label '" + name + "'");
}

void Corpus::validate() const {
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].labels.size() != label_names.size()) {
      throw DataError("record " + std::to_string(r + 1) + " has " +
                          std::to_string(records[r].labels.size()) + " labels, expected " +
                          std::to_string(label_names.size()),
                      r + 1);
    }
    for (auto v : records[r].labels) {
      if (v > 1) throw DataError("record " + std::to_string(r + 1) + " has a non-binary label", r + 1);
    }
  }
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  tokens_ = {"<pad>", "<oov>"};
  for (const auto& t : tokens) {
    if (index_.count(t) || t == "<pad>" || t == "<oov>") {
      throw ConfigError("duplicate vocabulary token '" + t + "'");
    }
    index_.emplace(t, static_cast<std::int32_t>(tokens_.size()));
    tokens_.push_back(t);
  }
}

std::int32_t Vocabulary::index(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kOovId : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t min_freq, std::size_t max_size) {
  struct Entry {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Entry> stats;
  std::size_t position = 0;
  for (const auto& rec : corpus.records) {
    for (auto& tok : tokenize(rec.text)) {
      auto [it, inserted] = stats.try_emplace(std::move(tok));
      if (inserted) it->second.first = position;
      ++it->second.count;
      ++position;
    }
  }
  std::vector<std::pair<std::string, Entry>> ranked(stats.begin(), stats.end());
  std::erase_if(ranked, [&](const auto& e) { return e.second.count < min_freq; });
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first < b.second.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& e : ranked) tokens.push_back(e.first);
  return Vocabulary(tokens);
}

std::vector<std::int32_t> encode_text(const std::string& text, const Vocabulary& vocab,
                                      std::size_t seq_len, std::size_t* length) {
  const auto tokens = tokenize(text);
  if (length) *length = tokens.size();
  std::vector<std::int32_t> ids(seq_len, kPadId);
  for (std::size_t i = 0; i < std::min(seq_len, tokens.size()); ++i) ids[i] = vocab.index(tokens[i]);
  return ids;
}

std::vector<std::string> decode_ids(std::span<const std::int32_t> ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (auto id : ids) {
    if (id == kPadId) break;
    out.push_back(vocab.token(id));
  }
  return out;
}

EncodedDataset EncodedDataset::subset(std::span<const std::size_t> rows) const {
  EncodedDataset out;
  out.num_labels = num_labels;
  out.label_names = label_names;
  out.ids = IdMatrix(rows.size(), ids.cols);
  out.labels.reserve(rows.size() * num_labels);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= size()) throw IndexError("row " + std::to_string(r) + " out of range");
    std::copy_n(ids.ids.begin() + static_cast<std::ptrdiff_t>(r * ids.cols), ids.cols,
                out.ids.ids.begin() + static_cast<std::ptrdiff_t>(i * ids.cols));
    out.lengths.push_back(lengths[r]);
    for (std::size_t k = 0; k < num_labels; ++k) out.labels.push_back(labels[r * num_labels + k]);
  }
  return out;
}

EncodedDataset encode(const Corpus& corpus, const Vocabulary& vocab, std::size_t seq_len) {
  if (seq_len == 0) throw ConfigError("seq_len must be positive");
  corpus.validate();
  EncodedDataset out;
  out.num_labels = corpus.label_names.size();
  out.label_names = corpus.label_names;
  out.ids = IdMatrix(corpus.size(), seq_len);
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    std::size_t len = 0;
    const auto row = encode_text(corpus.records[r].text, vocab, seq_len, &len);
    std::copy(row.begin(), row.end(), out.ids.ids.begin() + static_cast<std::ptrdiff_t>(r * seq_len));
    out.lengths.push_back(len);
    for (auto v : corpus.records[r].labels) out.labels.push_back(v);
  }
  return out;
}

namespace {

EncodedBatch make_batch(const EncodedDataset& data, std::span<const std::size_t> rows) {
  EncodedDataset sub = data.subset(rows);
  EncodedBatch b;
  b.ids = std::move(sub.ids);
  b.labels = Tensor({rows.size(), std::max<std::size_t>(data.num_labels, 1)},
                    data.num_labels ? std::move(sub.labels) : std::vector<double>(rows.size(), 0.0));
  b.lengths = std::move(sub.lengths);
  b.rows.assign(rows.begin(), rows.end());
  return b;
}

std::vector<EncodedBatch> slice_batches(const EncodedDataset& data,
                                        const std::vector<std::size_t>& order,
                                        std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  std::vector<EncodedBatch> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - start);
    out.push_back(make_batch(data, std::span(order).subspan(start, n)));
  }
  return out;
}

}  // namespace

std::vector<EncodedBatch> batches(const EncodedDataset& data, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  return slice_batches(data, order, batch_size);
}

std::vector<EncodedBatch> sequential_batches(const EncodedDataset& data, std::size_t batch_size) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  return slice_batches(data, order, batch_size);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double fraction,
                                                                            Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in (0, 1)");
  }
  if (n < 2) throw DataError("need at least 2 records to split off a validation set");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(val)};
}

std::pair<EncodedDataset, EncodedDataset> split_validation(const EncodedDataset& data,
                                                           double fraction, Rng& rng) {
  const auto [train, val] = split_indices(data.size(), fraction, rng);
  return {data.subset(train), data.subset(val)};
}

LabelStats label_stats(const Corpus& corpus) {
  corpus.validate();
  LabelStats s;
  s.label_names = corpus.label_names;
  s.records = corpus.size();
  s.positives.assign(corpus.label_names.size(), 0);
  s.cardinality.assign(corpus.label_names.size() + 1, 0);
  for (const auto& rec : corpus.records) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < rec.labels.size(); ++i) {
      s.positives[i] += rec.labels[i];
      k += rec.labels[i];
    }
    ++s.cardinality[k];
  }
  for (auto p : s.positives) {
    s.fractions.push_back(s.records ? static_cast<double>(p) / static_cast<double>(s.records) : 0.0);
  }
  return s;
}

ScriptHistogram detect_scripts(const Corpus& corpus) {
  ScriptHistogram h;
  for (const auto& rec : corpus.records) {
    for (const auto& script : scripts_in(rec.text)) ++h[script];
  }
  return h;
}

namespace {

std::vector<std::pair<std::string, std::size_t>> ranked(
    std::vector<std::pair<std::string, std::size_t>> items, std::size_t k) {
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (items.size() > k) items.resize(k);
  return items;
}

}  // namespace

std::vector<std::pair<std::string, std::size_t>> top_scripts(const ScriptHistogram& h,
                                                             std::size_t k) {
  return ranked({h.begin(), h.end()}, k);
}

std::vector<std::pair<std::string, std::size_t>> term_frequencies(const Corpus& corpus,
                                                                  const std::string& label,
                                                                  bool positive,
                                                                  std::size_t top_k) {
  const std::size_t li = corpus.label_index(label);
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& rec : corpus.records) {
    if ((rec.labels.at(li) == 1) != positive) continue;
    for (auto& tok : tokenize(rec.text)) ++counts[std::move(tok)];
  }
  return ranked({counts.begin(), counts.end()}, top_k);
}

}  // namespace mtme
