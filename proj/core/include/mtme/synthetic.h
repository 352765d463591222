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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtme/corpus.h"

namespace mtme {

// Label `label` is switched on independently in each record with probability
// `fraction`; a positive record receives `per_record` keywords drawn from
// `keywords`. Keywords never appear in negative records.
struct KeywordRule {
  std::string label;
  std::vector<std::string> keywords;
  double fraction = 0.1;
  std::size_t per_record = 1;
};

struct SyntheticSpec {
  std::size_t n_records = 500;
  std::vector<std::string> label_names;
  std::vector<KeywordRule> rules;  // exactly one per label
  std::size_t noise_vocab_size = 200;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 14;

  // Throws ConfigError when the generator settings cannot be realised.
  void validate() const;
};

void to_json(nlohmann::json& j, const KeywordRule& r);
void from_json(const nlohmann::json& j, KeywordRule& r);
void to_json(nlohmann::json& j, const SyntheticSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpec& s);

// Noise tokens are "n<k>" with k < noise_vocab_size.
Corpus synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace mtme
