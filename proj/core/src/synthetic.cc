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

#include "mtme/synthetic.h"

#include <cstdio>
#include <set>

#include "mtme/error.h"
#include "mtme/rng.h"
#include "mtme/text.h"

namespace mtme {

void SyntheticSpec::validate() const {
  if (n_records == 0) throw ConfigError("synthetic corpus needs n_records >= 1");
  if (label_names.empty()) throw ConfigError("synthetic corpus needs at least one label");
  if (noise_vocab_size == 0) throw ConfigError("noise_vocab_size must be positive");
  if (min_tokens == 0 || min_tokens > max_tokens) {
    throw ConfigError("need 1 <= min_tokens <= max_tokens");
  }
  if (rules.size() != label_names.size()) {
    throw ConfigError("need exactly one keyword rule per label");
  }
  std::set<std::string> keywords;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    if (r.label != label_names[i]) {
      throw ConfigError("rule " + std::to_string(i) + " is for '" + r.label + "', expected '" +
                        label_names[i] + "'");
    }
    if (r.keywords.empty()) throw ConfigError("label '" + r.label + "' has no keywords");
    if (!(r.fraction > 0.0 && r.fraction <= 1.0)) {
      throw ConfigError("label '" + r.label + "' fraction must be in (0, 1]");
    }
    if (r.per_record == 0) throw ConfigError("label '" + r.label + "' needs per_record >= 1");
    for (const auto& k : r.keywords) {
      const auto toks = tokenize(k);
      if (toks.size() != 1 || toks[0] != k) {
        throw ConfigError("keyword '" + k + "' is not a single lowercase token");
      }
      if (k.size() > 1 && k[0] == 'n' && k.find_first_not_of("0123456789", 1) == std::string::npos) {
        throw ConfigError("keyword '" + k + "' collides with the noise vocabulary");
      }
      if (!keywords.insert(k).second) {
        throw ConfigError("keyword '" + k + "' is used by more than one label");
      }
    }
  }
}

void to_json(nlohmann::json& j, const KeywordRule& r) {
  j = {{"label", r.label},
       {"keywords", r.keywords},
       {"fraction", r.fraction},
       {"per_record", r.per_record}};
}

void from_json(const nlohmann::json& j, KeywordRule& r) {
  j.at("label").get_to(r.label);
  j.at("keywords").get_to(r.keywords);
  j.at("fraction").get_to(r.fraction);
  r.per_record = j.value("per_record", std::size_t{1});
}

void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  j = {{"n_records", s.n_records},   {"label_names", s.label_names},
       {"rules", s.rules},           {"noise_vocab_size", s.noise_vocab_size},
       {"min_tokens", s.min_tokens}, {"max_tokens", s.max_tokens}};
}

void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  static const std::set<std::string> known{"n_records",        "label_names", "rules",
                                           "noise_vocab_size", "min_tokens",  "max_tokens"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown synthetic spec key '" + key + "'");
  }
  SyntheticSpec d;
  s.n_records = j.value("n_records", d.n_records);
  j.at("label_names").get_to(s.label_names);
  j.at("rules").get_to(s.rules);
  s.noise_vocab_size = j.value("noise_vocab_size", d.noise_vocab_size);
  s.min_tokens = j.value("min_tokens", d.min_tokens);
  s.max_tokens = j.value("max_tokens", d.max_tokens);
}

Corpus synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  Corpus corpus;
  corpus.label_names = spec.label_names;
  corpus.records.reserve(spec.n_records);
  for (std::size_t r = 0; r < spec.n_records; ++r) {
    Record rec;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%06zu", r);
    rec.id = id;
    const std::size_t n_noise =
        spec.min_tokens + static_cast<std::size_t>(rng.below(spec.max_tokens - spec.min_tokens + 1));
    std::vector<std::string> tokens;
    for (std::size_t t = 0; t < n_noise; ++t) {
      tokens.push_back("n" + std::to_string(rng.below(spec.noise_vocab_size)));
    }
    for (const auto& rule : spec.rules) {
      const bool on = rng.bernoulli(rule.fraction);
      rec.labels.push_back(on ? 1 : 0);
      if (!on) continue;
      for (std::size_t k = 0; k < rule.per_record; ++k) {
        const std::string& kw = rule.keywords[rng.below(rule.keywords.size())];
        const auto pos = static_cast<std::ptrdiff_t>(rng.below(tokens.size() + 1));
        tokens.insert(tokens.begin() + pos, kw);
      }
    }
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (t) rec.text += ' ';
      rec.text += tokens[t];
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

}  // namespace mtme
