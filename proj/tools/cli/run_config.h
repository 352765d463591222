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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtme/classical.h"
#include "mtme/csv.h"
#include "mtme/embeddings.h"
#include "mtme/model.h"
#include "mtme/synthetic.h"
#include "mtme/training.h"

namespace mtme::cli {

// Where a task's records come from: a CSV file or a generated corpus.
struct DataSource {
  std::optional<std::filesystem::path> csv;
  CsvSchema schema = CsvSchema::jigsaw();
  std::optional<SyntheticSpec> synthetic;
  std::uint64_t synthetic_seed = 0;

  Corpus load() const;
  // Short human-readable description for error messages.
  std::string describe() const;
};

struct TaskSource {
  std::string name;
  DataSource data;
};

struct EmbeddingSource {
  std::string name;
  std::optional<std::filesystem::path> path;  // GloVe/fastText text file
  std::size_t dim = kDefaultEmbeddingDim;     // declared or random dimension
  bool random = false;
};

struct VocabConfig {
  std::size_t min_freq = 2;
  std::size_t max_size = 100000;
};

// One experiment. Relative paths resolve against the config file's
// directory.
struct RunConfig {
  std::string name;
  ArchKind arch = ArchKind::kMultitask;
  std::vector<TaskSource> tasks;  // first is the main task
  std::optional<DataSource> test;
  std::vector<EmbeddingSource> embeddings;
  MultiTaskConfig model;  // tasks and embedding_sources filled from the above
  TrainConfig train;
  VocabConfig vocab;
  ClassicalConfig classical;
  std::filesystem::path output_dir = "out";

  void validate() const;
};

// Unknown keys anywhere in the document raise ConfigError.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Everything a finished run produced.
struct RunOutput {
  std::string model_name;
  nlohmann::json history;  // empty for classical baselines
  EvaluationTable table;   // main task on the test (or validation) split
  std::filesystem::path model_path;
};

// Trains, evaluates on the held-out split and writes model.mtme,
// history.json, metrics.json and table.txt into output_dir.
RunOutput run_training(const RunConfig& cfg, std::size_t eval_threads = 1);

// Neural or classical model file, evaluated on `data` for the main task.
// `schema` defaults to the one recorded at training time.
EvaluationTable run_evaluation(const std::filesystem::path& model_path, const DataSource& data,
                               bool schema_given, std::size_t threads, double threshold);

nlohmann::json analyze_corpus(const Corpus& corpus, std::size_t top_terms,
                              std::size_t top_scripts_k);

}  // namespace mtme::cli
