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
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtme/layers.h"
#include "mtme/rng.h"
#include "mtme/tape.h"
#include "mtme/tensor.h"

namespace mtme {

// Neural architectures plus the two TF-IDF baselines, which share the model
// file format.
enum class ArchKind { kMultitask, kBiGru, kCnn, kBiRnnCnn, kTfidfLogreg, kTfidfTree };

std::string to_string(ArchKind kind);
ArchKind arch_from_string(std::string_view name);
bool is_neural(ArchKind kind);

struct TaskHead {
  std::string name;
  std::size_t out_dim = 1;
};

struct MultiTaskConfig {
  std::size_t seq_len = 100;
  std::vector<std::string> embedding_sources;
  std::size_t rnn_hidden = kDefaultRnnHidden;
  std::size_t cnn_filters = kDefaultConvFilters;
  std::size_t cnn_kernel = kDefaultConvKernel;
  double dropout_rate = kDefaultDropoutRate;
  std::vector<TaskHead> tasks;

  // Single-task CNN baseline: parallel convolutions, global max pooling, a
  // hidden dense layer, then the sigmoid output.
  std::size_t baseline_cnn_filters = 300;
  std::vector<std::size_t> baseline_cnn_kernels = {2, 3, 4, 5};
  std::size_t baseline_cnn_hidden = 36;

  // Throws ConfigError.
  void validate() const;

  // Three embeddings and the four tasks (main multi-label + three auxiliary).
  static MultiTaskConfig paper_default();
};

void to_json(nlohmann::json& j, const TaskHead& t);
void from_json(const nlohmann::json& j, TaskHead& t);
void to_json(nlohmann::json& j, const MultiTaskConfig& c);
void from_json(const nlohmann::json& j, MultiTaskConfig& c);

// Named weights of one model. Trunk parameters live under "trunk/"; each
// head's parameters live under "<task>/". Embedding tables are frozen and kept
// apart from the trainable map.
struct ModelParams {
  ArchKind arch = ArchKind::kMultitask;
  MultiTaskConfig config;
  std::map<std::string, Tensor> params;
  std::vector<EmbeddingTable> tables;
  // Carried through save/load untouched (vocabulary, label names, ...).
  nlohmann::json metadata = nlohmann::json::object();

  static bool is_trunk_name(std::string_view name);
  std::vector<std::string> trunk_names() const;
  std::vector<std::string> head_names(const std::string& task) const;
  const TaskHead& task(const std::string& name) const;
  std::size_t trunk_feature_dim() const;
  std::size_t parameter_count() const;
};

// Per-forward binding of parameter names to tensors. With a tape, each
// parameter is watched the first time it is requested; without one the stored
// tensors are used directly (inference).
class ParamScope {
 public:
  explicit ParamScope(const ModelParams& model, Tape* tape = nullptr);

  const Tensor& get(const std::string& name);
  const std::set<std::string>& touched() const { return touched_; }
  // Gradient for every parameter touched so far.
  std::map<std::string, Tensor> gradients(const Gradients& grads) const;

 private:
  const ModelParams& model_;
  Tape* tape_;
  std::map<std::string, Tensor> bound_;
  std::set<std::string> touched_;
};

ModelParams build_multitask(const MultiTaskConfig& cfg, std::vector<EmbeddingTable> tables,
                            Rng& rng);
ModelParams build_bigru(const MultiTaskConfig& cfg, EmbeddingTable table, Rng& rng);
ModelParams build_cnn(const MultiTaskConfig& cfg, EmbeddingTable table, Rng& rng);
ModelParams build_birnncnn(const MultiTaskConfig& cfg, EmbeddingTable table, Rng& rng);
// Dispatches on a neural ArchKind.
ModelParams build_model(ArchKind arch, const MultiTaskConfig& cfg,
                        std::vector<EmbeddingTable> tables, Rng& rng);

// Shared representation [B×trunk_feature_dim]. `rng` drives dropout in
// training mode and is not touched at inference.
Tensor trunk_features(const ModelParams& model, ParamScope& scope, const IdMatrix& ids,
                      bool training, Rng& rng);

// Sigmoid probabilities [B×out_dim] for `task`.
Tensor forward(const ModelParams& model, ParamScope& scope, const IdMatrix& ids,
               const std::string& task, bool training, Rng& rng);

// Inference without a tape.
Tensor predict(const ModelParams& model, const IdMatrix& ids, const std::string& task);

}  // namespace mtme
