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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtme/corpus.h"
#include "mtme/metrics.h"
#include "mtme/model.h"
#include "mtme/rng.h"
#include "mtme/tensor.h"

namespace mtme {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments per parameter and one bias-correction step counter per parameter
// group. The group of "trunk/..." is "trunk", of "<task>/..." is "<task>",
// so the shared trunk advances once per task update and each head once per
// update of its own task.
struct AdamState {
  AdamConfig config;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
  std::map<std::string, std::uint64_t> steps;

  std::uint64_t step(const std::string& group) const;
};

std::string param_group(const std::string& name);

// One Adam update of every parameter present in `grads`; absent parameters
// are left alone. Each group with at least one gradient advances its counter
// once. A NaN or infinite gradient throws NumericalError naming the parameter
// before anything is modified.
void adam_step(std::map<std::string, Tensor>& params, const std::map<std::string, Tensor>& grads,
               AdamState& state);

struct TaskBatch {
  std::string task;
  IdMatrix ids;
  Tensor labels;  // [B×out_dim]
};

using AfterUpdateFn = std::function<void(std::size_t task_index, const ModelParams& model)>;

// One batch per task, in the model's declared task order. For each task:
// forward, BCE, backward, adam_step. Returns the per-task losses. `after`
// (optional) is called after each of the T updates.
std::vector<double> multitask_step(ModelParams& model, std::span<const TaskBatch> batches,
                                   AdamState& opt, Rng& dropout_rng,
                                   const AfterUpdateFn& after = {});

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t max_epochs = 30;
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  double threshold = 0.5;
  AdamConfig adam;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
// Missing keys keep their defaults; unknown keys throw ConfigError.
void from_json(const nlohmann::json& j, TrainConfig& c);

struct TaskData {
  std::string task;
  EncodedDataset train;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::map<std::string, double> train_loss;  // mean batch loss per task
  double val_loss = 0.0;
  double val_f1_class1 = 0.0;  // macro over main-task labels
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  ModelParams best;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
};

nlohmann::json to_json(const TrainResult& result);

// Epochs walk the main (first) task's batches; every other task contributes
// the next batch of its own reshuffled cycle. Early stopping on main-task
// validation loss: training ends once `max(1, patience)` consecutive epochs
// fail to improve, and the snapshot with minimum validation loss is returned.
// Without an explicit validation set the main task's data is split with
// `validation_fraction`.
TrainResult train(ModelParams model, const std::vector<TaskData>& tasks, const TrainConfig& cfg,
                  const EncodedDataset* validation = nullptr);

// Mean BCE of `task` over `data` in inference mode.
double evaluation_loss(const ModelParams& model, const EncodedDataset& data,
                       const std::string& task, std::size_t batch_size = 256);

// Probabilities [N×out_dim] row-major, in inference mode. With threads > 1
// batches are partitioned across worker threads.
std::vector<double> predict_dataset(const ModelParams& model, const EncodedDataset& data,
                                    const std::string& task, std::size_t threads = 1,
                                    std::size_t batch_size = 256);

// Thresholded per-label counts and P/R/F1 for both classes. Counts from
// parallel workers are merged by summation.
EvaluationTable evaluate(const ModelParams& model, const EncodedDataset& data,
                         const std::string& task, double threshold = 0.5,
                         std::size_t threads = 1, const std::string& model_name = "model");

}  // namespace mtme
