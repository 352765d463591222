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

#include "mtme/training.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "mtme/error.h"
#include "mtme/ops.h"
#include "mtme/tape.h"

namespace mtme {

std::uint64_t AdamState::step(const std::string& group) const {
  auto it = steps.find(group);
  return it == steps.end() ? 0 : it->second;
}

std::string param_group(const std::string& name) { return name.substr(0, name.find('/')); }

void adam_step(std::map<std::string, Tensor>& params, const std::map<std::string, Tensor>& grads,
               AdamState& state) {
  std::set<std::string> groups;
  for (const auto& [name, g] : grads) {
    auto p = params.find(name);
    if (p == params.end()) throw IndexError("gradient for unknown parameter '" + name + "'");
    if (g.shape() != p->second.shape()) {
      throw ShapeError("gradient of '" + name + "' has shape " + shape_to_string(g.shape()) +
                       ", parameter has " + shape_to_string(p->second.shape()));
    }
    const auto gv = g.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      if (!std::isfinite(gv[i])) {
        throw NumericalError("non-finite gradient in parameter '" + name + "' at index " +
                             std::to_string(i) + " (value " + std::to_string(gv[i]) + ")");
      }
    }
    groups.insert(param_group(name));
  }
  for (const auto& group : groups) ++state.steps[group];

  const AdamConfig& c = state.config;
  for (const auto& [name, g] : grads) {
    Tensor& param = params.at(name);
    auto [mit, m_new] = state.m.try_emplace(name, Tensor::zeros(param.shape()));
    auto [vit, v_new] = state.v.try_emplace(name, Tensor::zeros(param.shape()));
    const auto t = static_cast<double>(state.steps.at(param_group(name)));
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    auto m = mit->second.mutable_values();
    auto v = vit->second.mutable_values();
    auto theta = param.mutable_values();
    const auto gv = g.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * gv[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * gv[i] * gv[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

std::vector<double> multitask_step(ModelParams& model, std::span<const TaskBatch> batches,
                                   AdamState& opt, Rng& dropout_rng, const AfterUpdateFn& after) {
  const auto& tasks = model.config.tasks;
  if (batches.size() != tasks.size()) {
    throw ConfigError("multitask_step needs one batch per task: got " +
                      std::to_string(batches.size()) + " for " + std::to_string(tasks.size()) +
                      " tasks");
  }
  std::vector<double> losses;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (batches[t].task != tasks[t].name) {
      throw ConfigError("missing batch for task '" + tasks[t].name + "' (found '" +
                        batches[t].task + "' in its position)");
    }
    std::map<std::string, Tensor> grads;
    {
      Tape tape;
      ParamScope scope(model, &tape);
      const Tensor pred = forward(model, scope, batches[t].ids, tasks[t].name, true, dropout_rng);
      const Tensor loss = bce_loss(pred, batches[t].labels);
      losses.push_back(loss.item());
      grads = scope.gradients(tape.backward(loss));
    }
    adam_step(model.params, grads, opt);
    if (after) after(t, model);
  }
  return losses;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in (0, 1)");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must be in [0, 1]");
  if (!(adam.lr > 0.0)) throw ConfigError("learning rate must be positive");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"batch_size", c.batch_size},
       {"max_epochs", c.max_epochs},
       {"patience", c.patience},
       {"seed", c.seed},
       {"validation_fraction", c.validation_fraction},
       {"threshold", c.threshold},
       {"learning_rate", c.adam.lr}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const std::set<std::string> known{"batch_size", "max_epochs", "patience",     "seed",
                                           "validation_fraction", "threshold", "learning_rate"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown training key '" + key + "'");
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
  c.threshold = j.value("threshold", c.threshold);
  c.adam.lr = j.value("learning_rate", c.adam.lr);
}

nlohmann::json to_json(const TrainResult& result) {
  nlohmann::json h = nlohmann::json::array();
  for (const auto& e : result.history) {
    h.push_back({{"epoch", e.epoch},
                 {"train_loss", e.train_loss},
                 {"val_loss", e.val_loss},
                 {"val_f1_class1", e.val_f1_class1},
                 {"improved", e.improved}});
  }
  return {{"epochs", h},
          {"best_epoch", result.best_epoch},
          {"best_val_loss", result.best_val_loss},
          {"stopped_early", result.stopped_early}};
}

namespace {

// Endless supply of shuffled batches for an auxiliary task.
class BatchCycle {
 public:
  BatchCycle(const EncodedDataset& data, std::size_t batch_size, Rng rng)
      : data_(data), batch_size_(batch_size), rng_(rng) {}

  const EncodedBatch& next() {
    if (pos_ == current_.size()) {
      current_ = batches(data_, batch_size_, rng_);
      pos_ = 0;
    }
    return current_[pos_++];
  }

 private:
  const EncodedDataset& data_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<EncodedBatch> current_;
  std::size_t pos_ = 0;
};

void check_dataset(const ModelParams& model, const std::string& task, const EncodedDataset& d) {
  if (d.size() == 0) throw DataError("dataset for task '" + task + "' is empty");
  if (d.num_labels != model.task(task).out_dim) {
    throw ConfigError("task '" + task + "' has " + std::to_string(model.task(task).out_dim) +
                      " outputs but its data has " + std::to_string(d.num_labels) + " labels");
  }
  const auto vocab = static_cast<std::int32_t>(model.tables.at(0).vocab_size());
  for (auto id : d.ids.ids) {
    if (id < 0 || id >= vocab) {
      throw DataError("token id " + std::to_string(id) + " in data for task '" + task +
                      "' exceeds the embedding vocabulary");
    }
  }
}

}  // namespace

TrainResult train(ModelParams model, const std::vector<TaskData>& tasks, const TrainConfig& cfg,
                  const EncodedDataset* validation) {
  cfg.validate();
  const auto& heads = model.config.tasks;
  for (const auto& td : tasks) model.task(td.task);  // rejects data for unknown tasks
  std::vector<const EncodedDataset*> data;
  for (const auto& head : heads) {
    auto it = std::find_if(tasks.begin(), tasks.end(),
                           [&](const TaskData& td) { return td.task == head.name; });
    if (it == tasks.end()) throw ConfigError("no training data for task '" + head.name + "'");
    check_dataset(model, head.name, it->train);
    data.push_back(&it->train);
  }

  const Rng root(cfg.seed);
  const std::string& main_task = heads.front().name;
  EncodedDataset main_train, main_val;
  if (validation) {
    check_dataset(model, main_task, *validation);
    main_train = *data.front();
    main_val = *validation;
  } else {
    Rng split = root.fork("split");
    std::tie(main_train, main_val) = split_validation(*data.front(), cfg.validation_fraction, split);
  }

  std::vector<BatchCycle> cycles;
  for (std::size_t t = 1; t < heads.size(); ++t) {
    cycles.emplace_back(*data[t], cfg.batch_size, root.fork("shuffle/" + heads[t].name));
  }
  Rng main_shuffle = root.fork("shuffle/" + main_task);
  Rng dropout = root.fork("dropout");
  AdamState opt;
  opt.config = cfg.adam;

  TrainResult result;
  result.best = model;
  result.best_val_loss = evaluation_loss(model, main_val, main_task);
  std::size_t since_improvement = 0;
  const std::size_t allowed = std::max<std::size_t>(1, cfg.patience);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    std::vector<double> loss_sum(heads.size(), 0.0);
    const auto main_batches = batches(main_train, cfg.batch_size, main_shuffle);
    std::vector<TaskBatch> step(heads.size());
    for (const auto& mb : main_batches) {
      step[0] = {main_task, mb.ids, mb.labels};
      for (std::size_t t = 1; t < heads.size(); ++t) {
        const EncodedBatch& b = cycles[t - 1].next();
        step[t] = {heads[t].name, b.ids, b.labels};
      }
      const auto losses = multitask_step(model, step, opt, dropout);
      for (std::size_t t = 0; t < heads.size(); ++t) loss_sum[t] += losses[t];
    }
    for (std::size_t t = 0; t < heads.size(); ++t) {
      rec.train_loss[heads[t].name] = loss_sum[t] / static_cast<double>(main_batches.size());
    }
    rec.val_loss = evaluation_loss(model, main_val, main_task);
    rec.val_f1_class1 = evaluate(model, main_val, main_task, cfg.threshold).avg_f1_class1;
    if (!std::isfinite(rec.val_loss)) {
      throw NumericalError("validation loss became non-finite in epoch " + std::to_string(epoch));
    }
    rec.improved = rec.val_loss < result.best_val_loss;
    result.history.push_back(rec);
    if (rec.improved) {
      result.best = model;
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      since_improvement = 0;
    } else if (++since_improvement >= allowed) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

double evaluation_loss(const ModelParams& model, const EncodedDataset& data,
                       const std::string& task, std::size_t batch_size) {
  if (data.size() == 0) throw DataError("cannot compute a loss over an empty dataset");
  double total = 0.0;
  for (const auto& b : sequential_batches(data, batch_size)) {
    const Tensor pred = predict(model, b.ids, task);
    total += bce_loss(pred, b.labels).item() * static_cast<double>(b.ids.rows);
  }
  return total / static_cast<double>(data.size());
}

std::vector<double> predict_dataset(const ModelParams& model, const EncodedDataset& data,
                                    const std::string& task, std::size_t threads,
                                    std::size_t batch_size) {
  const std::size_t k = model.task(task).out_dim;
  std::vector<double> out(data.size() * k);
  const auto all = sequential_batches(data, batch_size);
  auto work = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t b = worker; b < all.size(); b += stride) {
      const Tensor pred = predict(model, all[b].ids, task);
      const auto v = pred.values();
      for (std::size_t i = 0; i < all[b].rows.size(); ++i) {
        std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(i * k), k,
                    out.begin() + static_cast<std::ptrdiff_t>(all[b].rows[i] * k));
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(all.size(), 1));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
  }
  return out;
}

EvaluationTable evaluate(const ModelParams& model, const EncodedDataset& data,
                         const std::string& task, double threshold, std::size_t threads,
                         const std::string& model_name) {
  const std::size_t k = model.task(task).out_dim;
  if (data.num_labels != k) {
    throw ConfigError("task '" + task + "' has " + std::to_string(k) + " outputs but the data has " +
                      std::to_string(data.num_labels) + " labels");
  }
  const auto all = sequential_batches(data, 256);
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(all.size(), 1));
  std::vector<std::vector<ConfusionCounts>> partial(threads, std::vector<ConfusionCounts>(k));
  auto work = [&](std::size_t worker) {
    for (std::size_t b = worker; b < all.size(); b += threads) {
      const Tensor pred = predict(model, all[b].ids, task);
      for (std::size_t l = 0; l < k; ++l) {
        partial[worker][l] += confusion_from_predictions(pred.values(), all[b].labels.values(),
                                                         k, l, threshold);
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  std::vector<LabelReport> reports;
  for (std::size_t l = 0; l < k; ++l) {
    ConfusionCounts total;
    for (const auto& p : partial) total += p[l];
    const std::string name = l < data.label_names.size() ? data.label_names[l] : std::to_string(l);
    reports.push_back(make_label_report(name, total));
  }
  return make_evaluation_table(model_name, std::move(reports));
}

}  // namespace mtme
