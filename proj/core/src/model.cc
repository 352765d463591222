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

#include "mtme/model.h"

#include <algorithm>

#include "mtme/error.h"
#include "mtme/ops.h"

namespace mtme {
namespace {

constexpr const char* kTrunk = "trunk";

template <typename P>
void store(std::map<std::string, Tensor>& out, const std::string& prefix, P params) {
  P::visit(params, [&](const char* name, Tensor& t) { out[prefix + "/" + name] = std::move(t); });
}

template <typename P>
P bind_params(ParamScope& scope, const std::string& prefix) {
  P params;
  P::visit(params, [&](const char* name, Tensor& t) { t = scope.get(prefix + "/" + name); });
  return params;
}

DenseParams bind_dense(ParamScope& scope, const std::string& prefix, Activation activation) {
  DenseParams p = bind_params<DenseParams>(scope, prefix);
  p.activation = activation;
  return p;
}

std::string emb_prefix(std::size_t e) { return std::string(kTrunk) + "/emb" + std::to_string(e); }

void add_heads(ModelParams& model, std::size_t features, Rng& rng) {
  for (const auto& task : model.config.tasks) {
    store(model.params, task.name + "/dense",
          make_dense(features, task.out_dim, Activation::kSigmoid, rng));
  }
}

void require_single(const MultiTaskConfig& cfg, const char* arch) {
  if (cfg.tasks.size() != 1) {
    throw ConfigError(std::string(arch) + " is a single-task architecture; got " +
                      std::to_string(cfg.tasks.size()) + " tasks");
  }
  if (cfg.embedding_sources.size() != 1) {
    throw ConfigError(std::string(arch) + " uses exactly one embedding; got " +
                      std::to_string(cfg.embedding_sources.size()));
  }
}

// Per embedding: BiGRU and BiLSTM in parallel, one convolution after each.
// LSTM-branch and GRU-branch maps are concatenated separately, each pooled by
// max and mean, and the four pooled vectors concatenated.
Tensor multitask_trunk(const ModelParams& model, ParamScope& scope, const IdMatrix& ids,
                       bool training, Rng& rng) {
  const auto& cfg = model.config;
  const SpatialDropoutCfg spatial{cfg.dropout_rate};
  std::vector<Tensor> lstm_maps, gru_maps;
  for (std::size_t e = 0; e < model.tables.size(); ++e) {
    const std::string pre = emb_prefix(e);
    Tensor x = spatial_dropout(embed(ids, model.tables[e]), spatial, rng, training);

    Tensor g = bidirectional(x, bind_params<GruParams>(scope, pre + "/bigru/fwd"),
                             bind_params<GruParams>(scope, pre + "/bigru/bwd"));
    g = dropout(g, cfg.dropout_rate, rng, training);
    Tensor l = bidirectional(x, bind_params<LstmParams>(scope, pre + "/bilstm/fwd"),
                             bind_params<LstmParams>(scope, pre + "/bilstm/bwd"));
    l = dropout(l, cfg.dropout_rate, rng, training);

    Tensor cg = conv1d_forward(g, bind_params<Conv1dParams>(scope, pre + "/conv_gru"));
    Tensor cl = conv1d_forward(l, bind_params<Conv1dParams>(scope, pre + "/conv_lstm"));
    gru_maps.push_back(dropout(cg, cfg.dropout_rate, rng, training));
    lstm_maps.push_back(dropout(cl, cfg.dropout_rate, rng, training));
  }
  const std::size_t channel_axis = 2;
  Tensor lstm_cat = concat(lstm_maps, channel_axis);
  Tensor gru_cat = concat(gru_maps, channel_axis);
  return concat(std::vector<Tensor>{pool_over_time(PoolKind::kMax, lstm_cat),
                                    pool_over_time(PoolKind::kAvg, lstm_cat),
                                    pool_over_time(PoolKind::kMax, gru_cat),
                                    pool_over_time(PoolKind::kAvg, gru_cat)},
                1);
}

Tensor bigru_trunk(const ModelParams& model, ParamScope& scope, const IdMatrix& ids) {
  const std::string pre = kTrunk;
  Tensor x = embed(ids, model.tables.at(0));
  Tensor h1 = bidirectional(x, bind_params<GruParams>(scope, pre + "/bigru1/fwd"),
                            bind_params<GruParams>(scope, pre + "/bigru1/bwd"));
  Tensor h2 = bidirectional(h1, bind_params<GruParams>(scope, pre + "/bigru2/fwd"),
                            bind_params<GruParams>(scope, pre + "/bigru2/bwd"));
  return pool_over_time(PoolKind::kMax, h2);
}

Tensor cnn_trunk(const ModelParams& model, ParamScope& scope, const IdMatrix& ids) {
  const auto& cfg = model.config;
  Tensor x = embed(ids, model.tables.at(0));
  std::vector<Tensor> pooled;
  for (std::size_t k : cfg.baseline_cnn_kernels) {
    Tensor c = conv1d_forward(
        x, bind_params<Conv1dParams>(scope, std::string(kTrunk) + "/conv_k" + std::to_string(k)));
    pooled.push_back(pool_over_time(PoolKind::kMax, c));
  }
  return dense_forward(concat(pooled, 1),
                       bind_dense(scope, std::string(kTrunk) + "/hidden", Activation::kRelu));
}

}  // namespace

std::string to_string(ArchKind kind) {
  switch (kind) {
    case ArchKind::kMultitask: return "multitask";
    case ArchKind::kBiGru: return "bigru";
    case ArchKind::kCnn: return "cnn";
    case ArchKind::kBiRnnCnn: return "birnncnn";
    case ArchKind::kTfidfLogreg: return "tfidf_logreg";
    case ArchKind::kTfidfTree: return "tfidf_tree";
  }
  return "unknown";
}

ArchKind arch_from_string(std::string_view name) {
  for (ArchKind k : {ArchKind::kMultitask, ArchKind::kBiGru, ArchKind::kCnn, ArchKind::kBiRnnCnn,
                     ArchKind::kTfidfLogreg, ArchKind::kTfidfTree}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown architecture '" + std::string(name) + "'");
}

bool is_neural(ArchKind kind) {
  return kind != ArchKind::kTfidfLogreg && kind != ArchKind::kTfidfTree;
}

void MultiTaskConfig::validate() const {
  if (embedding_sources.empty() || embedding_sources.size() > 3) {
    throw ConfigError("between 1 and 3 embedding sources are required, got " +
                      std::to_string(embedding_sources.size()));
  }
  if (tasks.empty()) throw ConfigError("at least one task is required");
  std::set<std::string> names;
  for (const auto& t : tasks) {
    if (t.name.empty() || t.name == kTrunk || t.name == "frozen" ||
        t.name.find('/') != std::string::npos) {
      throw ConfigError("invalid task name '" + t.name + "'");
    }
    if (!names.insert(t.name).second) throw ConfigError("duplicate task name '" + t.name + "'");
    if (t.out_dim == 0) throw ConfigError("task '" + t.name + "' needs out_dim >= 1");
  }
  if (rnn_hidden == 0 || cnn_filters == 0 || cnn_kernel == 0 || seq_len == 0) {
    throw ConfigError("seq_len, rnn_hidden, cnn_filters and cnn_kernel must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must be in [0, 1)");
  }
  if (baseline_cnn_kernels.empty() || baseline_cnn_filters == 0 || baseline_cnn_hidden == 0) {
    throw ConfigError("baseline CNN needs kernels, filters and hidden units");
  }
}

MultiTaskConfig MultiTaskConfig::paper_default() {
  MultiTaskConfig cfg;
  cfg.embedding_sources = {"fasttext", "glove", "custom_glove"};
  cfg.tasks = {{"main", 6}, {"toxic", 1}, {"attack", 1}, {"aggression", 1}};
  return cfg;
}

void to_json(nlohmann::json& j, const TaskHead& t) {
  j = nlohmann::json{{"name", t.name}, {"out_dim", t.out_dim}};
}

void from_json(const nlohmann::json& j, TaskHead& t) {
  j.at("name").get_to(t.name);
  j.at("out_dim").get_to(t.out_dim);
}

void to_json(nlohmann::json& j, const MultiTaskConfig& c) {
  j = nlohmann::json{{"seq_len", c.seq_len},
                     {"embedding_sources", c.embedding_sources},
                     {"rnn_hidden", c.rnn_hidden},
                     {"cnn_filters", c.cnn_filters},
                     {"cnn_kernel", c.cnn_kernel},
                     {"dropout_rate", c.dropout_rate},
                     {"tasks", c.tasks},
                     {"baseline_cnn_filters", c.baseline_cnn_filters},
                     {"baseline_cnn_kernels", c.baseline_cnn_kernels},
                     {"baseline_cnn_hidden", c.baseline_cnn_hidden}};
}

void from_json(const nlohmann::json& j, MultiTaskConfig& c) {
  j.at("seq_len").get_to(c.seq_len);
  j.at("embedding_sources").get_to(c.embedding_sources);
  j.at("rnn_hidden").get_to(c.rnn_hidden);
  j.at("cnn_filters").get_to(c.cnn_filters);
  j.at("cnn_kernel").get_to(c.cnn_kernel);
  j.at("dropout_rate").get_to(c.dropout_rate);
  j.at("tasks").get_to(c.tasks);
  j.at("baseline_cnn_filters").get_to(c.baseline_cnn_filters);
  j.at("baseline_cnn_kernels").get_to(c.baseline_cnn_kernels);
  j.at("baseline_cnn_hidden").get_to(c.baseline_cnn_hidden);
}

bool ModelParams::is_trunk_name(std::string_view name) {
  return name.starts_with(std::string(kTrunk) + "/");
}

std::vector<std::string> ModelParams::trunk_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : params) {
    if (is_trunk_name(name)) out.push_back(name);
  }
  return out;
}

std::vector<std::string> ModelParams::head_names(const std::string& task) const {
  std::vector<std::string> out;
  const std::string prefix = task + "/";
  for (const auto& [name, _] : params) {
    if (name.starts_with(prefix)) out.push_back(name);
  }
  return out;
}

const TaskHead& ModelParams::task(const std::string& name) const {
  for (const auto& t : config.tasks) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown task '" + name + "'");
}

std::size_t ModelParams::trunk_feature_dim() const {
  switch (arch) {
    case ArchKind::kMultitask:
    case ArchKind::kBiRnnCnn:
      return 4 * tables.size() * config.cnn_filters;
    case ArchKind::kBiGru:
      return 2 * config.rnn_hidden;
    case ArchKind::kCnn:
      return config.baseline_cnn_hidden;
    default:
      throw ConfigError("architecture " + to_string(arch) + " has no neural trunk");
  }
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params) n += t.numel();
  return n;
}

ParamScope::ParamScope(const ModelParams& model, Tape* tape) : model_(model), tape_(tape) {}

const Tensor& ParamScope::get(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  auto src = model_.params.find(name);
  if (src == model_.params.end()) throw IndexError("model has no parameter '" + name + "'");
  touched_.insert(name);
  Tensor t = tape_ ? tape_->watch(src->second) : src->second;
  return bound_.emplace(name, std::move(t)).first->second;
}

std::map<std::string, Tensor> ParamScope::gradients(const Gradients& grads) const {
  std::map<std::string, Tensor> out;
  for (const auto& [name, tracked] : bound_) {
    if (const Tensor* g = grads.find(tracked)) out.emplace(name, *g);
  }
  return out;
}

ModelParams build_multitask(const MultiTaskConfig& cfg, std::vector<EmbeddingTable> tables,
                            Rng& rng) {
  cfg.validate();
  if (tables.size() != cfg.embedding_sources.size()) {
    throw ConfigError("got " + std::to_string(tables.size()) + " embedding tables for " +
                      std::to_string(cfg.embedding_sources.size()) + " embedding sources");
  }
  if (cfg.seq_len < cfg.cnn_kernel) {
    throw ShapeError("sequence too short: seq_len " + std::to_string(cfg.seq_len) +
                     " < cnn_kernel " + std::to_string(cfg.cnn_kernel));
  }
  ModelParams model;
  model.arch = ArchKind::kMultitask;
  model.config = cfg;
  Rng init = rng.fork("init");
  const std::size_t h = cfg.rnn_hidden;
  for (std::size_t e = 0; e < tables.size(); ++e) {
    const std::string pre = emb_prefix(e);
    const std::size_t dim = tables[e].dim();
    store(model.params, pre + "/bigru/fwd", make_gru(dim, h, init));
    store(model.params, pre + "/bigru/bwd", make_gru(dim, h, init));
    store(model.params, pre + "/bilstm/fwd", make_lstm(dim, h, init));
    store(model.params, pre + "/bilstm/bwd", make_lstm(dim, h, init));
    store(model.params, pre + "/conv_gru", make_conv1d(2 * h, cfg.cnn_filters, cfg.cnn_kernel, init));
    store(model.params, pre + "/conv_lstm", make_conv1d(2 * h, cfg.cnn_filters, cfg.cnn_kernel, init));
  }
  model.tables = std::move(tables);
  add_heads(model, model.trunk_feature_dim(), init);
  return model;
}

ModelParams build_birnncnn(const MultiTaskConfig& cfg, EmbeddingTable table, Rng& rng) {
  require_single(cfg, "birnncnn");
  ModelParams model = build_multitask(cfg, {std::move(table)}, rng);
  model.arch = ArchKind::kBiRnnCnn;
  return model;
}

ModelParams build_bigru(const MultiTaskConfig& cfg, EmbeddingTable table, Rng& rng) {
  cfg.validate();
  require_single(cfg, "bigru");
  ModelParams model;
  model.arch = ArchKind::kBiGru;
  model.config = cfg;
  Rng init = rng.fork("init");
  const std::size_t h = cfg.rnn_hidden;
  const std::string pre = kTrunk;
  store(model.params, pre + "/bigru1/fwd", make_gru(table.dim(), h, init));
  store(model.params, pre + "/bigru1/bwd", make_gru(table.dim(), h, init));
  store(model.params, pre + "/bigru2/fwd", make_gru(2 * h, h, init));
  store(model.params, pre + "/bigru2/bwd", make_gru(2 * h, h, init));
  model.tables.push_back(std::move(table));
  add_heads(model, model.trunk_feature_dim(), init);
  return model;
}

ModelParams build_cnn(const MultiTaskConfig& cfg, EmbeddingTable table, Rng& rng) {
  cfg.validate();
  require_single(cfg, "cnn");
  const std::size_t widest =
      *std::max_element(cfg.baseline_cnn_kernels.begin(), cfg.baseline_cnn_kernels.end());
  if (cfg.seq_len < widest) {
    throw ShapeError("sequence too short: seq_len " + std::to_string(cfg.seq_len) +
                     " < largest kernel " + std::to_string(widest));
  }
  ModelParams model;
  model.arch = ArchKind::kCnn;
  model.config = cfg;
  Rng init = rng.fork("init");
  const std::string pre = kTrunk;
  for (std::size_t k : cfg.baseline_cnn_kernels) {
    store(model.params, pre + "/conv_k" + std::to_string(k),
          make_conv1d(table.dim(), cfg.baseline_cnn_filters, k, init));
  }
  store(model.params, pre + "/hidden",
        make_dense(cfg.baseline_cnn_filters * cfg.baseline_cnn_kernels.size(),
                   cfg.baseline_cnn_hidden, Activation::kRelu, init));
  model.tables.push_back(std::move(table));
  add_heads(model, model.trunk_feature_dim(), init);
  return model;
}

ModelParams build_model(ArchKind arch, const MultiTaskConfig& cfg,
                        std::vector<EmbeddingTable> tables, Rng& rng) {
  if (arch == ArchKind::kMultitask) return build_multitask(cfg, std::move(tables), rng);
  if (tables.size() != 1) {
    throw ConfigError(to_string(arch) + " needs exactly one embedding table, got " +
                      std::to_string(tables.size()));
  }
  switch (arch) {
    case ArchKind::kBiGru: return build_bigru(cfg, std::move(tables[0]), rng);
    case ArchKind::kCnn: return build_cnn(cfg, std::move(tables[0]), rng);
    case ArchKind::kBiRnnCnn: return build_birnncnn(cfg, std::move(tables[0]), rng);
    default: throw ConfigError(to_string(arch) + " is not a neural architecture");
  }
}

Tensor trunk_features(const ModelParams& model, ParamScope& scope, const IdMatrix& ids,
                      bool training, Rng& rng) {
  switch (model.arch) {
    case ArchKind::kMultitask:
    case ArchKind::kBiRnnCnn:
      return multitask_trunk(model, scope, ids, training, rng);
    case ArchKind::kBiGru:
      return bigru_trunk(model, scope, ids);
    case ArchKind::kCnn:
      return cnn_trunk(model, scope, ids);
    default:
      throw ConfigError(to_string(model.arch) + " has no neural forward pass");
  }
}

Tensor forward(const ModelParams& model, ParamScope& scope, const IdMatrix& ids,
               const std::string& task, bool training, Rng& rng) {
  model.task(task);  // validates the name before any work
  Tensor features = trunk_features(model, scope, ids, training, rng);
  return dense_forward(features, bind_dense(scope, task + "/dense", Activation::kSigmoid));
}

Tensor predict(const ModelParams& model, const IdMatrix& ids, const std::string& task) {
  ParamScope scope(model);
  Rng unused(0);
  return forward(model, scope, ids, task, false, unused);
}

}  // namespace mtme
