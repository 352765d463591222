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

#include "mtme/gradient_suite.h"

#include "mtme/error.h"
#include "mtme/layers.h"
#include "mtme/model.h"
#include "mtme/ops.h"

namespace mtme {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = scale * rng.uniform(-1.0, 1.0);
  return Tensor(std::move(shape), std::move(v));
}

// Weighted sum with fixed random weights, so that no output entry's gradient
// can cancel against another's.
Tensor probe_loss(const Tensor& out, const Tensor& weights) { return sum(mul(out, weights)); }

template <typename P>
void flatten(P& p, std::vector<Tensor>& out) {
  P::visit(p, [&](const char*, Tensor& t) { out.push_back(t); });
}

template <typename P>
P unflatten(std::span<const Tensor> flat, std::size_t& pos) {
  P p;
  P::visit(p, [&](const char*, Tensor& t) { t = flat[pos++]; });
  return p;
}

GradCheckReport check_dense(Rng& rng) {
  DenseParams p = make_dense(4, 5, Activation::kSigmoid, rng);
  p.bias = random_tensor({5}, rng, 0.5);
  const Tensor x = random_tensor({3, 4}, rng);
  const Tensor w = random_tensor({3, 5}, rng);
  std::vector<Tensor> params{x};
  flatten(p, params);
  return grad_check_report(
      [&](std::span<const Tensor> ps) {
        std::size_t pos = 1;
        DenseParams q = unflatten<DenseParams>(ps, pos);
        q.activation = Activation::kSigmoid;
        return probe_loss(dense_forward(ps[0], q), w);
      },
      params);
}

GradCheckReport check_conv1d(Rng& rng) {
  Conv1dParams p = make_conv1d(3, 4, 2, rng);
  p.bias = random_tensor({4}, rng, 0.3);
  const Tensor x = random_tensor({2, 6, 3}, rng);
  const Tensor w = random_tensor({2, 5, 4}, rng);
  std::vector<Tensor> params{x};
  flatten(p, params);
  return grad_check_report(
      [&](std::span<const Tensor> ps) {
        std::size_t pos = 1;
        return probe_loss(conv1d_forward(ps[0], unflatten<Conv1dParams>(ps, pos)), w);
      },
      params);
}

constexpr std::size_t kSteps = 5;
constexpr std::size_t kHidden = 4;

GradCheckReport check_gru(Rng& rng) {
  GruParams p = make_gru(3, kHidden, rng);
  const Tensor x = random_tensor({2, kSteps, 3}, rng);
  const Tensor h0 = random_tensor({2, kHidden}, rng, 0.5);
  const Tensor w = random_tensor({2, kSteps, kHidden}, rng);
  std::vector<Tensor> params{x, h0};
  flatten(p, params);
  return grad_check_report(
      [&](std::span<const Tensor> ps) {
        std::size_t pos = 2;
        return probe_loss(gru_forward(ps[0], unflatten<GruParams>(ps, pos), ps[1]), w);
      },
      params);
}

GradCheckReport check_lstm(Rng& rng) {
  LstmParams p = make_lstm(3, kHidden, rng);
  const Tensor x = random_tensor({2, kSteps, 3}, rng);
  const Tensor h0 = random_tensor({2, kHidden}, rng, 0.5);
  const Tensor c0 = random_tensor({2, kHidden}, rng, 0.5);
  const Tensor w = random_tensor({2, kSteps, kHidden}, rng);
  std::vector<Tensor> params{x, h0, c0};
  flatten(p, params);
  return grad_check_report(
      [&](std::span<const Tensor> ps) {
        std::size_t pos = 3;
        return probe_loss(lstm_forward(ps[0], unflatten<LstmParams>(ps, pos), ps[1], ps[2]), w);
      },
      params);
}

GradCheckReport check_bidir(Rng& rng) {
  GruParams fwd = make_gru(3, kHidden, rng);
  LstmParams bwd = make_lstm(3, kHidden, rng);
  const Tensor x = random_tensor({2, kSteps, 3}, rng);
  const Tensor w = random_tensor({2, kSteps, 2 * kHidden}, rng);
  std::vector<Tensor> params{x};
  flatten(fwd, params);
  flatten(bwd, params);
  return grad_check_report(
      [&](std::span<const Tensor> ps) {
        std::size_t pos = 1;
        GruParams f = unflatten<GruParams>(ps, pos);
        LstmParams b = unflatten<LstmParams>(ps, pos);
        return probe_loss(bidirectional(ps[0], f, b), w);
      },
      params);
}

GradCheckReport check_multitask(Rng& rng) {
  constexpr std::size_t kVocab = 7;
  MultiTaskConfig cfg;
  cfg.seq_len = 8;
  cfg.embedding_sources = {"a", "b"};
  cfg.rnn_hidden = kHidden;
  cfg.cnn_filters = 3;
  cfg.cnn_kernel = 2;
  cfg.tasks = {{"main", 3}, {"aux", 1}};
  std::vector<EmbeddingTable> tables{EmbeddingTable(random_tensor({kVocab, 3}, rng)),
                                     EmbeddingTable(random_tensor({kVocab, 4}, rng))};
  ModelParams model = build_multitask(cfg, std::move(tables), rng);

  IdMatrix ids(2, cfg.seq_len);
  for (auto& id : ids.ids) id = static_cast<std::int32_t>(rng.below(kVocab));
  ids.at(1, 7) = 0;  // some padding
  ids.at(1, 6) = 0;
  Tensor target = Tensor::zeros({2, 3});
  auto tv = target.mutable_values();
  tv[0] = 1.0;
  tv[4] = 1.0;
  tv[5] = 1.0;

  std::vector<std::string> names;
  std::vector<Tensor> params;
  for (const auto& name : model.trunk_names()) names.push_back(name);
  for (const auto& name : model.head_names("main")) names.push_back(name);
  for (const auto& name : names) params.push_back(model.params.at(name));
  const std::uint64_t dropout_seed = rng.next_u64();

  return grad_check_report(
      [&](std::span<const Tensor> ps) {
        ModelParams m = model;
        for (std::size_t i = 0; i < names.size(); ++i) m.params[names[i]] = ps[i];
        ParamScope scope(m);
        Rng dropout_rng(dropout_seed);  // identical masks on every evaluation
        return bce_loss(forward(m, scope, ids, "main", /*training=*/true, dropout_rng), target);
      },
      params);
}

}  // namespace

const std::vector<std::string>& gradient_scopes() {
  static const std::vector<std::string> scopes{"dense", "conv1d", "gru",
                                               "lstm",  "bidir",  "multitask"};
  return scopes;
}

GradScopeResult run_gradient_scope(std::string_view scope, std::uint64_t seed) {
  Rng rng = Rng(seed).fork(scope);
  GradScopeResult r;
  r.scope = std::string(scope);
  if (scope == "dense") r.report = check_dense(rng);
  else if (scope == "conv1d") r.report = check_conv1d(rng);
  else if (scope == "gru") r.report = check_gru(rng);
  else if (scope == "lstm") r.report = check_lstm(rng);
  else if (scope == "bidir") r.report = check_bidir(rng);
  else if (scope == "multitask") r.report = check_multitask(rng);
  else throw ConfigError("unknown gradient-check scope '" + std::string(scope) + "'");
  return r;
}

std::vector<GradScopeResult> run_gradient_suite(std::string_view scope, std::uint64_t seed) {
  std::vector<GradScopeResult> out;
  if (scope == "all") {
    for (const auto& s : gradient_scopes()) out.push_back(run_gradient_scope(s, seed));
  } else {
    out.push_back(run_gradient_scope(scope, seed));
  }
  return out;
}

}  // namespace mtme
