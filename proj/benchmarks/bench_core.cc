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

#include <vector>

#include <benchmark/benchmark.h>

#include "mtme/embeddings.h"
#include "mtme/layers.h"
#include "mtme/ops.h"
#include "mtme/tape.h"
#include "mtme/training.h"

namespace mtme {
namespace {

Tensor random_tensor(const Shape& shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor(shape, std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Tensor a = random_tensor({n, n}, rng), b = random_tensor({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

// Batch 32 over seq_len 100 with 300-dim inputs, the default text shape.
void BM_GruForward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  GruParams p = make_gru(300, hidden, rng);
  Tensor x = random_tensor({32, 100, 300}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gru_forward(x, p));
}
BENCHMARK(BM_GruForward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_GruForwardBackward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  GruParams p = make_gru(300, hidden, rng);
  Tensor x = random_tensor({32, 100, 300}, rng);
  for (auto _ : state) {
    Tape tape;
    GruParams w = p;
    GruParams::visit(w, [&](const char*, Tensor& t) { t = tape.watch(t); });
    benchmark::DoNotOptimize(tape.backward(sum(gru_forward(x, w))));
  }
}
BENCHMARK(BM_GruForwardBackward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

// One full multitask_step (4 task updates) on a reduced-width model.
void BM_MultitaskStep(benchmark::State& state) {
  const auto embeddings = static_cast<std::size_t>(state.range(0));
  MultiTaskConfig cfg = MultiTaskConfig::paper_default();
  cfg.seq_len = 50;
  cfg.rnn_hidden = 32;
  cfg.cnn_filters = 16;
  cfg.embedding_sources.resize(embeddings);
  Rng rng(4);
  std::vector<EmbeddingTable> tables;
  for (std::size_t i = 0; i < embeddings; ++i) tables.push_back(random_embeddings(500, 50, rng));
  ModelParams model = build_multitask(cfg, std::move(tables), rng);
  std::vector<TaskBatch> batches;
  for (const auto& task : cfg.tasks) {
    IdMatrix ids(16, cfg.seq_len);
    for (auto& id : ids.ids) id = static_cast<std::int32_t>(rng.below(500));
    std::vector<double> y(16 * task.out_dim);
    for (auto& v : y) v = rng.bernoulli(0.3) ? 1.0 : 0.0;
    batches.push_back({task.name, ids, Tensor({16, task.out_dim}, y)});
  }
  AdamState opt;
  Rng dropout(5);
  for (auto _ : state) benchmark::DoNotOptimize(multitask_step(model, batches, opt, dropout));
}
BENCHMARK(BM_MultitaskStep)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mtme

BENCHMARK_MAIN();
