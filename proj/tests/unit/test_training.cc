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

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mtme/embeddings.h"
#include "mtme/error.h"
#include "mtme/ops.h"
#include "mtme/synthetic.h"
#include "mtme/training.h"

namespace mtme {
namespace {

TEST(AdamTest, ZeroGradientLeavesParameters) {
  std::map<std::string, Tensor> params{{"g/w", Tensor::vector({1.5, -2})}};
  std::map<std::string, Tensor> grads{{"g/w", Tensor::zeros({2})}};
  AdamState st;
  adam_step(params, grads, st);
  EXPECT_EQ(params.at("g/w")[0], 1.5);
  EXPECT_EQ(params.at("g/w")[1], -2.0);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  std::map<std::string, Tensor> params{{"g/w", Tensor::scalar(0.0)}};
  std::map<std::string, Tensor> grads{{"g/w", Tensor::scalar(1.0)}};
  AdamState st;
  adam_step(params, grads, st);
  // m̂ = 1, v̂ = 1 after bias correction.
  EXPECT_NEAR(params.at("g/w").item(), -1e-3 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(st.step("g"), 1u);
}

TEST(AdamTest, ConstantGradientApproachesUnitSteps) {
  std::map<std::string, Tensor> params{{"g/w", Tensor::scalar(0.0)}};
  std::map<std::string, Tensor> grads{{"g/w", Tensor::scalar(0.37)}};
  AdamState st;
  double prev = 0.0, delta = 0.0;
  for (int i = 0; i < 500; ++i) {
    adam_step(params, grads, st);
    delta = prev - params.at("g/w").item();
    prev = params.at("g/w").item();
  }
  EXPECT_NEAR(delta, 1e-3, 1e-9);
}

TEST(AdamTest, GroupsCountStepsSeparately) {
  std::map<std::string, Tensor> params{{"trunk/a", Tensor::scalar(0)},
                                       {"trunk/b", Tensor::scalar(0)},
                                       {"head/w", Tensor::scalar(0)}};
  AdamState st;
  adam_step(params, {{"trunk/a", Tensor::scalar(1)}, {"trunk/b", Tensor::scalar(1)}}, st);
  adam_step(params, {{"trunk/a", Tensor::scalar(1)}, {"head/w", Tensor::scalar(1)}}, st);
  EXPECT_EQ(st.step("trunk"), 2u);
  EXPECT_EQ(st.step("head"), 1u);
  EXPECT_EQ(param_group("main/dense/weight"), "main");
}

TEST(AdamTest, NonFiniteGradientAbortsWithoutChanges) {
  std::map<std::string, Tensor> params{{"a/x", Tensor::scalar(1)}, {"b/y", Tensor::scalar(2)}};
  std::map<std::string, Tensor> grads{
      {"a/x", Tensor::scalar(1)},
      {"b/y", Tensor::scalar(std::numeric_limits<double>::quiet_NaN())}};
  AdamState st;
  try {
    adam_step(params, grads, st);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("b/y"), std::string::npos);
  }
  EXPECT_EQ(params.at("a/x").item(), 1.0);
  EXPECT_EQ(st.step("a"), 0u);
}

struct Fixture {
  ModelParams model;
  std::vector<TaskData> tasks;
};

SyntheticSpec two_label_spec(std::size_t n) {
  SyntheticSpec s;
  s.n_records = n;
  s.label_names = {"x", "y"};
  s.rules = {{"x", {"xenon"}, 0.4, 1}, {"y", {"yak"}, 0.4, 1}};
  s.noise_vocab_size = 20;
  s.min_tokens = 3;
  s.max_tokens = 6;
  return s;
}

Fixture make_fixture(std::size_t n_tasks, std::uint64_t seed) {
  Corpus main = synthetic_corpus(two_label_spec(60), seed);
  Vocabulary vocab = build_vocab(main, 1);
  Rng rng(seed);
  MultiTaskConfig cfg;
  cfg.seq_len = 6;
  cfg.rnn_hidden = 4;
  cfg.cnn_filters = 3;
  cfg.embedding_sources = {"r"};
  cfg.tasks = {{"main", 2}};
  Fixture f;
  f.tasks.push_back({"main", encode(main, vocab, cfg.seq_len)});
  for (std::size_t t = 1; t < n_tasks; ++t) {
    const std::string name = "aux" + std::to_string(t);
    cfg.tasks.push_back({name, 1});
    SyntheticSpec s = two_label_spec(30);
    s.label_names = {"x"};
    s.rules.resize(1);
    f.tasks.push_back({name, encode(synthetic_corpus(s, seed + t), vocab, cfg.seq_len)});
  }
  f.model = build_multitask(cfg, {random_embeddings(vocab.size(), 4, rng)}, rng);
  return f;
}

std::vector<TaskBatch> first_batches(const Fixture& f, std::size_t size) {
  std::vector<TaskBatch> out;
  for (const auto& td : f.tasks) {
    const auto b = sequential_batches(td.train, size).front();
    out.push_back({td.task, b.ids, b.labels});
  }
  return out;
}

TEST(MultitaskStepTest, CountsUpdatesPerGroup) {
  Fixture f = make_fixture(4, 1);
  AdamState opt;
  Rng d(0);
  const auto losses = multitask_step(f.model, first_batches(f, 5), opt, d);
  EXPECT_EQ(losses.size(), 4u);
  EXPECT_EQ(opt.step("trunk"), 4u);
  EXPECT_EQ(opt.step("main"), 1u);
  for (int t = 1; t < 4; ++t) EXPECT_EQ(opt.step("aux" + std::to_string(t)), 1u);
}

TEST(MultitaskStepTest, SingleTaskEqualsPlainStep) {
  Fixture a = make_fixture(1, 2);
  Fixture b = make_fixture(1, 2);
  AdamState oa, ob;
  Rng da(5), db(5);
  const auto batches = first_batches(a, 8);
  multitask_step(a.model, batches, oa, da);

  // Hand-rolled single-task step: forward, BCE, backward, one Adam update.
  Tape tape;
  ParamScope scope(b.model, &tape);
  Tensor pred = forward(b.model, scope, batches[0].ids, "main", true, db);
  Tensor loss = bce_loss(pred, batches[0].labels);
  adam_step(b.model.params, scope.gradients(tape.backward(loss)), ob);

  for (const auto& [name, t] : a.model.params) {
    EXPECT_TRUE(bitwise_equal(t, b.model.params.at(name))) << name;
  }
}

TEST(MultitaskStepTest, BatchOrderMustMatchTasks) {
  Fixture f = make_fixture(2, 3);
  AdamState opt;
  Rng d(0);
  auto batches = first_batches(f, 4);
  std::swap(batches[0], batches[1]);
  EXPECT_THROW(multitask_step(f.model, batches, opt, d), ConfigError);
  batches.pop_back();
  EXPECT_THROW(multitask_step(f.model, batches, opt, d), ConfigError);
}

TEST(TrainTest, EmptyDatasetIsRejected) {
  Fixture f = make_fixture(1, 4);
  f.tasks[0].train = f.tasks[0].train.subset({});
  TrainConfig cfg;
  EXPECT_THROW(train(f.model, f.tasks, cfg), DataError);
}

TEST(TrainTest, LossDecreasesAndRunsAreDeterministic) {
  Fixture f = make_fixture(2, 5);
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.max_epochs = 4;
  cfg.patience = 10;
  cfg.seed = 11;
  cfg.adam.lr = 0.01;
  TrainResult a = train(f.model, f.tasks, cfg);
  TrainResult b = train(f.model, f.tasks, cfg);
  ASSERT_EQ(a.history.size(), 4u);
  for (std::size_t e = 1; e < 3; ++e) {
    EXPECT_LT(a.history[e].train_loss.at("main"), a.history[e - 1].train_loss.at("main"));
  }
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  for (const auto& [name, t] : a.best.params) {
    EXPECT_TRUE(bitwise_equal(t, b.best.params.at(name))) << name;
  }
}

TEST(TrainTest, ZeroPatienceStopsAtFirstNonImprovingEpoch) {
  Fixture f = make_fixture(1, 6);
  // Validation labels are the complement of the training labels, so fitting
  // the training data makes validation worse.
  EncodedDataset val = f.tasks[0].train;
  for (double& y : val.labels) y = 1.0 - y;
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_epochs = 20;
  cfg.patience = 0;
  cfg.adam.lr = 0.02;
  TrainResult r = train(f.model, f.tasks, cfg, &val);
  ASSERT_FALSE(r.history.empty());
  EXPECT_TRUE(r.stopped_early);
  EXPECT_FALSE(r.history.back().improved);
  for (std::size_t e = 0; e + 1 < r.history.size(); ++e) EXPECT_TRUE(r.history[e].improved);
  EXPECT_LT(r.history.size(), 20u);
}

TEST(TrainTest, ConfigValidationAndJson) {
  TrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  nlohmann::json j = {{"batch_size", 16}, {"learning_rate", 0.01}};
  TrainConfig c = j.get<TrainConfig>();
  EXPECT_EQ(c.batch_size, 16u);
  EXPECT_EQ(c.adam.lr, 0.01);
  EXPECT_THROW((nlohmann::json{{"epochs", 3}}.get<TrainConfig>()), ConfigError);
}

TEST(EvaluateTest, ThreadCountDoesNotChangeCounts) {
  Fixture f = make_fixture(1, 7);
  const EncodedDataset& d = f.tasks[0].train;
  EvaluationTable one = evaluate(f.model, d, "main", 0.5, 1);
  EvaluationTable four = evaluate(f.model, d, "main", 0.5, 4);
  ASSERT_EQ(one.labels.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(one.labels[i].counts, four.labels[i].counts);
  for (const auto& l : one.labels) {
    EXPECT_EQ(l.counts.total(), d.size());
    EXPECT_GE(l.class1.f1, 0.0);
    EXPECT_LE(l.class1.f1, 1.0);
  }
}

}  // namespace
}  // namespace mtme
