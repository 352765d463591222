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
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mtme/classical.h"
#include "mtme/error.h"
#include "mtme/rng.h"
#include "mtme/serialization.h"

namespace mtme {
namespace {

Corpus docs(std::vector<std::string> texts, std::vector<std::uint8_t> labels = {}) {
  Corpus c;
  c.label_names = {"y"};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    c.records.push_back({"d" + std::to_string(i), texts[i], {labels.empty() ? std::uint8_t{0} : labels[i]}});
  }
  return c;
}

double feature(const TfidfModel& m, const std::string& token) {
  return m.idf[static_cast<std::size_t>(m.vocab.index(token) - 2)];
}

SparseVector dense_row(std::vector<double> v) {
  SparseVector x;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    x.index.push_back(static_cast<std::uint32_t>(i));
    x.value.push_back(v[i]);
  }
  return x;
}

TEST(TfidfTest, IdfHandValues) {
  TfidfModel m = fit_tfidf(docs({"common rare", "common", "common x", "common x"}));
  EXPECT_EQ(m.documents, 4u);
  EXPECT_NEAR(feature(m, "common"), std::log(5.0 / 5.0) + 1.0, 1e-12);
  EXPECT_NEAR(feature(m, "rare"), std::log(5.0 / 2.0) + 1.0, 1e-12);
  EXPECT_NEAR(feature(m, "rare"), 1.9163, 5e-5);
  EXPECT_NEAR(feature(m, "x"), std::log(5.0 / 3.0) + 1.0, 1e-12);
}

TEST(TfidfTest, TransformIsL2Normalised) {
  TfidfModel m = fit_tfidf(docs({"common rare", "common", "common x", "common x"}));
  SparseVector v = m.transform("rare common common");
  const double a = 2 * feature(m, "common"), b = feature(m, "rare");
  const double n = std::sqrt(a * a + b * b);
  ASSERT_EQ(v.index.size(), 2u);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  for (std::size_t i = 0; i < 2; ++i) {
    const bool is_rare = v.index[i] == static_cast<std::uint32_t>(m.vocab.index("rare") - 2);
    EXPECT_NEAR(v.value[i], (is_rare ? b : a) / n, 1e-15);
  }
  EXPECT_TRUE(m.transform("").index.empty());
  EXPECT_TRUE(m.transform("unseen words").index.empty());
  EXPECT_THROW(fit_tfidf(Corpus{}), DataError);
}

TEST(GiniTest, HandValues) {
  EXPECT_NEAR(gini(1, 4), 0.375, 1e-12);
  EXPECT_NEAR(gini(2, 4), 0.5, 1e-12);
  EXPECT_EQ(gini(0, 7), 0.0);
  EXPECT_EQ(gini(7, 7), 0.0);
  EXPECT_NEAR(gini(1, 3), 1.0 - 1.0 / 9.0 - 4.0 / 9.0, 1e-12);
}

TEST(TreeTest, PureNodeIsLeaf) {
  SparseMatrix x{1, {dense_row({1}), dense_row({2}), dense_row({3})}};
  DecisionTree t = train_tree(x, {1, 1, 1});
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_TRUE(t.nodes[0].is_leaf());
  EXPECT_EQ(t.nodes[0].positive_fraction, 1.0);
}

TEST(TreeTest, OneFeatureSplitsAtMidpoint) {
  SparseMatrix x;
  x.dim = 1;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 12; ++i) {
    x.rows.push_back(dense_row({i < 6 ? 0.0 : 1.0}));
    y.push_back(i < 6 ? 0 : 1);
  }
  DecisionTree t = train_tree(x, y);
  EXPECT_EQ(t.nodes[0].feature, 0);
  EXPECT_EQ(t.nodes[0].threshold, 0.5);
  EXPECT_NEAR(t.nodes[0].impurity, 0.5, 1e-12);
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_EQ(t.predict_proba(dense_row({0.2})), 0.0);
  EXPECT_EQ(t.predict_proba(dense_row({0.9})), 1.0);
}

TEST(TreeTest, MinLeafBlocksSmallSplits) {
  SparseMatrix x{1, {dense_row({0}), dense_row({0}), dense_row({1}), dense_row({1})}};
  DecisionTree t = train_tree(x, {0, 0, 1, 1}, {20, 5});
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].positive_fraction, 0.5);
}

TEST(TreeTest, LeavesRespectMinLeafAndSplitsReduceImpurity) {
  Rng rng(31);
  SparseMatrix x;
  x.dim = 6;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 300; ++i) {
    std::vector<double> row(6);
    for (auto& v : row) v = rng.bernoulli(0.4) ? static_cast<double>(rng.below(4)) : 0.0;
    x.rows.push_back(dense_row(row));
    y.push_back(row[0] + row[3] > 2.0 || rng.bernoulli(0.1) ? 1 : 0);
  }
  const TreeConfig cfg{8, 7};
  DecisionTree t = train_tree(x, y, cfg);
  ASSERT_GT(t.nodes.size(), 1u);
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) {
      EXPECT_GE(n.samples, cfg.min_leaf);
      continue;
    }
    const TreeNode& l = t.nodes[n.left];
    const TreeNode& r = t.nodes[n.right];
    EXPECT_EQ(l.samples + r.samples, n.samples);
    const double weighted = (static_cast<double>(l.samples) * l.impurity +
                             static_cast<double>(r.samples) * r.impurity) /
                            static_cast<double>(n.samples);
    EXPECT_LT(weighted, n.impurity);
    EXPECT_LE(n.depth, cfg.max_depth);
  }
}

TEST(TreeTest, HandTracedRouting) {
  // Root on feature 1 at 0.5; its right child on feature 0 at 2.
  DecisionTree t;
  t.nodes.resize(5);
  t.nodes[0] = {1, 0.5, 1, 2, 0.5, 0, 0, 0};
  t.nodes[1] = {-1, 0, 0, 0, 0.1, 0, 0, 1};
  t.nodes[2] = {0, 2.0, 3, 4, 0.6, 0, 0, 1};
  t.nodes[3] = {-1, 0, 0, 0, 0.8, 0, 0, 2};
  t.nodes[4] = {-1, 0, 0, 0, 0.3, 0, 0, 2};
  EXPECT_EQ(t.route(dense_row({5, 0.2})), 1u);
  EXPECT_EQ(t.route(dense_row({1.5, 0.7})), 3u);
  EXPECT_EQ(t.route(dense_row({2.5, 0.7})), 4u);
  EXPECT_EQ(t.route(dense_row({2.0, 0.7})), 3u);
}

TEST(LogRegTest, SeparableToySetIsFitted) {
  SparseMatrix x{2, {dense_row({1, 0}), dense_row({0, 1}), dense_row({1, 0}), dense_row({0, 1})}};
  LogRegParams p = train_logreg(x, {1, 0, 1, 0}, 1, {200, 0.05, 2, 1});
  for (std::size_t i = 0; i < 4; ++i) {
    const double prob = p.predict_proba(x.rows[i])[0];
    EXPECT_EQ(prob >= 0.5, i % 2 == 0) << i;
  }
}

TEST(LogRegTest, AllNegativeAndZeroEpochs) {
  SparseMatrix x{2, {dense_row({1, 0}), dense_row({0, 1}), dense_row({1, 1})}};
  LogRegParams neg = train_logreg(x, {0, 0, 0}, 1, {50, 0.05, 2, 1});
  for (const auto& r : x.rows) EXPECT_LT(neg.predict_proba(r)[0], 0.5);
  LogRegParams zero = train_logreg(x, {1, 0, 1}, 1, {0, 0.05, 2, 1});
  for (const auto& r : x.rows) EXPECT_EQ(zero.predict_proba(r)[0], 0.5);
}

TEST(ClassicalModelTest, ThresholdTieAndDimensionCheck) {
  Corpus c = docs({"good day", "bad day", "good", "bad"}, {0, 1, 0, 1});
  ClassicalConfig cfg;
  cfg.logreg.epochs = 0;
  ClassicalModel m = train_classical(ArchKind::kTfidfLogreg, c, cfg);
  const SparseMatrix x = m.tfidf.transform(c);
  for (const auto& row : predict_classical(m, x)) EXPECT_EQ(row[0], 1);  // 0.5 counts as positive
  SparseMatrix wrong = x;
  wrong.dim += 1;
  EXPECT_THROW(predict_classical(m, wrong), ShapeError);
  EXPECT_THROW(train_classical(ArchKind::kMultitask, c), ConfigError);
}

TEST(ClassicalModelTest, LeafFractionAboveThresholdPredictsOne) {
  ClassicalModel m;
  m.arch = ArchKind::kTfidfTree;
  m.label_names = {"y"};
  m.tfidf = fit_tfidf(docs({"a"}));
  DecisionTree leaf;
  leaf.nodes.push_back({-1, 0, 0, 0, 0.8, 5, 0.32, 0});
  m.trees.push_back(leaf);
  SparseMatrix x{m.tfidf.dim(), {SparseVector{}}};
  EXPECT_EQ(predict_classical(m, x)[0][0], 1);
}

TEST(ClassicalModelTest, ArchiveRoundTrip) {
  Corpus c = docs({"good day", "bad day", "good", "bad", "bad bad", "good good"},
                  {0, 1, 0, 1, 1, 0});
  for (ArchKind arch : {ArchKind::kTfidfLogreg, ArchKind::kTfidfTree}) {
    ClassicalConfig cfg;
    cfg.tree.min_leaf = 1;
    ClassicalModel m = train_classical(arch, c, cfg);
    ClassicalModel back = classical_from_archive(decode_archive(encode_archive(to_archive(m))));
    EXPECT_EQ(back.arch, arch);
    EXPECT_EQ(back.label_names, m.label_names);
    const SparseMatrix x = m.tfidf.transform(c);
    const auto pa = classical_proba(m, x);
    const auto pb = classical_proba(back, back.tfidf.transform(c));
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-6);
  }
}

}  // namespace
}  // namespace mtme
