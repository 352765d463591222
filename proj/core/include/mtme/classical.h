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
#include <string>
#include <vector>

#include "mtme/corpus.h"
#include "mtme/model.h"
#include "mtme/serialization.h"

namespace mtme {

// Sparse row: strictly increasing feature indices with their values.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  double norm() const;
};

struct SparseMatrix {
  std::size_t dim = 0;
  std::vector<SparseVector> rows;
};

// idf(t) = ln((1 + N) / (1 + df(t))) + 1 over the N training documents; raw
// term counts; rows L2-normalised. Feature j is vocabulary id j + 2.
struct TfidfModel {
  Vocabulary vocab;
  std::vector<double> idf;  // one per feature
  std::size_t documents = 0;

  std::size_t dim() const { return idf.size(); }
  SparseVector transform(const std::string& text) const;
  SparseMatrix transform(const Corpus& corpus) const;
};

// Vocabulary: every token of the corpus, the most frequent max_features kept.
// Throws DataError on an empty corpus.
TfidfModel fit_tfidf(const Corpus& corpus, std::size_t max_features = 50000);

// Logistic regression, one-vs-rest: p_k(x) = σ(x·W[:,k] + b_k).
struct LogRegParams {
  Tensor weight;  // [dim×K]
  Tensor bias;    // [K]

  std::size_t dim() const { return weight.dim(0); }
  std::size_t labels() const { return weight.dim(1); }
  std::vector<double> predict_proba(const SparseVector& x) const;
};

struct LogRegConfig {
  std::size_t epochs = 30;
  double lr = 0.05;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

// Zero-initialised weights, mini-batch BCE gradients, Adam updates.
// `labels` is row-major [N×num_labels].
LogRegParams train_logreg(const SparseMatrix& features, const std::vector<double>& labels,
                          std::size_t num_labels, const LogRegConfig& cfg = {});

// Gini impurity 1 − p² − (1−p)² of a node with `positives` out of `total`.
double gini(std::size_t positives, std::size_t total);

// Flat CART tree. A node with feature < 0 is a leaf; otherwise samples with
// x[feature] <= threshold go left.
struct TreeNode {
  std::int64_t feature = -1;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  double positive_fraction = 0.0;
  std::size_t samples = 0;
  double impurity = 0.0;
  std::size_t depth = 0;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // Index of the leaf reached by x.
  std::size_t route(const SparseVector& x) const;
  double predict_proba(const SparseVector& x) const { return nodes[route(x)].positive_fraction; }
  std::size_t depth() const;
};

struct TreeConfig {
  std::size_t max_depth = 20;
  std::size_t min_leaf = 5;
};

// Greedy splits minimising weighted child Gini. Candidates are midpoints
// between consecutive distinct values present in the node (absent sparse
// entries count as 0). A split is taken only when it lowers the weighted
// impurity and leaves at least min_leaf samples on each side. Ties go to the
// lowest feature index, then the lowest threshold.
DecisionTree train_tree(const SparseMatrix& features, const std::vector<std::uint8_t>& labels,
                        const TreeConfig& cfg = {});

// A trained classical baseline: TF-IDF plus per-label classifiers.
struct ClassicalModel {
  ArchKind arch = ArchKind::kTfidfLogreg;
  TfidfModel tfidf;
  std::vector<std::string> label_names;
  LogRegParams logreg;              // kTfidfLogreg
  std::vector<DecisionTree> trees;  // kTfidfTree, one per label
  nlohmann::json metadata = nlohmann::json::object();

  std::vector<double> predict_proba(const SparseVector& x) const;
};

struct ClassicalConfig {
  std::size_t max_features = 50000;
  LogRegConfig logreg;
  TreeConfig tree;
};

ClassicalModel train_classical(ArchKind arch, const Corpus& train, const ClassicalConfig& cfg = {});

// Per-row, per-label decisions (probability >= threshold). Throws ShapeError
// when the feature dimension differs from the model's.
std::vector<std::vector<std::uint8_t>> predict_classical(const ClassicalModel& model,
                                                         const SparseMatrix& features,
                                                         double threshold = 0.5);
// Row-major [N×K] probabilities.
std::vector<double> classical_proba(const ClassicalModel& model, const SparseMatrix& features);

TensorArchive to_archive(const ClassicalModel& model);
ClassicalModel classical_from_archive(const TensorArchive& archive);

}  // namespace mtme
