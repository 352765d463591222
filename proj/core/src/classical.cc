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

#include "mtme/classical.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>

#include "mtme/error.h"
#include "mtme/text.h"
#include "mtme/training.h"

namespace mtme {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double value_at(const SparseVector& x, std::size_t feature) {
  auto it = std::lower_bound(x.index.begin(), x.index.end(), feature);
  if (it == x.index.end() || *it != feature) return 0.0;
  return x.value[static_cast<std::size_t>(it - x.index.begin())];
}

void check_dim(const SparseMatrix& m, std::size_t dim) {
  if (m.dim != dim) {
    throw ShapeError("feature dimension " + std::to_string(m.dim) + " does not match the model's " +
                     std::to_string(dim));
  }
}

class TreeBuilder {
 public:
  TreeBuilder(const SparseMatrix& x, const std::vector<std::uint8_t>& y, const TreeConfig& cfg)
      : x_(x), y_(y), cfg_(cfg) {}

  DecisionTree build() {
    std::vector<std::size_t> rows(x_.rows.size());
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    std::int64_t feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  // Distinct value with how many samples (and positives) carry it.
  struct Group {
    double value;
    std::size_t n;
    std::size_t pos;
  };

  std::size_t grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const std::size_t id = tree_.nodes.size();
    tree_.nodes.emplace_back();
    std::size_t pos = 0;
    for (auto r : rows) pos += y_[r];
    TreeNode node;
    node.samples = rows.size();
    node.depth = depth;
    node.positive_fraction = static_cast<double>(pos) / static_cast<double>(rows.size());
    node.impurity = gini(pos, rows.size());

    const bool pure = pos == 0 || pos == rows.size();
    if (!pure && depth < cfg_.max_depth && rows.size() >= 2 * cfg_.min_leaf) {
      const Split s = best_split(rows, pos);
      if (s.feature >= 0 && s.impurity < node.impurity) {
        std::vector<std::size_t> left, right;
        for (auto r : rows) {
          (value_at(x_.rows[r], static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right)
              .push_back(r);
        }
        node.feature = s.feature;
        node.threshold = s.threshold;
        node.left = grow(left, depth + 1);
        node.right = grow(right, depth + 1);
      }
    }
    tree_.nodes[id] = node;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& rows, std::size_t pos) const {
    std::map<std::uint32_t, std::vector<std::pair<double, std::uint8_t>>> columns;
    for (auto r : rows) {
      const auto& v = x_.rows[r];
      for (std::size_t i = 0; i < v.index.size(); ++i) {
        columns[v.index[i]].emplace_back(v.value[i], y_[r]);
      }
    }
    const std::size_t n = rows.size();
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    std::vector<Group> groups;
    for (auto& [feature, entries] : columns) {
      std::sort(entries.begin(), entries.end());
      std::size_t nz_pos = 0;
      for (const auto& e : entries) nz_pos += e.second;
      groups.clear();
      auto add = [&](double value, std::size_t count, std::size_t p) {
        if (!groups.empty() && groups.back().value == value) {
          groups.back().n += count;
          groups.back().pos += p;
        } else {
          groups.push_back({value, count, p});
        }
      };
      const std::size_t zeros = n - entries.size();
      bool zeros_added = zeros == 0;
      for (const auto& [value, label] : entries) {
        if (!zeros_added && value >= 0.0) {
          add(0.0, zeros, pos - nz_pos);
          zeros_added = true;
        }
        add(value, 1, label);
      }
      if (!zeros_added) add(0.0, zeros, pos - nz_pos);

      std::size_t nl = 0, pl = 0;
      for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        nl += groups[g].n;
        pl += groups[g].pos;
        const std::size_t nr = n - nl, pr = pos - pl;
        if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        const double mid = 0.5 * (groups[g].value + groups[g + 1].value);
        if (!(mid >= groups[g].value && mid < groups[g + 1].value)) continue;
        const double w = (static_cast<double>(nl) * gini(pl, nl) +
                          static_cast<double>(nr) * gini(pr, nr)) /
                         static_cast<double>(n);
        if (w < best.impurity) best = {static_cast<std::int64_t>(feature), mid, w};
      }
    }
    return best;
  }

  const SparseMatrix& x_;
  const std::vector<std::uint8_t>& y_;
  const TreeConfig& cfg_;
  DecisionTree tree_;
};

constexpr std::size_t kTreeFields = 8;

}  // namespace

double SparseVector::norm() const {
  double s = 0.0;
  for (double v : value) s += v * v;
  return std::sqrt(s);
}

SparseVector TfidfModel::transform(const std::string& text) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& tok : tokenize(text)) {
    const std::int32_t id = vocab.index(tok);
    if (id >= 2) counts[static_cast<std::uint32_t>(id - 2)] += 1.0;
  }
  SparseVector out;
  for (const auto& [j, c] : counts) {
    out.index.push_back(j);
    out.value.push_back(c * idf[j]);
  }
  const double n = out.norm();
  if (n > 0.0) {
    for (double& v : out.value) v /= n;
  }
  return out;
}

SparseMatrix TfidfModel::transform(const Corpus& corpus) const {
  SparseMatrix m;
  m.dim = dim();
  m.rows.reserve(corpus.size());
  for (const auto& rec : corpus.records) m.rows.push_back(transform(rec.text));
  return m;
}

TfidfModel fit_tfidf(const Corpus& corpus, std::size_t max_features) {
  if (corpus.size() == 0) throw DataError("cannot fit TF-IDF on an empty corpus");
  TfidfModel model;
  model.vocab = build_vocab(corpus, 1, max_features);
  if (model.vocab.size() <= 2) throw DataError("corpus contains no tokens");
  model.documents = corpus.size();
  std::vector<std::size_t> df(model.vocab.size() - 2, 0);
  std::vector<std::size_t> last_doc(df.size(), corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& tok : tokenize(corpus.records[d].text)) {
      const std::int32_t id = model.vocab.index(tok);
      if (id < 2) continue;
      const auto j = static_cast<std::size_t>(id - 2);
      if (last_doc[j] != d) {
        last_doc[j] = d;
        ++df[j];
      }
    }
  }
  const auto n = static_cast<double>(corpus.size());
  for (auto f : df) model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(f))) + 1.0);
  return model;
}

std::vector<double> LogRegParams::predict_proba(const SparseVector& x) const {
  const std::size_t k = labels();
  std::vector<double> z(bias.values().begin(), bias.values().end());
  const auto w = weight.values();
  for (std::size_t i = 0; i < x.index.size(); ++i) {
    if (x.index[i] >= dim()) throw ShapeError("feature index beyond logistic regression input");
    for (std::size_t c = 0; c < k; ++c) z[c] += x.value[i] * w[x.index[i] * k + c];
  }
  for (double& v : z) v = sigmoid(v);
  return z;
}

LogRegParams train_logreg(const SparseMatrix& features, const std::vector<double>& labels,
                          std::size_t num_labels, const LogRegConfig& cfg) {
  const std::size_t n = features.rows.size(), dim = features.dim, k = num_labels;
  if (dim == 0 || k == 0) throw ConfigError("logistic regression needs features and labels");
  if (labels.size() != n * k) throw ShapeError("label matrix does not match feature rows");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be at least 1");

  std::map<std::string, Tensor> params{{"logreg/weight", Tensor::zeros({dim, k})},
                                       {"logreg/bias", Tensor::zeros({k})}};
  AdamState opt;
  opt.config.lr = cfg.lr;
  Rng rng = Rng(cfg.seed).fork("logreg");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      LogRegParams current{params.at("logreg/weight"), params.at("logreg/bias")};
      std::vector<double> gw(dim * k, 0.0), gb(k, 0.0);
      // Gradient of the mean BCE over the b×k entries.
      const double scale = 1.0 / static_cast<double>(b * k);
      for (std::size_t i = start; i < start + b; ++i) {
        const auto& x = features.rows[order[i]];
        const auto p = current.predict_proba(x);
        for (std::size_t c = 0; c < k; ++c) {
          const double err = (p[c] - labels[order[i] * k + c]) * scale;
          gb[c] += err;
          for (std::size_t j = 0; j < x.index.size(); ++j) gw[x.index[j] * k + c] += x.value[j] * err;
        }
      }
      std::map<std::string, Tensor> grads{{"logreg/weight", Tensor({dim, k}, std::move(gw))},
                                          {"logreg/bias", Tensor({k}, std::move(gb))}};
      adam_step(params, grads, opt);
    }
  }
  return {params.at("logreg/weight"), params.at("logreg/bias")};
}

double gini(std::size_t positives, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

std::size_t DecisionTree::route(const SparseVector& x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto f = static_cast<std::size_t>(nodes[i].feature);
    i = value_at(x, f) <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return i;
}

std::size_t DecisionTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

DecisionTree train_tree(const SparseMatrix& features, const std::vector<std::uint8_t>& labels,
                        const TreeConfig& cfg) {
  if (features.rows.empty()) throw DataError("cannot train a tree on an empty dataset");
  if (labels.size() != features.rows.size()) throw ShapeError("labels do not match feature rows");
  if (cfg.min_leaf == 0) throw ConfigError("min_leaf must be at least 1");
  return TreeBuilder(features, labels, cfg).build();
}

std::vector<double> ClassicalModel::predict_proba(const SparseVector& x) const {
  if (arch == ArchKind::kTfidfLogreg) return logreg.predict_proba(x);
  std::vector<double> out;
  for (const auto& t : trees) out.push_back(t.predict_proba(x));
  return out;
}

ClassicalModel train_classical(ArchKind arch, const Corpus& train, const ClassicalConfig& cfg) {
  if (arch != ArchKind::kTfidfLogreg && arch != ArchKind::kTfidfTree) {
    throw ConfigError(to_string(arch) + " is not a classical baseline");
  }
  train.validate();
  ClassicalModel model;
  model.arch = arch;
  model.label_names = train.label_names;
  model.tfidf = fit_tfidf(train, cfg.max_features);
  const SparseMatrix x = model.tfidf.transform(train);
  const std::size_t k = train.label_names.size();
  if (arch == ArchKind::kTfidfLogreg) {
    std::vector<double> y;
    for (const auto& rec : train.records) y.insert(y.end(), rec.labels.begin(), rec.labels.end());
    model.logreg = train_logreg(x, y, k, cfg.logreg);
  } else {
    for (std::size_t l = 0; l < k; ++l) {
      std::vector<std::uint8_t> y;
      for (const auto& rec : train.records) y.push_back(rec.labels[l]);
      model.trees.push_back(train_tree(x, y, cfg.tree));
    }
  }
  return model;
}

std::vector<double> classical_proba(const ClassicalModel& model, const SparseMatrix& features) {
  check_dim(features, model.tfidf.dim());
  std::vector<double> out;
  for (const auto& row : features.rows) {
    const auto p = model.predict_proba(row);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> predict_classical(const ClassicalModel& model,
                                                         const SparseMatrix& features,
                                                         double threshold) {
  check_dim(features, model.tfidf.dim());
  std::vector<std::vector<std::uint8_t>> out;
  for (const auto& row : features.rows) {
    std::vector<std::uint8_t> decision;
    for (double p : model.predict_proba(row)) decision.push_back(p >= threshold ? 1 : 0);
    out.push_back(std::move(decision));
  }
  return out;
}

TensorArchive to_archive(const ClassicalModel& model) {
  TensorArchive a;
  a.header["arch"] = to_string(model.arch);
  a.header["labels"] = model.label_names;
  a.header["documents"] = model.tfidf.documents;
  const auto& toks = model.tfidf.vocab.tokens();
  a.header["tfidf_tokens"] = std::vector<std::string>(toks.begin() + 2, toks.end());
  a.header["metadata"] = model.metadata;
  a.tensors.emplace_back("tfidf/idf", Tensor({model.tfidf.dim()}, model.tfidf.idf));
  if (model.arch == ArchKind::kTfidfLogreg) {
    a.tensors.emplace_back("logreg/weight", model.logreg.weight);
    a.tensors.emplace_back("logreg/bias", model.logreg.bias);
  } else {
    for (std::size_t l = 0; l < model.trees.size(); ++l) {
      std::vector<double> flat;
      for (const auto& n : model.trees[l].nodes) {
        flat.insert(flat.end(), {static_cast<double>(n.feature), n.threshold,
                                 static_cast<double>(n.left), static_cast<double>(n.right),
                                 n.positive_fraction, static_cast<double>(n.samples), n.impurity,
                                 static_cast<double>(n.depth)});
      }
      a.tensors.emplace_back("tree/" + std::to_string(l),
                             Tensor({model.trees[l].nodes.size(), kTreeFields}, std::move(flat)));
    }
  }
  return a;
}

ClassicalModel classical_from_archive(const TensorArchive& archive) {
  ClassicalModel model;
  try {
    model.arch = archive_arch(archive);
    if (is_neural(model.arch)) {
      throw ConfigError("file holds a " + to_string(model.arch) + " model, not a classical one");
    }
    model.label_names = archive.header.at("labels").get<std::vector<std::string>>();
    model.metadata = archive.header.value("metadata", nlohmann::json::object());
    model.tfidf.vocab = Vocabulary(archive.header.at("tfidf_tokens").get<std::vector<std::string>>());
    model.tfidf.documents = archive.header.at("documents").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("inconsistent header: ") + e.what(), 12);
  }
  std::map<std::string, Tensor> byname(archive.tensors.begin(), archive.tensors.end());
  auto need = [&](const std::string& name) -> const Tensor& {
    auto it = byname.find(name);
    if (it == byname.end()) throw FormatError("missing tensor '" + name + "'", 0);
    return it->second;
  };
  const Tensor& idf = need("tfidf/idf");
  model.tfidf.idf.assign(idf.values().begin(), idf.values().end());
  if (model.tfidf.idf.size() + 2 != model.tfidf.vocab.size()) {
    throw FormatError("idf length does not match the stored vocabulary", 0);
  }
  if (model.arch == ArchKind::kTfidfLogreg) {
    model.logreg = {need("logreg/weight"), need("logreg/bias")};
  } else {
    for (std::size_t l = 0; l < model.label_names.size(); ++l) {
      const Tensor& t = need("tree/" + std::to_string(l));
      if (t.rank() != 2 || t.dim(1) != kTreeFields) throw FormatError("bad tree tensor", 0);
      DecisionTree tree;
      const auto v = t.values();
      for (std::size_t i = 0; i < t.dim(0); ++i) {
        const double* f = v.data() + i * kTreeFields;
        TreeNode n;
        n.feature = static_cast<std::int64_t>(f[0]);
        n.threshold = f[1];
        n.left = static_cast<std::size_t>(f[2]);
        n.right = static_cast<std::size_t>(f[3]);
        n.positive_fraction = f[4];
        n.samples = static_cast<std::size_t>(f[5]);
        n.impurity = f[6];
        n.depth = static_cast<std::size_t>(f[7]);
        if (!n.is_leaf() && (n.left >= t.dim(0) || n.right >= t.dim(0))) {
          throw FormatError("tree child index out of range", 0);
        }
        tree.nodes.push_back(n);
      }
      model.trees.push_back(std::move(tree));
    }
  }
  return model;
}

}  // namespace mtme
