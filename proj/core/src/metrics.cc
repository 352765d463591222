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

#include "mtme/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "mtme/error.h"

namespace mtme {
namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct Row {
  std::string group, item, cls;
  std::vector<std::string> cells;
};

void flag_block(const char* title, std::span<const EvaluationTable> tables,
                std::vector<Flag> EvaluationTable::*member, std::vector<Row>& rows) {
  std::vector<std::string> names;
  for (const auto& t : tables) {
    for (const auto& f : t.*member) {
      if (std::find(names.begin(), names.end(), f.name) == names.end()) names.push_back(f.name);
    }
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    Row r{i == 0 ? title : "", names[i], "", {}};
    for (const auto& t : tables) {
      const auto& flags = t.*member;
      auto it = std::find_if(flags.begin(), flags.end(),
                             [&](const Flag& f) { return f.name == names[i]; });
      r.cells.push_back(it != flags.end() && it->on ? "x" : "");
    }
    rows.push_back(std::move(r));
  }
}

nlohmann::json class_json(const ClassMetrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined},
          {"f1_undefined", m.f1_undefined}};
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

double precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp); }
double recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }

double f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

ConfusionCounts confusion_from_predictions(std::span<const double> probs,
                                           std::span<const double> targets, double threshold) {
  return confusion_from_predictions(probs, targets, 1, 0, threshold);
}

ConfusionCounts confusion_from_predictions(std::span<const double> probs,
                                           std::span<const double> targets,
                                           std::size_t num_labels, std::size_t label,
                                           double threshold) {
  if (probs.size() != targets.size()) {
    throw ShapeError("predictions (" + std::to_string(probs.size()) + ") and targets (" +
                     std::to_string(targets.size()) + ") differ in length");
  }
  if (num_labels == 0 || label >= num_labels || probs.size() % num_labels != 0) {
    throw ShapeError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(num_labels) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = label; i < probs.size(); i += num_labels) {
    const bool pred = probs[i] >= threshold;
    const bool truth = targets[i] >= 0.5;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ClassMetrics class_metrics(const ConfusionCounts& c) {
  ClassMetrics m;
  m.precision = precision(c);
  m.recall = recall(c);
  m.f1 = f1(m.precision, m.recall);
  m.precision_undefined = c.tp + c.fp == 0;
  m.recall_undefined = c.tp + c.fn == 0;
  m.f1_undefined = m.precision + m.recall == 0.0;
  return m;
}

LabelReport make_label_report(std::string label, const ConfusionCounts& counts) {
  return {std::move(label), counts, class_metrics(counts), class_metrics(counts.complement())};
}

std::pair<double, double> macro_average(std::span<const LabelReport> reports) {
  if (reports.empty()) throw ConfigError("macro average of an empty report list");
  double s0 = 0.0, s1 = 0.0;
  for (const auto& r : reports) {
    s0 += r.class0.f1;
    s1 += r.class1.f1;
  }
  const auto n = static_cast<double>(reports.size());
  return {s0 / n, s1 / n};
}

EvaluationTable make_evaluation_table(std::string model, std::vector<LabelReport> labels,
                                      std::vector<Flag> dataset_flags,
                                      std::vector<Flag> embedding_flags) {
  EvaluationTable t;
  t.model = std::move(model);
  t.labels = std::move(labels);
  t.dataset_flags = std::move(dataset_flags);
  t.embedding_flags = std::move(embedding_flags);
  std::tie(t.avg_f1_class0, t.avg_f1_class1) = macro_average(t.labels);
  return t;
}

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

double round_half_even(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return std::strtod(buf, nullptr);
}

std::string render_table(std::span<const EvaluationTable> tables) {
  if (tables.empty()) throw ConfigError("nothing to render: no evaluation results");
  for (const auto& t : tables) {
    bool same = t.labels.size() == tables[0].labels.size();
    for (std::size_t i = 0; same && i < t.labels.size(); ++i) {
      same = t.labels[i].label == tables[0].labels[i].label;
    }
    if (!same) {
      throw ConfigError("model '" + t.model + "' reports a different label set than '" +
                        tables[0].model + "'");
    }
  }

  std::vector<Row> rows;
  Row header{"", "", "", {}};
  for (const auto& t : tables) header.cells.push_back(t.model);
  rows.push_back(header);
  flag_block("Datasets", tables, &EvaluationTable::dataset_flags, rows);
  flag_block("Word Embedding", tables, &EvaluationTable::embedding_flags, rows);

  const struct {
    const char* name;
    double ClassMetrics::*field;
  } kMetrics[] = {{"P", &ClassMetrics::precision},
                  {"R", &ClassMetrics::recall},
                  {"F1", &ClassMetrics::f1}};
  for (std::size_t l = 0; l < tables[0].labels.size(); ++l) {
    bool first = true;
    for (const auto& metric : kMetrics) {
      for (int cls = 0; cls < 2; ++cls) {
        Row r{first ? tables[0].labels[l].label : "", cls == 0 ? metric.name : "",
              std::to_string(cls), {}};
        first = false;
        for (const auto& t : tables) {
          const ClassMetrics& m = cls == 0 ? t.labels[l].class0 : t.labels[l].class1;
          r.cells.push_back(format_metric(m.*metric.field));
        }
        rows.push_back(std::move(r));
      }
    }
  }
  {
    Row r{"Total Average", "F1", "1", {}};
    for (const auto& t : tables) r.cells.push_back(format_metric(t.avg_f1_class1));
    rows.push_back(std::move(r));
  }

  std::size_t wg = 0, wi = 0, wc = 0;
  std::vector<std::size_t> wcell(tables.size(), 0);
  for (const auto& r : rows) {
    wg = std::max(wg, r.group.size());
    wi = std::max(wi, r.item.size());
    wc = std::max(wc, r.cls.size());
    for (std::size_t j = 0; j < r.cells.size(); ++j) wcell[j] = std::max(wcell[j], r.cells[j].size());
  }
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  std::string out;
  for (const auto& r : rows) {
    std::string line = pad(r.group, wg) + "  " + pad(r.item, wi) + "  " + pad(r.cls, wc);
    for (std::size_t j = 0; j < r.cells.size(); ++j) line += " | " + pad(r.cells[j], wcell[j]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

nlohmann::json to_json(const EvaluationTable& table) {
  nlohmann::json j;
  j["model"] = table.model;
  auto flags = [](const std::vector<Flag>& fs) {
    nlohmann::json o = nlohmann::json::array();
    for (const auto& f : fs) o.push_back({{"name", f.name}, {"on", f.on}});
    return o;
  };
  j["datasets"] = flags(table.dataset_flags);
  j["embeddings"] = flags(table.embedding_flags);
  j["labels"] = nlohmann::json::array();
  for (const auto& r : table.labels) {
    j["labels"].push_back({{"label", r.label},
                           {"counts",
                            {{"tp", r.counts.tp},
                             {"fp", r.counts.fp},
                             {"fn", r.counts.fn},
                             {"tn", r.counts.tn}}},
                           {"class1", class_json(r.class1)},
                           {"class0", class_json(r.class0)}});
  }
  j["total_average"] = {{"f1_class0", table.avg_f1_class0}, {"f1_class1", table.avg_f1_class1}};
  return j;
}

nlohmann::json to_json(std::span<const EvaluationTable> tables) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : tables) j.push_back(to_json(t));
  return j;
}

}  // namespace mtme
