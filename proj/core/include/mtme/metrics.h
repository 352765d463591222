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

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mtme {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  // Counts of the same predictions with both labels and predictions negated:
  // the class-0 view of a class-1 confusion matrix.
  ConfusionCounts complement() const { return {tn, fn, fp, tp}; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Both return 0 for an empty denominator.
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
// Harmonic mean 2pr/(p+r); 0 when p + r == 0.
double f1(double p, double r);

// Binary counts for one label. A probability equal to the threshold counts as
// a positive prediction. Throws ShapeError on length mismatch.
ConfusionCounts confusion_from_predictions(std::span<const double> probs,
                                           std::span<const double> targets,
                                           double threshold = 0.5);
// Column `label` of row-major [N×num_labels] matrices.
ConfusionCounts confusion_from_predictions(std::span<const double> probs,
                                           std::span<const double> targets,
                                           std::size_t num_labels, std::size_t label,
                                           double threshold = 0.5);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the corresponding ratio was 0/0 and reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

ClassMetrics class_metrics(const ConfusionCounts& c);

struct LabelReport {
  std::string label;
  ConfusionCounts counts;  // class 1 is the positive class
  ClassMetrics class1;
  ClassMetrics class0;
};

LabelReport make_label_report(std::string label, const ConfusionCounts& counts);

// Unweighted mean of per-label F1 as {class 0, class 1}. Throws on empty input.
std::pair<double, double> macro_average(std::span<const LabelReport> reports);

struct Flag {
  std::string name;
  bool on = false;
  friend bool operator==(const Flag&, const Flag&) = default;
};

struct EvaluationTable {
  std::string model;
  std::vector<Flag> dataset_flags;
  std::vector<Flag> embedding_flags;
  std::vector<LabelReport> labels;
  double avg_f1_class0 = 0.0;
  double avg_f1_class1 = 0.0;
};

EvaluationTable make_evaluation_table(std::string model, std::vector<LabelReport> labels,
                                      std::vector<Flag> dataset_flags = {},
                                      std::vector<Flag> embedding_flags = {});

// Display rounding to `digits` decimals. The exact binary value is rounded to
// nearest; only an exact binary tie goes to the even neighbour. So 0.125
// becomes 0.12, while 0.715 (stored as 0.71499999...) becomes 0.71.
double round_half_even(double value, int digits = 2);
std::string format_metric(double value);

// Fixed-width text table: one column per model; optional "Datasets" and
// "Word Embedding" flag blocks; P, R, F1 rows for classes 0 and 1 per label;
// one Total Average row holding the macro class-1 F1. Throws ConfigError on
// empty input or when the tables disagree on label names.
std::string render_table(std::span<const EvaluationTable> tables);

// Unrounded values plus confusion counts and undefined flags.
nlohmann::json to_json(const EvaluationTable& table);
nlohmann::json to_json(std::span<const EvaluationTable> tables);

}  // namespace mtme
