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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mtme/tensor.h"

namespace mtme {

// A deterministic scalar function of a list of parameters. It receives tracked
// tensors during the analytic pass and plain tensors during finite-difference
// evaluation, so it must not capture parameters by other means.
using ScalarFn = std::function<Tensor(std::span<const Tensor> params)>;

struct GradCheckReport {
  // Largest per-tensor error ||a − n|| / max(||a||, ||n||) over the
  // parameter tensors (Euclidean norms). This is the pass criterion.
  double max_relative_error = 0.0;
  std::vector<double> tensor_errors;
  // Largest per-entry error |a − n| / max(|a|, |n|, 1e-8). Reported for
  // diagnosis: for entries with gradients near 1e-7 it mostly measures the
  // rounding noise of the finite difference itself.
  double max_entry_error = 0.0;
  std::size_t entries_checked = 0;
  // Location of the worst entry.
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool nan_encountered = false;

  bool passed(double tolerance) const {
    return !nan_encountered && max_relative_error <= tolerance;
  }
};

// Central differences (f(θ+ε) − f(θ−ε)) / 2ε against reverse-mode gradients
// for every entry of every parameter. A NaN anywhere makes both errors
// infinite.
GradCheckReport grad_check_report(const ScalarFn& fn, std::vector<Tensor> params,
                                  double eps = 1e-5);

double grad_check(const ScalarFn& fn, std::vector<Tensor> params, double eps = 1e-5);

}  // namespace mtme
