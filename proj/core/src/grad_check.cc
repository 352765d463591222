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

#include "mtme/grad_check.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtme/tape.h"

namespace mtme {

GradCheckReport grad_check_report(const ScalarFn& fn, std::vector<Tensor> params,
                                  double eps) {
  GradCheckReport report;
  for (auto& p : params) p = p.detach();

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Tensor> watched;
    watched.reserve(params.size());
    for (const auto& p : params) watched.push_back(tape.watch(p));
    Tensor loss = fn(watched);
    Gradients grads = tape.backward(loss);
    for (const auto& w : watched) analytic.push_back(grads.at(w));
  }

  auto evaluate = [&](std::size_t which, std::size_t index, double delta) {
    std::vector<Tensor> shifted = params;
    shifted[which].mutable_values()[index] += delta;
    return fn(shifted).item();
  };

  for (std::size_t p = 0; p < params.size(); ++p) {
    double diff_sq = 0.0, exact_sq = 0.0, numeric_sq = 0.0;
    for (std::size_t i = 0; i < params[p].numel(); ++i) {
      const double numeric = (evaluate(p, i, eps) - evaluate(p, i, -eps)) / (2.0 * eps);
      const double exact = analytic[p][i];
      ++report.entries_checked;
      if (std::isnan(numeric) || std::isnan(exact)) {
        report.nan_encountered = true;
        continue;
      }
      diff_sq += (exact - numeric) * (exact - numeric);
      exact_sq += exact * exact;
      numeric_sq += numeric * numeric;
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double err = std::abs(exact - numeric) / denom;
      if (err > report.max_entry_error) {
        report.max_entry_error = err;
        report.worst_param = p;
        report.worst_index = i;
        report.worst_analytic = exact;
        report.worst_numeric = numeric;
      }
    }
    const double denom = std::max({std::sqrt(exact_sq), std::sqrt(numeric_sq), 1e-12});
    const double err = std::sqrt(diff_sq) / denom;
    report.tensor_errors.push_back(err);
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  if (report.nan_encountered) {
    report.max_relative_error = std::numeric_limits<double>::infinity();
    report.max_entry_error = std::numeric_limits<double>::infinity();
  }
  return report;
}

double grad_check(const ScalarFn& fn, std::vector<Tensor> params, double eps) {
  return grad_check_report(fn, std::move(params), eps).max_relative_error;
}

}  // namespace mtme
