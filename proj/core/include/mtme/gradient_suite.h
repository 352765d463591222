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
#include <string>
#include <string_view>
#include <vector>

#include "mtme/grad_check.h"

namespace mtme {

inline constexpr double kGradTolerance = 1e-4;

struct GradScopeResult {
  std::string scope;
  GradCheckReport report;
  bool passed() const { return report.passed(kGradTolerance); }
};

// "dense", "conv1d", "gru", "lstm", "bidir", "multitask".
const std::vector<std::string>& gradient_scopes();

// Finite-difference check of one scope at toy shapes. The multitask scope runs
// the full trunk in training mode (fixed dropout masks) over two embeddings,
// seq_len 8, hidden 4, through a task head and the BCE loss.
// Throws ConfigError for an unknown scope.
GradScopeResult run_gradient_scope(std::string_view scope, std::uint64_t seed = 7);

// `scope` may be "all".
std::vector<GradScopeResult> run_gradient_suite(std::string_view scope, std::uint64_t seed = 7);

}  // namespace mtme
