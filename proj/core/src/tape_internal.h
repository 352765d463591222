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
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mtme/tensor.h"

namespace mtme::internal {

// grad_in[i] is null when input i is not tracked; otherwise a zero-initialised
// (or partially accumulated) buffer the rule must add into.
using BackwardFn = std::function<void(std::span<const double> grad_out,
                                      std::span<std::vector<double>* const> grad_in)>;

struct TapeNode {
  std::vector<std::optional<NodeId>> inputs;
  std::vector<std::size_t> input_sizes;
  std::size_t size = 0;
  Shape shape;          // leaves only
  BackwardFn backward;  // empty for leaves
};

struct TapeState {
  std::vector<TapeNode> nodes;
};

struct TensorAccess {
  static const std::shared_ptr<std::vector<double>>& data(const Tensor& t) {
    return t.data_;
  }
  static std::shared_ptr<TapeState> tape(const Tensor& t) { return t.tape_.lock(); }
  static std::optional<NodeId> raw_node(const Tensor& t) { return t.node_; }
  static Tensor make(Shape shape, std::shared_ptr<std::vector<double>> data) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    return t;
  }
  static void attach(Tensor& t, const std::shared_ptr<TapeState>& tape, NodeId id) {
    t.tape_ = tape;
    t.node_ = id;
  }
};

}  // namespace mtme::internal
