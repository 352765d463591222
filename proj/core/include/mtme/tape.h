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
#include <map>
#include <memory>

#include "mtme/tensor.h"

namespace mtme {

// Gradients of a scalar with respect to every leaf registered on a tape.
class Gradients {
 public:
  // nullptr when `leaf` is not a leaf of the tape that produced these
  // gradients.
  const Tensor* find(const Tensor& leaf) const;
  // Throws IndexError when missing.
  const Tensor& at(const Tensor& leaf) const;

  const std::map<NodeId, Tensor>& by_node() const { return by_node_; }
  std::size_t size() const { return by_node_.size(); }

 private:
  friend class Tape;
  std::map<NodeId, Tensor> by_node_;
};

// Append-only record of the operations applied to tracked tensors. Nodes are
// appended as operations execute, so every node's inputs precede it.
//
// A Tape must outlive the backward() call that consumes it; tensors that
// outlive their tape silently become untracked constants.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Registers `value` as a differentiable leaf and returns the tracked handle.
  Tensor watch(const Tensor& value);

  // Reverse sweep from a scalar loss. Every node is visited at most once;
  // leaves that do not influence the loss receive zero gradients.
  Gradients backward(const Tensor& loss) const;

  std::size_t size() const;

 private:
  std::shared_ptr<internal::TapeState> state_;
};

namespace debug {
// Test hook: when enabled, the matmul backward rule is deliberately wrong.
// Used to confirm that the gradient suite detects a broken rule.
void set_backward_fault(bool enabled);
bool backward_fault();
}  // namespace debug

}  // namespace mtme
