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

#include "mtme/tape.h"

#include <atomic>
#include <optional>

#include "mtme/error.h"
#include "tape_internal.h"

namespace mtme {

using internal::TensorAccess;

const Tensor* Gradients::find(const Tensor& leaf) const {
  auto id = leaf.node_id();
  if (!id) return nullptr;
  auto it = by_node_.find(*id);
  return it == by_node_.end() ? nullptr : &it->second;
}

const Tensor& Gradients::at(const Tensor& leaf) const {
  const Tensor* g = find(leaf);
  if (!g) throw IndexError("no gradient recorded for tensor " + shape_to_string(leaf.shape()));
  return *g;
}

Tape::Tape() : state_(std::make_shared<internal::TapeState>()) {}

Tensor Tape::watch(const Tensor& value) {
  internal::TapeNode node;
  node.size = value.numel();
  node.shape = value.shape();
  state_->nodes.push_back(std::move(node));
  Tensor tracked = TensorAccess::make(value.shape(), TensorAccess::data(value));
  TensorAccess::attach(tracked, state_, state_->nodes.size() - 1);
  return tracked;
}

std::size_t Tape::size() const { return state_->nodes.size(); }

Gradients Tape::backward(const Tensor& loss) const {
  if (loss.numel() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " +
                     shape_to_string(loss.shape()));
  }
  auto loss_tape = TensorAccess::tape(loss);
  auto loss_node = TensorAccess::raw_node(loss);
  if (loss_tape != state_ || !loss_node) {
    throw Error("backward: loss is not recorded on this tape");
  }

  auto& nodes = state_->nodes;
  std::vector<std::vector<double>> grads(*loss_node + 1);
  grads[*loss_node].assign(1, 1.0);

  std::vector<std::vector<double>*> grad_in;
  Gradients result;
  for (std::size_t i = *loss_node + 1; i-- > 0;) {
    auto& node = nodes[i];
    if (!node.backward) {
      // Leaf.
      std::vector<double> g = grads[i].empty() ? std::vector<double>(node.size, 0.0)
                                               : std::move(grads[i]);
      result.by_node_.emplace(
          i, TensorAccess::make(node.shape, std::make_shared<std::vector<double>>(std::move(g))));
      continue;
    }
    if (grads[i].empty()) continue;
    grad_in.assign(node.inputs.size(), nullptr);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      if (!node.inputs[k]) continue;
      auto& buffer = grads[*node.inputs[k]];
      if (buffer.empty()) buffer.assign(node.input_sizes[k], 0.0);
      grad_in[k] = &buffer;
    }
    node.backward(grads[i], grad_in);
    std::vector<double>().swap(grads[i]);
  }
  return result;
}

namespace debug {
namespace {
std::atomic<bool> g_backward_fault{false};
}
void set_backward_fault(bool enabled) { g_backward_fault = enabled; }
bool backward_fault() { return g_backward_fault; }
}  // namespace debug

}  // namespace mtme
