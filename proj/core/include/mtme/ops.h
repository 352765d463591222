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
#include <span>
#include <vector>

#include "mtme/tensor.h"

namespace mtme {

// Differentiable operations. Each records a backward rule on the tape of its
// tracked inputs (if any); untracked inputs are treated as constants.

enum class UnaryKind { kSigmoid, kTanh, kRelu, kNeg, kLog };
enum class BinaryKind { kAdd, kSub, kMul };
enum class PoolKind { kMax, kAvg };

inline constexpr double kBceEpsilon = 1e-7;

// [m×k]·[k×n] -> [m×n].
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor apply_unary(UnaryKind kind, const Tensor& x);
inline Tensor sigmoid(const Tensor& x) { return apply_unary(UnaryKind::kSigmoid, x); }
inline Tensor tanh(const Tensor& x) { return apply_unary(UnaryKind::kTanh, x); }
inline Tensor relu(const Tensor& x) { return apply_unary(UnaryKind::kRelu, x); }
inline Tensor neg(const Tensor& x) { return apply_unary(UnaryKind::kNeg, x); }
inline Tensor log(const Tensor& x) { return apply_unary(UnaryKind::kLog, x); }

// Elementwise on equal shapes. The only broadcast supported is a rank-1 `b`
// whose length equals the last dimension of `a` (a bias over the last axis).
Tensor apply_binary(BinaryKind kind, const Tensor& a, const Tensor& b);
inline Tensor add(const Tensor& a, const Tensor& b) { return apply_binary(BinaryKind::kAdd, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return apply_binary(BinaryKind::kSub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return apply_binary(BinaryKind::kMul, a, b); }

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
inline Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts), axis);
}
// Elements [start, start + length) along `axis`.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
// Same storage, new shape of equal element count.
Tensor reshape(const Tensor& x, Shape shape);

// Reduces the time axis: [L×C] -> [C] or [B×L×C] -> [B×C]. Max routes the
// gradient to the earliest maximal timestep.
Tensor pool_over_time(PoolKind kind, const Tensor& x);

// Sequence plumbing for recurrent layers; sequences are [B×L×C] (or [L×C]
// for reverse_time).
Tensor time_step(const Tensor& seq, std::size_t t);
Tensor stack_steps(std::span<const Tensor> steps);
Tensor reverse_time(const Tensor& seq);

// Valid cross-correlation without bias: x [B×L×C] (or [L×C]), kernels
// [F×C×k] -> [B×(L-k+1)×F] (or [(L-k+1)×F]).
Tensor conv1d_valid(const Tensor& x, const Tensor& kernels);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Mean binary cross-entropy with predictions clamped to [eps, 1-eps]. With a
// mask, only elements whose mask value is non-zero contribute to the mean.
Tensor bce_loss(const Tensor& pred, const Tensor& target);
Tensor bce_loss(const Tensor& pred, const Tensor& target, const Tensor& mask);

}  // namespace mtme
