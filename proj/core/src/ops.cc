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

#include "mtme/ops.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "mtme/error.h"
#include "mtme/tape.h"
#include "tape_internal.h"

namespace mtme {
namespace {

using internal::BackwardFn;
using internal::TapeNode;
using internal::TapeState;
using internal::TensorAccess;
using Buffer = std::shared_ptr<std::vector<double>>;
using GradIn = std::span<std::vector<double>* const>;

std::shared_ptr<TapeState> common_tape(std::span<const Tensor* const> inputs) {
  std::shared_ptr<TapeState> tape;
  for (const Tensor* t : inputs) {
    if (!TensorAccess::raw_node(*t)) continue;
    auto other = TensorAccess::tape(*t);
    if (!other) continue;
    if (tape && other != tape) {
      throw Error("operation mixes tensors recorded on different tapes");
    }
    tape = std::move(other);
  }
  return tape;
}

Tensor finish(Shape shape, Buffer data, std::vector<const Tensor*> inputs,
              BackwardFn backward) {
  Tensor out = TensorAccess::make(std::move(shape), std::move(data));
  auto tape = common_tape(inputs);
  if (!tape) return out;
  TapeNode node;
  node.inputs.reserve(inputs.size());
  for (const Tensor* t : inputs) {
    const bool tracked = TensorAccess::raw_node(*t) && TensorAccess::tape(*t) == tape;
    node.inputs.push_back(tracked ? TensorAccess::raw_node(*t) : std::nullopt);
    node.input_sizes.push_back(t->numel());
  }
  node.size = out.numel();
  node.backward = std::move(backward);
  tape->nodes.push_back(std::move(node));
  TensorAccess::attach(out, tape, tape->nodes.size() - 1);
  return out;
}

Tensor finish(Shape shape, std::vector<double> values, std::vector<const Tensor*> inputs,
              BackwardFn backward) {
  return finish(std::move(shape), std::make_shared<std::vector<double>>(std::move(values)),
                std::move(inputs), std::move(backward));
}

const Buffer& data_of(const Tensor& t) { return TensorAccess::data(t); }

// C[m×n] += A[m×k]·B[k×n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// dA[m×k] += G[m×n]·Bᵀ where B is [k×n]
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* g,
             const double* b, double* da) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
      da[i * k + p] += s;
    }
  }
}

// dB[k×n] += Aᵀ·G where A is [m×k], G is [m×n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* g, double* db) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* dbrow = db + p * n;
      for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * grow[j];
    }
  }
}

std::size_t inner_size(const Shape& shape, std::size_t from) {
  std::size_t n = 1;
  for (std::size_t i = from; i < shape.size(); ++i) n *= shape[i];
  return n;
}

std::size_t outer_size(const Shape& shape, std::size_t to) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < to; ++i) n *= shape[i];
  return n;
}

void require_sequence(const Tensor& seq, const char* op) {
  if (seq.rank() != 3) {
    throw ShapeError(std::string(op) + " expects a [B, L, C] sequence, got " +
                     shape_to_string(seq.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + shape_to_string(a.shape()) +
                     " and " + shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  gemm_nn(m, k, n, a.values().data(), b.values().data(), out.data());
  Buffer ad = data_of(a), bd = data_of(b);
  return finish({m, n}, std::move(out), {&a, &b},
                [ad, bd, m, k, n](std::span<const double> g, GradIn gin) {
                  if (gin[0]) {
                    gemm_nt(m, k, n, g.data(), bd->data(), gin[0]->data());
                    if (debug::backward_fault()) {
                      for (double& v : *gin[0]) v *= 1.05;
                    }
                  }
                  if (gin[1]) gemm_tn(m, k, n, ad->data(), g.data(), gin[1]->data());
                });
}

Tensor apply_unary(UnaryKind kind, const Tensor& x) {
  auto in = x.values();
  std::vector<double> out(in.size());
  switch (kind) {
    case UnaryKind::kSigmoid:
      for (std::size_t i = 0; i < in.size(); ++i) {
        // Split by sign so exp never overflows.
        const double v = in[i];
        if (v >= 0) {
          out[i] = 1.0 / (1.0 + std::exp(-v));
        } else {
          const double e = std::exp(v);
          out[i] = e / (1.0 + e);
        }
      }
      break;
    case UnaryKind::kTanh:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
      break;
    case UnaryKind::kRelu:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0 ? in[i] : 0.0;
      break;
    case UnaryKind::kNeg:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = -in[i];
      break;
    case UnaryKind::kLog:
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (!(in[i] > 0)) {
          throw DomainError("log of non-positive value " + std::to_string(in[i]) +
                            " at index " + std::to_string(i));
        }
        out[i] = std::log(in[i]);
      }
      break;
  }
  auto out_data = std::make_shared<std::vector<double>>(std::move(out));
  Buffer xd = data_of(x);
  Buffer yd = out_data;
  return finish(x.shape(), out_data, {&x},
                [kind, xd, yd](std::span<const double> g, GradIn gin) {
                  auto& dx = *gin[0];
                  const auto& y = *yd;
                  const auto& xv = *xd;
                  switch (kind) {
                    case UnaryKind::kSigmoid:
                      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
                      break;
                    case UnaryKind::kTanh:
                      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
                      break;
                    case UnaryKind::kRelu:
                      for (std::size_t i = 0; i < g.size(); ++i) {
                        if (xv[i] > 0) dx[i] += g[i];
                      }
                      break;
                    case UnaryKind::kNeg:
                      for (std::size_t i = 0; i < g.size(); ++i) dx[i] -= g[i];
                      break;
                    case UnaryKind::kLog:
                      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] / xv[i];
                      break;
                  }
                });
}

Tensor apply_binary(BinaryKind kind, const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool bias = !same && b.rank() == 1 && a.rank() >= 1 && b.dim(0) == a.shape().back();
  if (!same && !bias) {
    throw ShapeError("elementwise op: incompatible shapes " + shape_to_string(a.shape()) +
                     " and " + shape_to_string(b.shape()));
  }
  const std::size_t n = a.numel();
  const std::size_t width = b.numel();  // period of b's index when broadcasting
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = bv[bias ? i % width : i];
    switch (kind) {
      case BinaryKind::kAdd: out[i] = av[i] + y; break;
      case BinaryKind::kSub: out[i] = av[i] - y; break;
      case BinaryKind::kMul: out[i] = av[i] * y; break;
    }
  }
  Buffer ad = data_of(a), bd = data_of(b);
  return finish(a.shape(), std::move(out), {&a, &b},
                [kind, ad, bd, bias, width](std::span<const double> g, GradIn gin) {
                  const auto& av = *ad;
                  const auto& bv = *bd;
                  if (auto* da = gin[0]) {
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      (*da)[i] += kind == BinaryKind::kMul ? g[i] * bv[bias ? i % width : i] : g[i];
                    }
                  }
                  if (auto* db = gin[1]) {
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      const std::size_t j = bias ? i % width : i;
                      switch (kind) {
                        case BinaryKind::kAdd: (*db)[j] += g[i]; break;
                        case BinaryKind::kSub: (*db)[j] -= g[i]; break;
                        case BinaryKind::kMul: (*db)[j] += g[i] * av[i]; break;
                      }
                    }
                  }
                });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of an empty list");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    throw ShapeError("concat axis " + std::to_string(axis) + " out of range for " +
                     shape_to_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) ok = false;
    }
    if (!ok) {
      throw ShapeError("concat: shape " + shape_to_string(s) + " incompatible with " +
                       shape_to_string(first) + " along axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  if (parts.size() == 1) return parts[0];

  const std::size_t outer = outer_size(first, axis);
  std::vector<std::size_t> chunk(parts.size());
  std::size_t row = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    chunk[p] = inner_size(parts[p].shape(), axis);
    row += chunk[p];
  }
  std::vector<double> out(outer * row);
  std::vector<const Tensor*> inputs;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t offset = o * row;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      auto v = parts[p].values();
      std::copy_n(v.begin() + o * chunk[p], chunk[p], out.begin() + offset);
      offset += chunk[p];
    }
  }
  for (const Tensor& p : parts) inputs.push_back(&p);
  return finish(std::move(out_shape), std::move(out), std::move(inputs),
                [outer, chunk, row](std::span<const double> g, GradIn gin) {
                  for (std::size_t o = 0; o < outer; ++o) {
                    std::size_t offset = o * row;
                    for (std::size_t p = 0; p < chunk.size(); ++p) {
                      if (auto* dp = gin[p]) {
                        for (std::size_t i = 0; i < chunk[p]; ++i) {
                          (*dp)[o * chunk[p] + i] += g[offset + i];
                        }
                      }
                      offset += chunk[p];
                    }
                  }
                });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  const Shape& s = x.shape();
  if (axis >= s.size() || length == 0 || start + length > s[axis]) {
    throw ShapeError("slice [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") along axis " +
                     std::to_string(axis) + " invalid for " + shape_to_string(s));
  }
  Shape out_shape = s;
  out_shape[axis] = length;
  const std::size_t outer = outer_size(s, axis);
  const std::size_t tail = inner_size(s, axis + 1);
  const std::size_t src_row = s[axis] * tail;
  const std::size_t dst_row = length * tail;
  const std::size_t skip = start * tail;
  auto v = x.values();
  std::vector<double> out(outer * dst_row);
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(v.begin() + o * src_row + skip, dst_row, out.begin() + o * dst_row);
  }
  return finish(std::move(out_shape), std::move(out), {&x},
                [outer, src_row, dst_row, skip](std::span<const double> g, GradIn gin) {
                  auto& dx = *gin[0];
                  for (std::size_t o = 0; o < outer; ++o) {
                    for (std::size_t i = 0; i < dst_row; ++i) {
                      dx[o * src_row + skip + i] += g[o * dst_row + i];
                    }
                  }
                });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape " + shape_to_string(x.shape()) + " -> " +
                     shape_to_string(shape) + " changes the element count");
  }
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("reshape to a shape with a zero dimension");
  }
  return finish(std::move(shape), data_of(x), {&x},
                [](std::span<const double> g, GradIn gin) {
                  auto& dx = *gin[0];
                  for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
                });
}

Tensor pool_over_time(PoolKind kind, const Tensor& x) {
  if (x.rank() != 2 && x.rank() != 3) {
    throw ShapeError("pool_over_time expects [L, C] or [B, L, C], got " +
                     shape_to_string(x.shape()));
  }
  const bool batched = x.rank() == 3;
  const std::size_t batch = batched ? x.dim(0) : 1;
  const std::size_t steps = x.dim(batched ? 1 : 0);
  const std::size_t channels = x.dim(batched ? 2 : 1);
  auto v = x.values();
  std::vector<double> out(batch * channels);
  std::vector<std::size_t> argmax;
  if (kind == PoolKind::kMax) argmax.resize(batch * channels);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* base = v.data() + b * steps * channels;
    for (std::size_t c = 0; c < channels; ++c) {
      if (kind == PoolKind::kMax) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < steps; ++t) {
          if (base[t * channels + c] > base[best * channels + c]) best = t;
        }
        out[b * channels + c] = base[best * channels + c];
        argmax[b * channels + c] = best;
      } else {
        double s = 0.0;
        for (std::size_t t = 0; t < steps; ++t) s += base[t * channels + c];
        out[b * channels + c] = s / static_cast<double>(steps);
      }
    }
  }
  Shape out_shape = batched ? Shape{batch, channels} : Shape{channels};
  return finish(std::move(out_shape), std::move(out), {&x},
                [kind, argmax = std::move(argmax), batch, steps, channels](
                    std::span<const double> g, GradIn gin) {
                  auto& dx = *gin[0];
                  for (std::size_t b = 0; b < batch; ++b) {
                    for (std::size_t c = 0; c < channels; ++c) {
                      const double gv = g[b * channels + c];
                      if (kind == PoolKind::kMax) {
                        dx[(b * steps + argmax[b * channels + c]) * channels + c] += gv;
                      } else {
                        const double share = gv / static_cast<double>(steps);
                        for (std::size_t t = 0; t < steps; ++t) {
                          dx[(b * steps + t) * channels + c] += share;
                        }
                      }
                    }
                  }
                });
}

Tensor time_step(const Tensor& seq, std::size_t t) {
  require_sequence(seq, "time_step");
  const std::size_t batch = seq.dim(0), steps = seq.dim(1), channels = seq.dim(2);
  if (t >= steps) {
    throw IndexError("time_step " + std::to_string(t) + " out of range for " +
                     shape_to_string(seq.shape()));
  }
  auto v = seq.values();
  std::vector<double> out(batch * channels);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(v.begin() + (b * steps + t) * channels, channels, out.begin() + b * channels);
  }
  return finish({batch, channels}, std::move(out), {&seq},
                [batch, steps, channels, t](std::span<const double> g, GradIn gin) {
                  auto& dx = *gin[0];
                  for (std::size_t b = 0; b < batch; ++b) {
                    double* dst = dx.data() + (b * steps + t) * channels;
                    const double* src = g.data() + b * channels;
                    for (std::size_t c = 0; c < channels; ++c) dst[c] += src[c];
                  }
                });
}

Tensor stack_steps(std::span<const Tensor> steps) {
  if (steps.empty()) throw ShapeError("stack_steps of an empty list");
  const Shape& first = steps[0].shape();
  if (first.size() != 2) {
    throw ShapeError("stack_steps expects [B, C] steps, got " + shape_to_string(first));
  }
  const std::size_t batch = first[0], channels = first[1], count = steps.size();
  std::vector<double> out(batch * count * channels);
  std::vector<const Tensor*> inputs;
  for (std::size_t t = 0; t < count; ++t) {
    if (steps[t].shape() != first) {
      throw ShapeError("stack_steps: step " + std::to_string(t) + " has shape " +
                       shape_to_string(steps[t].shape()) + ", expected " +
                       shape_to_string(first));
    }
    auto v = steps[t].values();
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy_n(v.begin() + b * channels, channels,
                  out.begin() + (b * count + t) * channels);
    }
    inputs.push_back(&steps[t]);
  }
  return finish({batch, count, channels}, std::move(out), std::move(inputs),
                [batch, count, channels](std::span<const double> g, GradIn gin) {
                  for (std::size_t t = 0; t < count; ++t) {
                    auto* dt = gin[t];
                    if (!dt) continue;
                    for (std::size_t b = 0; b < batch; ++b) {
                      const double* src = g.data() + (b * count + t) * channels;
                      double* dst = dt->data() + b * channels;
                      for (std::size_t c = 0; c < channels; ++c) dst[c] += src[c];
                    }
                  }
                });
}

Tensor reverse_time(const Tensor& seq) {
  if (seq.rank() != 2 && seq.rank() != 3) {
    throw ShapeError("reverse_time expects [L, C] or [B, L, C], got " +
                     shape_to_string(seq.shape()));
  }
  const bool batched = seq.rank() == 3;
  const std::size_t batch = batched ? seq.dim(0) : 1;
  const std::size_t steps = seq.dim(batched ? 1 : 0);
  const std::size_t channels = seq.dim(batched ? 2 : 1);
  auto v = seq.values();
  std::vector<double> out(v.size());
  auto flip = [batch, steps, channels](const double* src, double* dst, bool accumulate) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t t = 0; t < steps; ++t) {
        const double* s = src + (b * steps + t) * channels;
        double* d = dst + (b * steps + (steps - 1 - t)) * channels;
        for (std::size_t c = 0; c < channels; ++c) {
          if (accumulate) {
            d[c] += s[c];
          } else {
            d[c] = s[c];
          }
        }
      }
    }
  };
  flip(v.data(), out.data(), false);
  return finish(seq.shape(), std::move(out), {&seq},
                [flip](std::span<const double> g, GradIn gin) {
                  flip(g.data(), gin[0]->data(), true);
                });
}

Tensor conv1d_valid(const Tensor& x, const Tensor& kernels) {
  if ((x.rank() != 2 && x.rank() != 3) || kernels.rank() != 3) {
    throw ShapeError("conv1d: expected x [B, L, C] or [L, C] and kernels [F, C, k], got " +
                     shape_to_string(x.shape()) + " and " + shape_to_string(kernels.shape()));
  }
  const bool batched = x.rank() == 3;
  const std::size_t batch = batched ? x.dim(0) : 1;
  const std::size_t steps = x.dim(batched ? 1 : 0);
  const std::size_t channels = x.dim(batched ? 2 : 1);
  const std::size_t filters = kernels.dim(0), width = kernels.dim(2);
  if (kernels.dim(1) != channels) {
    throw ShapeError("conv1d: kernels " + shape_to_string(kernels.shape()) +
                     " expect " + std::to_string(kernels.dim(1)) +
                     " input channels, input has " + std::to_string(channels));
  }
  if (steps < width) {
    throw ShapeError("conv1d: sequence too short (length " + std::to_string(steps) +
                     " < kernel size " + std::to_string(width) + ")");
  }
  const std::size_t out_steps = steps - width + 1;
  // Kernels rearranged to [k][C][F] so the innermost loop runs over filters.
  auto kv = kernels.values();
  auto transposed = std::make_shared<std::vector<double>>(kv.size());
  for (std::size_t f = 0; f < filters; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t j = 0; j < width; ++j) {
        (*transposed)[(j * channels + c) * filters + f] = kv[(f * channels + c) * width + j];
      }
    }
  }
  auto xv = x.values();
  std::vector<double> out(batch * out_steps * filters, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < out_steps; ++t) {
      double* o = out.data() + (b * out_steps + t) * filters;
      for (std::size_t j = 0; j < width; ++j) {
        const double* xin = xv.data() + (b * steps + t + j) * channels;
        for (std::size_t c = 0; c < channels; ++c) {
          const double a = xin[c];
          if (a == 0.0) continue;
          const double* krow = transposed->data() + (j * channels + c) * filters;
          for (std::size_t f = 0; f < filters; ++f) o[f] += a * krow[f];
        }
      }
    }
  }
  Shape out_shape = batched ? Shape{batch, out_steps, filters} : Shape{out_steps, filters};
  Buffer xd = data_of(x);
  return finish(
      std::move(out_shape), std::move(out), {&x, &kernels},
      [xd, transposed, batch, steps, channels, filters, width, out_steps](
          std::span<const double> g, GradIn gin) {
        const auto& xv = *xd;
        std::vector<double> dkt;
        if (gin[1]) dkt.assign(transposed->size(), 0.0);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t t = 0; t < out_steps; ++t) {
            const double* go = g.data() + (b * out_steps + t) * filters;
            for (std::size_t j = 0; j < width; ++j) {
              const std::size_t row = (b * steps + t + j) * channels;
              for (std::size_t c = 0; c < channels; ++c) {
                const std::size_t kidx = (j * channels + c) * filters;
                if (gin[0]) {
                  const double* krow = transposed->data() + kidx;
                  double s = 0.0;
                  for (std::size_t f = 0; f < filters; ++f) s += go[f] * krow[f];
                  (*gin[0])[row + c] += s;
                }
                if (gin[1]) {
                  const double a = xv[row + c];
                  if (a == 0.0) continue;
                  double* dk = dkt.data() + kidx;
                  for (std::size_t f = 0; f < filters; ++f) dk[f] += a * go[f];
                }
              }
            }
          }
        }
        if (gin[1]) {
          auto& dk = *gin[1];
          for (std::size_t f = 0; f < filters; ++f) {
            for (std::size_t c = 0; c < channels; ++c) {
              for (std::size_t j = 0; j < width; ++j) {
                dk[(f * channels + c) * width + j] += dkt[(j * channels + c) * filters + f];
              }
            }
          }
        }
      });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return finish({}, std::vector<double>{s}, {&x},
                [](std::span<const double> g, GradIn gin) {
                  for (double& d : *gin[0]) d += g[0];
                });
}

Tensor mean(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  const double n = static_cast<double>(x.numel());
  return finish({}, std::vector<double>{s / n}, {&x},
                [n](std::span<const double> g, GradIn gin) {
                  for (double& d : *gin[0]) d += g[0] / n;
                });
}

namespace {

Tensor bce_impl(const Tensor& pred, const Tensor& target, const Tensor* mask) {
  if (pred.shape() != target.shape() || (mask && mask->shape() != pred.shape())) {
    throw ShapeError("bce_loss: prediction " + shape_to_string(pred.shape()) +
                     " and target " + shape_to_string(target.shape()) +
                     (mask ? " and mask " + shape_to_string(mask->shape()) : std::string()) +
                     " must have equal shapes");
  }
  auto p = pred.values();
  auto t = target.values();
  const std::size_t n = p.size();
  std::vector<double> weight(n, 1.0);
  if (mask) {
    auto m = mask->values();
    for (std::size_t i = 0; i < n; ++i) weight[i] = m[i] != 0.0 ? 1.0 : 0.0;
  }
  double count = 0.0;
  for (double w : weight) count += w;
  double total = 0.0;
  std::vector<double> slope(n, 0.0);  // d(loss_i)/d(pred_i)
  for (std::size_t i = 0; i < n; ++i) {
    if (weight[i] == 0.0) continue;
    const bool inside = p[i] >= kBceEpsilon && p[i] <= 1.0 - kBceEpsilon;
    const double pc = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
    total += -(t[i] * std::log(pc) + (1.0 - t[i]) * std::log(1.0 - pc));
    if (inside) slope[i] = (pc - t[i]) / (pc * (1.0 - pc));
  }
  const double loss = count > 0 ? total / count : 0.0;
  const double scale = count > 0 ? 1.0 / count : 0.0;
  return finish({}, std::vector<double>{loss}, {&pred},
                [slope = std::move(slope), scale](std::span<const double> g, GradIn gin) {
                  auto& dp = *gin[0];
                  for (std::size_t i = 0; i < slope.size(); ++i) dp[i] += g[0] * scale * slope[i];
                });
}

}  // namespace

Tensor bce_loss(const Tensor& pred, const Tensor& target) {
  return bce_impl(pred, target, nullptr);
}

Tensor bce_loss(const Tensor& pred, const Tensor& target, const Tensor& mask) {
  return bce_impl(pred, target, &mask);
}

}  // namespace mtme
