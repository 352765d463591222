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

#include "mtme/layers.h"

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <string>
#include <vector>

#include "mtme/error.h"
#include "mtme/ops.h"

namespace mtme {
namespace {

// Lifts an [L×C] sequence to [1×L×C]; returns whether it did.
bool as_batch(const Tensor& x, Tensor& out, const char* layer) {
  if (x.rank() == 3) {
    out = x;
    return false;
  }
  if (x.rank() == 2) {
    out = reshape(x, {1, x.dim(0), x.dim(1)});
    return true;
  }
  throw ShapeError(std::string(layer) + " expects [L, C] or [B, L, C], got " +
                   shape_to_string(x.shape()));
}

Tensor drop_batch(const Tensor& y) { return reshape(y, {y.dim(1), y.dim(2)}); }

// x [B×L×in] -> x·W + b as [B×L×H], all timesteps in one matmul.
Tensor project(const Tensor& seq, const Tensor& w, const Tensor& b) {
  const std::size_t batch = seq.dim(0), steps = seq.dim(1);
  Tensor flat = reshape(seq, {batch * steps, seq.dim(2)});
  Tensor y = add(matmul(flat, w), b);
  return reshape(y, {batch, steps, w.dim(1)});
}

Tensor initial_state(const Tensor& given, std::size_t batch, std::size_t hidden,
                     const char* what) {
  if (given.rank() == 2 && given.dim(0) == batch && given.dim(1) == hidden) return given;
  if (given.rank() == 1 && given.dim(0) == hidden) {
    Tensor row = reshape(given, {1, hidden});
    if (batch == 1) return row;
    std::vector<Tensor> rows(batch, row);
    return concat(rows, 0);
  }
  throw ShapeError(std::string(what) + " must be [" + std::to_string(hidden) + "] or [" +
                   std::to_string(batch) + ", " + std::to_string(hidden) + "], got " +
                   shape_to_string(given.shape()));
}

void check_rnn_input(const Tensor& seq, std::size_t input_size, const char* layer) {
  if (seq.dim(2) != input_size) {
    throw ShapeError(std::string(layer) + ": input has " + std::to_string(seq.dim(2)) +
                     " channels, weights expect " + std::to_string(input_size));
  }
}

Tensor gru_batched(const Tensor& seq, const GruParams& p, const Tensor& h0) {
  check_rnn_input(seq, p.input_size(), "gru");
  const Tensor xz = project(seq, p.w_z, p.b_z);
  const Tensor xr = project(seq, p.w_r, p.b_r);
  const Tensor xh = project(seq, p.w_h, p.b_h);
  Tensor h = h0;
  std::vector<Tensor> outputs;
  outputs.reserve(seq.dim(1));
  for (std::size_t t = 0; t < seq.dim(1); ++t) {
    Tensor z = sigmoid(add(time_step(xz, t), matmul(h, p.u_z)));
    Tensor r = sigmoid(add(time_step(xr, t), matmul(h, p.u_r)));
    Tensor cand = tanh(add(time_step(xh, t), matmul(mul(r, h), p.u_h)));
    h = add(h, mul(z, sub(cand, h)));
    outputs.push_back(h);
  }
  return stack_steps(outputs);
}

Tensor lstm_batched(const Tensor& seq, const LstmParams& p, const Tensor& h0, const Tensor& c0) {
  check_rnn_input(seq, p.input_size(), "lstm");
  const Tensor xi = project(seq, p.w_i, p.b_i);
  const Tensor xf = project(seq, p.w_f, p.b_f);
  const Tensor xg = project(seq, p.w_g, p.b_g);
  const Tensor xo = project(seq, p.w_o, p.b_o);
  Tensor h = h0;
  Tensor c = c0;
  std::vector<Tensor> outputs;
  outputs.reserve(seq.dim(1));
  for (std::size_t t = 0; t < seq.dim(1); ++t) {
    Tensor i = sigmoid(add(time_step(xi, t), matmul(h, p.u_i)));
    Tensor f = sigmoid(add(time_step(xf, t), matmul(h, p.u_f)));
    Tensor g = tanh(add(time_step(xg, t), matmul(h, p.u_g)));
    Tensor o = sigmoid(add(time_step(xo, t), matmul(h, p.u_o)));
    c = add(mul(f, c), mul(i, g));
    h = mul(o, tanh(c));
    outputs.push_back(h);
  }
  return stack_steps(outputs);
}

}  // namespace

Tensor dense_forward(const Tensor& x, const DenseParams& p) {
  if (x.rank() != 2 || p.weight.rank() != 2 || x.dim(1) != p.weight.dim(0)) {
    throw ShapeError("dense: input " + shape_to_string(x.shape()) +
                     " incompatible with weight " + shape_to_string(p.weight.shape()));
  }
  Tensor y = add(matmul(x, p.weight), p.bias);
  switch (p.activation) {
    case Activation::kSigmoid: return sigmoid(y);
    case Activation::kRelu: return relu(y);
    case Activation::kNone: break;
  }
  return y;
}

Tensor conv1d_forward(const Tensor& x, const Conv1dParams& p) {
  return relu(add(conv1d_valid(x, p.kernels), p.bias));
}

std::size_t hidden_size(const RnnParams& p) {
  return std::visit([](const auto& q) { return q.hidden_size(); }, p);
}

Tensor gru_forward(const Tensor& x, const GruParams& p) {
  return gru_forward(x, p, Tensor::zeros({p.hidden_size()}));
}

Tensor gru_forward(const Tensor& x, const GruParams& p, const Tensor& h0) {
  Tensor seq;
  const bool lifted = as_batch(x, seq, "gru");
  Tensor y = gru_batched(seq, p, initial_state(h0, seq.dim(0), p.hidden_size(), "gru h0"));
  return lifted ? drop_batch(y) : y;
}

Tensor lstm_forward(const Tensor& x, const LstmParams& p) {
  const Tensor zero = Tensor::zeros({p.hidden_size()});
  return lstm_forward(x, p, zero, zero);
}

Tensor lstm_forward(const Tensor& x, const LstmParams& p, const Tensor& h0, const Tensor& c0) {
  Tensor seq;
  const bool lifted = as_batch(x, seq, "lstm");
  const std::size_t batch = seq.dim(0), hidden = p.hidden_size();
  Tensor y = lstm_batched(seq, p, initial_state(h0, batch, hidden, "lstm h0"),
                          initial_state(c0, batch, hidden, "lstm c0"));
  return lifted ? drop_batch(y) : y;
}

Tensor rnn_forward(const Tensor& x, const RnnParams& p) {
  return std::visit(
      [&x](const auto& q) -> Tensor {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, GruParams>) {
          return gru_forward(x, q);
        } else {
          return lstm_forward(x, q);
        }
      },
      p);
}

Tensor bidirectional(const Tensor& x, const RnnParams& fwd, const RnnParams& bwd) {
  if (hidden_size(fwd) != hidden_size(bwd)) {
    throw ShapeError("bidirectional: forward hidden size " + std::to_string(hidden_size(fwd)) +
                     " differs from backward hidden size " + std::to_string(hidden_size(bwd)));
  }
  Tensor forward = rnn_forward(x, fwd);
  Tensor backward = reverse_time(rnn_forward(reverse_time(x), bwd));
  return concat(std::vector<Tensor>{forward, backward}, x.rank() - 1);
}

EmbeddingTable::EmbeddingTable(Tensor matrix) {
  if (matrix.rank() != 2 || matrix.dim(0) < 2) {
    throw ShapeError("embedding table must be [V, D] with V >= 2, got " +
                     shape_to_string(matrix.shape()));
  }
  auto v = matrix.mutable_values();
  std::fill_n(v.begin(), 2 * matrix.dim(1), 0.0);
  matrix_ = std::move(matrix);
}

Tensor embed(std::span<const std::int32_t> ids, const EmbeddingTable& table) {
  if (ids.empty()) throw ShapeError("embed: empty sequence");
  const std::size_t dim = table.dim(), vocab = table.vocab_size();
  auto src = table.matrix().values();
  std::vector<double> out(ids.size() * dim);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const std::int32_t id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw IndexError("embed: id " + std::to_string(id) + " at position " + std::to_string(t) +
                       " outside vocabulary of size " + std::to_string(vocab));
    }
    std::copy_n(src.begin() + static_cast<std::size_t>(id) * dim, dim, out.begin() + t * dim);
  }
  return Tensor({ids.size(), dim}, std::move(out));
}

Tensor embed(const IdMatrix& ids, const EmbeddingTable& table) {
  if (ids.rows == 0 || ids.cols == 0) throw ShapeError("embed: empty batch");
  Tensor flat = embed(std::span<const std::int32_t>(ids.ids), table);
  return reshape(flat, {ids.rows, ids.cols, table.dim()});
}

Tensor spatial_dropout(const Tensor& x, const SpatialDropoutCfg& cfg, Rng& rng, bool training) {
  if (!training || cfg.rate <= 0.0) return x;
  if (cfg.rate >= 1.0) throw ConfigError("spatial dropout rate must be in [0, 1)");
  Tensor seq;
  as_batch(x, seq, "spatial_dropout");
  const std::size_t batch = seq.dim(0), steps = seq.dim(1), channels = seq.dim(2);
  const double keep_scale = 1.0 / (1.0 - cfg.rate);
  std::vector<double> channel_mask(batch * channels);
  for (double& m : channel_mask) m = rng.bernoulli(cfg.rate) ? 0.0 : keep_scale;
  std::vector<double> mask(x.numel());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      std::copy_n(channel_mask.begin() + b * channels, channels,
                  mask.begin() + (b * steps + t) * channels);
    }
  }
  return mul(x, Tensor(x.shape(), std::move(mask)));
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (!training || rate <= 0.0) return x;
  if (rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.numel());
  for (double& m : mask) m = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return mul(x, Tensor(x.shape(), std::move(mask)));
}

Tensor init_glorot(const Shape& shape, Rng& rng) {
  if (shape.size() != 2) {
    throw ShapeError("init_glorot needs a 2-D shape, got " + shape_to_string(shape));
  }
  return init_glorot(shape, shape[0], shape[1], rng);
}

Tensor init_glorot(const Shape& shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) v = rng.uniform(-limit, limit);
  return Tensor(shape, std::move(values));
}

Tensor init_bias(std::size_t size) { return Tensor::zeros({size}); }

DenseParams make_dense(std::size_t in, std::size_t out, Activation activation, Rng& rng) {
  return DenseParams{init_glorot({in, out}, rng), init_bias(out), activation};
}

Conv1dParams make_conv1d(std::size_t in_channels, std::size_t filters, std::size_t kernel_size,
                         Rng& rng) {
  if (kernel_size == 0 || filters == 0) throw ConfigError("conv1d needs kernel_size, filters >= 1");
  return Conv1dParams{init_glorot({filters, in_channels, kernel_size}, in_channels * kernel_size,
                                  filters * kernel_size, rng),
                      init_bias(filters)};
}

GruParams make_gru(std::size_t input_size, std::size_t hidden_size, Rng& rng) {
  GruParams p;
  p.w_z = init_glorot({input_size, hidden_size}, rng);
  p.w_r = init_glorot({input_size, hidden_size}, rng);
  p.w_h = init_glorot({input_size, hidden_size}, rng);
  p.u_z = init_glorot({hidden_size, hidden_size}, rng);
  p.u_r = init_glorot({hidden_size, hidden_size}, rng);
  p.u_h = init_glorot({hidden_size, hidden_size}, rng);
  p.b_z = init_bias(hidden_size);
  p.b_r = init_bias(hidden_size);
  p.b_h = init_bias(hidden_size);
  return p;
}

LstmParams make_lstm(std::size_t input_size, std::size_t hidden_size, Rng& rng) {
  LstmParams p;
  p.w_i = init_glorot({input_size, hidden_size}, rng);
  p.w_f = init_glorot({input_size, hidden_size}, rng);
  p.w_g = init_glorot({input_size, hidden_size}, rng);
  p.w_o = init_glorot({input_size, hidden_size}, rng);
  p.u_i = init_glorot({hidden_size, hidden_size}, rng);
  p.u_f = init_glorot({hidden_size, hidden_size}, rng);
  p.u_g = init_glorot({hidden_size, hidden_size}, rng);
  p.u_o = init_glorot({hidden_size, hidden_size}, rng);
  p.b_i = init_bias(hidden_size);
  p.b_f = init_bias(hidden_size);
  p.b_g = init_bias(hidden_size);
  p.b_o = init_bias(hidden_size);
  return p;
}

}  // namespace mtme
