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
#include <cstdint>
#include <span>
#include <variant>

#include "mtme/rng.h"
#include "mtme/tensor.h"

namespace mtme {

// Sequences are [L×C] for a single example or [B×L×C] for a batch; every
// sequence layer accepts both and returns the same rank it was given.

inline constexpr std::size_t kDefaultRnnHidden = 128;
inline constexpr std::size_t kDefaultConvFilters = 64;
inline constexpr std::size_t kDefaultConvKernel = 2;
inline constexpr double kDefaultDropoutRate = 0.2;

enum class Activation { kNone, kSigmoid, kRelu };

struct DenseParams {
  Tensor weight;  // [in×out]
  Tensor bias;    // [out]
  Activation activation = Activation::kNone;

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f("weight", self.weight);
    f("bias", self.bias);
  }
};

// x [B×in] -> activation(x·W + b) [B×out].
Tensor dense_forward(const Tensor& x, const DenseParams& p);

struct Conv1dParams {
  Tensor kernels;  // [filters×in_channels×kernel_size]
  Tensor bias;     // [filters]

  std::size_t filters() const { return kernels.dim(0); }
  std::size_t in_channels() const { return kernels.dim(1); }
  std::size_t kernel_size() const { return kernels.dim(2); }

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f("kernels", self.kernels);
    f("bias", self.bias);
  }
};

// Valid cross-correlation + bias + ReLU. Output length is L − k + 1.
Tensor conv1d_forward(const Tensor& x, const Conv1dParams& p);

// z = σ(x·Wz + h·Uz + bz)
// r = σ(x·Wr + h·Ur + br)
// h̃ = tanh(x·Wh + (r⊙h)·Uh + bh)
// h' = (1 − z)⊙h + z⊙h̃
struct GruParams {
  Tensor w_z, w_r, w_h;  // [in×H]
  Tensor u_z, u_r, u_h;  // [H×H]
  Tensor b_z, b_r, b_h;  // [H]

  std::size_t input_size() const { return w_z.dim(0); }
  std::size_t hidden_size() const { return w_z.dim(1); }

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f("w_z", self.w_z);
    f("w_r", self.w_r);
    f("w_h", self.w_h);
    f("u_z", self.u_z);
    f("u_r", self.u_r);
    f("u_h", self.u_h);
    f("b_z", self.b_z);
    f("b_r", self.b_r);
    f("b_h", self.b_h);
  }
};

// i, f, o = σ(x·W + h·U + b); g = tanh(x·Wg + h·Ug + bg)
// c' = f⊙c + i⊙g; h' = o⊙tanh(c')
struct LstmParams {
  Tensor w_i, w_f, w_g, w_o;
  Tensor u_i, u_f, u_g, u_o;
  Tensor b_i, b_f, b_g, b_o;

  std::size_t input_size() const { return w_i.dim(0); }
  std::size_t hidden_size() const { return w_i.dim(1); }

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f("w_i", self.w_i);
    f("w_f", self.w_f);
    f("w_g", self.w_g);
    f("w_o", self.w_o);
    f("u_i", self.u_i);
    f("u_f", self.u_f);
    f("u_g", self.u_g);
    f("u_o", self.u_o);
    f("b_i", self.b_i);
    f("b_f", self.b_f);
    f("b_g", self.b_g);
    f("b_o", self.b_o);
  }
};

using RnnParams = std::variant<GruParams, LstmParams>;

std::size_t hidden_size(const RnnParams& p);

// Hidden state for every timestep. Initial states default to zeros; explicit
// ones may be [H] (shared by the batch) or [B×H].
Tensor gru_forward(const Tensor& x, const GruParams& p);
Tensor gru_forward(const Tensor& x, const GruParams& p, const Tensor& h0);
Tensor lstm_forward(const Tensor& x, const LstmParams& p);
Tensor lstm_forward(const Tensor& x, const LstmParams& p, const Tensor& h0, const Tensor& c0);
Tensor rnn_forward(const Tensor& x, const RnnParams& p);

// [forward pass | time-reversed pass over reversed input] on the feature
// axis; the forward half occupies channels [0, H).
Tensor bidirectional(const Tensor& x, const RnnParams& fwd, const RnnParams& bwd);

// Frozen lookup table [V×D]. Rows 0 (padding) and 1 (out of vocabulary) are
// forced to zero on construction.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(Tensor matrix);

  const Tensor& matrix() const { return matrix_; }
  std::size_t vocab_size() const { return matrix_.dim(0); }
  std::size_t dim() const { return matrix_.dim(1); }

 private:
  Tensor matrix_;
};

// Row lookup; the result is an untracked constant, so the table never
// receives a gradient.
Tensor embed(std::span<const std::int32_t> ids, const EmbeddingTable& table);
Tensor embed(const IdMatrix& ids, const EmbeddingTable& table);

struct SpatialDropoutCfg {
  double rate = kDefaultDropoutRate;
};

// Training mode zeroes whole channels across every timestep with probability
// `rate` and scales survivors by 1/(1 − rate). Identity at inference.
Tensor spatial_dropout(const Tensor& x, const SpatialDropoutCfg& cfg, Rng& rng, bool training);

// Ordinary inverted dropout on individual activations.
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training);

// Uniform in ±sqrt(6 / (fan_in + fan_out)); the 2-D form reads the fans from
// the shape.
Tensor init_glorot(const Shape& shape, Rng& rng);
Tensor init_glorot(const Shape& shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);
// Companion rule for biases.
Tensor init_bias(std::size_t size);

DenseParams make_dense(std::size_t in, std::size_t out, Activation activation, Rng& rng);
Conv1dParams make_conv1d(std::size_t in_channels, std::size_t filters, std::size_t kernel_size,
                         Rng& rng);
GruParams make_gru(std::size_t input_size, std::size_t hidden_size, Rng& rng);
LstmParams make_lstm(std::size_t input_size, std::size_t hidden_size, Rng& rng);

}  // namespace mtme
