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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mtme/error.h"
#include "mtme/layers.h"
#include "mtme/ops.h"
#include "mtme/rng.h"

namespace mtme {
namespace {

using Vec = std::vector<double>;

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// x·W + h·U + b for one timestep, computed with plain loops.
Vec affine(const Vec& x, const Tensor& w, const Vec& h, const Tensor& u, const Tensor& b) {
  const std::size_t hidden = b.numel();
  Vec out(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    double acc = b[j];
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * w.at(i, j);
    for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * u.at(i, j);
    out[j] = acc;
  }
  return out;
}

Vec row(const Tensor& x, std::size_t t) {
  const std::size_t c = x.dim(1);
  return Vec(x.values().begin() + t * c, x.values().begin() + (t + 1) * c);
}

std::vector<Vec> naive_gru(const Tensor& x, const GruParams& p, Vec h) {
  std::vector<Vec> out;
  for (std::size_t t = 0; t < x.dim(0); ++t) {
    const Vec xt = row(x, t);
    const Vec z = affine(xt, p.w_z, h, p.u_z, p.b_z);
    const Vec r = affine(xt, p.w_r, h, p.u_r, p.b_r);
    Vec rh(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) rh[j] = sig(r[j]) * h[j];
    const Vec cand = affine(xt, p.w_h, rh, p.u_h, p.b_h);
    for (std::size_t j = 0; j < h.size(); ++j) {
      const double zj = sig(z[j]);
      h[j] = (1 - zj) * h[j] + zj * std::tanh(cand[j]);
    }
    out.push_back(h);
  }
  return out;
}

std::vector<Vec> naive_lstm(const Tensor& x, const LstmParams& p, Vec h, Vec c) {
  std::vector<Vec> out;
  for (std::size_t t = 0; t < x.dim(0); ++t) {
    const Vec xt = row(x, t);
    const Vec i = affine(xt, p.w_i, h, p.u_i, p.b_i);
    const Vec f = affine(xt, p.w_f, h, p.u_f, p.b_f);
    const Vec g = affine(xt, p.w_g, h, p.u_g, p.b_g);
    const Vec o = affine(xt, p.w_o, h, p.u_o, p.b_o);
    for (std::size_t j = 0; j < h.size(); ++j) {
      c[j] = sig(f[j]) * c[j] + sig(i[j]) * std::tanh(g[j]);
      h[j] = sig(o[j]) * std::tanh(c[j]);
    }
    out.push_back(h);
  }
  return out;
}

Tensor random_tensor(const Shape& shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.normal() * 0.5;
  return Tensor(shape, v);
}

void randomize(GruParams& p, Rng& rng) {
  GruParams::visit(p, [&](const char*, Tensor& t) { t = random_tensor(t.shape(), rng); });
}
void randomize(LstmParams& p, Rng& rng) {
  LstmParams::visit(p, [&](const char*, Tensor& t) { t = random_tensor(t.shape(), rng); });
}

TEST(DenseTest, IdentityAndHandValues) {
  DenseParams id{Tensor::matrix({{1, 0}, {0, 1}}), Tensor::vector({0, 0}), Activation::kNone};
  Tensor x = Tensor::matrix({{0.3, -2}});
  EXPECT_TRUE(bitwise_equal(dense_forward(x, id), x));

  DenseParams p{Tensor::matrix({{1}, {1}}), Tensor::vector({-2}), Activation::kSigmoid};
  EXPECT_EQ(dense_forward(Tensor::matrix({{1, 1}}), p).item(), 0.5);

  DenseParams r{Tensor::matrix({{1, 2}, {3, 4}}), Tensor::vector({0, 0}), Activation::kRelu};
  Tensor y = dense_forward(Tensor::matrix({{-1, -1}}), r);
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 0.0);
  EXPECT_THROW(dense_forward(Tensor::matrix({{1, 2, 3}}), p), ShapeError);
}

TEST(Conv1dTest, IdentityKernelAndSlidingSum) {
  Conv1dParams id{Tensor({1, 1, 1}, {1.0}), Tensor::vector({-1.5})};
  Tensor x = Tensor::matrix({{1}, {2}, {-3}});
  Tensor y = conv1d_forward(x, id);
  ASSERT_EQ(y.shape(), (Shape{3, 1}));
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 0.5);
  EXPECT_EQ(y[2], 0.0);

  Conv1dParams sum2{Tensor({1, 1, 2}, {1.0, 1.0}), Tensor::vector({0})};
  Tensor s = conv1d_forward(Tensor::matrix({{1}, {2}, {3}}), sum2);
  ASSERT_EQ(s.shape(), (Shape{2, 1}));
  EXPECT_EQ(s[0], 3.0);
  EXPECT_EQ(s[1], 5.0);
}

TEST(Conv1dTest, ShapeArithmeticAndTooShort) {
  Rng rng(1);
  Conv1dParams p = make_conv1d(8, 64, 2, rng);
  EXPECT_EQ(conv1d_forward(Tensor::zeros({100, 8}), p).shape(), (Shape{99, 64}));
  EXPECT_THROW(conv1d_forward(Tensor::zeros({1, 8}), p), ShapeError);
}

TEST(Conv1dTest, MultiChannelMatchesLoops) {
  Rng rng(2);
  Conv1dParams p{random_tensor({3, 2, 3}, rng), random_tensor({3}, rng)};
  Tensor x = random_tensor({6, 2}, rng);
  Tensor y = conv1d_forward(x, p);
  ASSERT_EQ(y.shape(), (Shape{4, 3}));
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t f = 0; f < 3; ++f) {
      double acc = p.bias[f];
      for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < 3; ++k) acc += x.at(t + k, c) * p.kernels.at(f, c, k);
      }
      EXPECT_NEAR(y.at(t, f), std::max(acc, 0.0), 1e-12);
    }
  }
}

TEST(GruTest, ZeroWeightsHalveTheState) {
  Rng rng(3);
  GruParams p = make_gru(2, 3, rng);
  GruParams::visit(p, [](const char*, Tensor& t) { t = Tensor::zeros(t.shape()); });
  Tensor h0 = Tensor::vector({1.0, -2.0, 0.5});
  Tensor y = gru_forward(random_tensor({4, 2}, rng), p, h0);
  ASSERT_EQ(y.shape(), (Shape{4, 3}));
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_DOUBLE_EQ(y.at(t, j), std::pow(0.5, static_cast<double>(t + 1)) * h0[j]);
    }
  }
}

TEST(GruTest, ScalarCellByHand) {
  GruParams p{Tensor::matrix({{0.5}}), Tensor::matrix({{-1}}), Tensor::matrix({{2}}),
              Tensor::matrix({{0.1}}), Tensor::matrix({{0.2}}), Tensor::matrix({{0.3}}),
              Tensor::vector({0}),     Tensor::vector({0.1}),   Tensor::vector({-0.2})};
  const double x = 0.8, h = 0.4;
  const double z = sig(0.5 * x + 0.1 * h);
  const double r = sig(-1 * x + 0.2 * h + 0.1);
  const double cand = std::tanh(2 * x + 0.3 * (r * h) - 0.2);
  const double want = (1 - z) * h + z * cand;
  Tensor y = gru_forward(Tensor::matrix({{x}}), p, Tensor::vector({h}));
  EXPECT_NEAR(y.item(), want, 1e-15);
}

TEST(GruTest, MatchesNaiveRecurrence) {
  Rng rng(4);
  GruParams p = make_gru(3, 4, rng);
  randomize(p, rng);
  Tensor x = random_tensor({6, 3}, rng);
  Tensor h0 = random_tensor({4}, rng);
  Tensor y = gru_forward(x, p, h0);
  const auto want = naive_gru(x, p, Vec(h0.values().begin(), h0.values().end()));
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(y.at(t, j), want[t][j], 1e-12);
  }
}

TEST(GruTest, BatchedEqualsPerExample) {
  Rng rng(5);
  GruParams p = make_gru(2, 3, rng);
  Tensor a = random_tensor({4, 2}, rng);
  Tensor b = random_tensor({4, 2}, rng);
  Tensor both = concat({reshape(a, {1, 4, 2}), reshape(b, {1, 4, 2})}, 0);
  Tensor y = gru_forward(both, p);
  Tensor ya = gru_forward(a, p);
  Tensor yb = gru_forward(b, p);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_NEAR(y[i], ya[i], 1e-14);
    EXPECT_NEAR(y[12 + i], yb[i], 1e-14);
  }
}

TEST(LstmTest, ZeroWeightsHalveTheCell) {
  Rng rng(6);
  LstmParams p = make_lstm(2, 2, rng);
  LstmParams::visit(p, [](const char*, Tensor& t) { t = Tensor::zeros(t.shape()); });
  Tensor c0 = Tensor::vector({2.0, -1.0});
  Tensor y = lstm_forward(random_tensor({3, 2}, rng), p, Tensor::zeros({2}), c0);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double c = std::pow(0.5, static_cast<double>(t + 1)) * c0[j];
      EXPECT_DOUBLE_EQ(y.at(t, j), 0.5 * std::tanh(c));
    }
  }
}

TEST(LstmTest, ScalarCellByHand) {
  LstmParams p{Tensor::matrix({{0.3}}), Tensor::matrix({{-0.4}}), Tensor::matrix({{1.1}}),
               Tensor::matrix({{0.6}}), Tensor::matrix({{0.2}}),  Tensor::matrix({{0.1}}),
               Tensor::matrix({{-0.5}}), Tensor::matrix({{0.7}}), Tensor::vector({0.05}),
               Tensor::vector({1.0}),   Tensor::vector({0}),      Tensor::vector({-0.1})};
  const double x = -0.6, h = 0.25, c = 0.9;
  const double i = sig(0.3 * x + 0.2 * h + 0.05);
  const double f = sig(-0.4 * x + 0.1 * h + 1.0);
  const double g = std::tanh(1.1 * x - 0.5 * h);
  const double o = sig(0.6 * x + 0.7 * h - 0.1);
  const double want = o * std::tanh(f * c + i * g);
  Tensor y = lstm_forward(Tensor::matrix({{x}}), p, Tensor::vector({h}), Tensor::vector({c}));
  EXPECT_NEAR(y.item(), want, 1e-15);
}

TEST(LstmTest, MatchesNaiveRecurrence) {
  Rng rng(7);
  LstmParams p = make_lstm(3, 4, rng);
  randomize(p, rng);
  Tensor x = random_tensor({5, 3}, rng);
  Tensor h0 = random_tensor({4}, rng);
  Tensor c0 = random_tensor({4}, rng);
  Tensor y = lstm_forward(x, p, h0, c0);
  const auto want = naive_lstm(x, p, Vec(h0.values().begin(), h0.values().end()),
                               Vec(c0.values().begin(), c0.values().end()));
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(y.at(t, j), want[t][j], 1e-12);
  }
}

TEST(LstmTest, WrongInitialStateShapeThrows) {
  Rng rng(8);
  LstmParams p = make_lstm(2, 3, rng);
  EXPECT_THROW(lstm_forward(Tensor::zeros({4, 2}), p, Tensor::zeros({2}), Tensor::zeros({3})),
               ShapeError);
  EXPECT_THROW(lstm_forward(Tensor::zeros({4, 5}), p), ShapeError);
}

TEST(BidirectionalTest, PalindromeMirrorsHalves) {
  Rng rng(9);
  GruParams p = make_gru(2, 3, rng);
  Tensor x = Tensor::matrix({{1, 2}, {-1, 0.5}, {3, 3}, {-1, 0.5}, {1, 2}});
  Tensor y = bidirectional(x, p, p);
  ASSERT_EQ(y.shape(), (Shape{5, 6}));
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(y.at(t, j), y.at(4 - t, 3 + j), 1e-14);
  }
}

TEST(BidirectionalTest, ShapeAndSingleStep) {
  Rng rng(10);
  RnnParams f = make_lstm(4, 128, rng);
  RnnParams b = make_lstm(4, 128, rng);
  EXPECT_EQ(bidirectional(Tensor::zeros({3, 4}), f, b).shape(), (Shape{3, 256}));

  GruParams gf = make_gru(2, 2, rng), gb = make_gru(2, 2, rng);
  Tensor x = Tensor::matrix({{0.3, -0.9}});
  Tensor y = bidirectional(x, gf, gb);
  Tensor yf = gru_forward(x, gf), yb = gru_forward(x, gb);
  EXPECT_EQ(y[0], yf[0]);
  EXPECT_EQ(y[1], yf[1]);
  EXPECT_EQ(y[2], yb[0]);
  EXPECT_EQ(y[3], yb[1]);
  EXPECT_THROW(bidirectional(x, make_gru(2, 2, rng), make_gru(2, 3, rng)), ShapeError);
}

TEST(EmbeddingTest, LookupRowsAndReservedZeros) {
  Rng rng(11);
  Tensor m = random_tensor({8, 3}, rng);
  EmbeddingTable table(m);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(table.matrix().at(0, j), 0.0);
    EXPECT_EQ(table.matrix().at(1, j), 0.0);
  }
  std::vector<std::int32_t> ids{5, 0, 5};
  Tensor e = embed(ids, table);
  ASSERT_EQ(e.shape(), (Shape{3, 3}));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(e.at(0, j), m.at(5, j));
    EXPECT_EQ(e.at(1, j), 0.0);
    EXPECT_EQ(e.at(2, j), m.at(5, j));
  }
  EXPECT_FALSE(e.requires_grad());
  std::vector<std::int32_t> bad{2, 8};
  EXPECT_THROW(embed(bad, table), IndexError);
}

TEST(DropoutTest, InferenceAndZeroRateAreIdentity) {
  Rng rng(12);
  Tensor x = random_tensor({4, 5}, rng);
  EXPECT_TRUE(bitwise_equal(spatial_dropout(x, {0.5}, rng, false), x));
  EXPECT_TRUE(bitwise_equal(spatial_dropout(x, {0.0}, rng, true), x));
  EXPECT_TRUE(bitwise_equal(dropout(x, 0.5, rng, false), x));
}

TEST(DropoutTest, SpatialMaskCoversWholeChannels) {
  Rng rng(13);
  Tensor x = Tensor::full({6, 40}, 1.0);
  Tensor y = spatial_dropout(x, {0.5}, rng, true);
  std::size_t dropped = 0;
  for (std::size_t c = 0; c < 40; ++c) {
    const double first = y.at(0, c);
    EXPECT_TRUE(first == 0.0 || first == 2.0);
    for (std::size_t t = 1; t < 6; ++t) EXPECT_EQ(y.at(t, c), first);
    if (first == 0.0) ++dropped;
  }
  EXPECT_GT(dropped, 0u);
  EXPECT_LT(dropped, 40u);
}

TEST(InitTest, GlorotBoundAndDeterminism) {
  Rng a(14), b(14);
  Tensor w = init_glorot({100, 100}, a);
  const double limit = std::sqrt(6.0 / 200.0);
  for (double v : w.values()) EXPECT_LE(std::abs(v), limit);
  EXPECT_TRUE(bitwise_equal(w, init_glorot({100, 100}, b)));
  Tensor bias = init_bias(5);
  for (double v : bias.values()) EXPECT_EQ(v, 0.0);
}

}  // namespace
}  // namespace mtme
