// Copyright 2026 The Triplet Tagger Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "triplet_tagger/ops.h"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "triplet_tagger/errors.h"
#include "triplet_tagger/random.h"

namespace tagger::ops {
namespace {

std::vector<double> Values(const Tensor& t) {
  return {t.values().begin(), t.values().end()};
}

Tensor RandomTensor(Rng& rng, Shape shape, double scale = 1.0) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = scale * rng.Normal();
  return Tensor(std::move(shape), std::move(v));
}

TEST(MatMulTest, IdentityLeavesMatrixUnchanged) {
  Tape tape;
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor m({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(Values(MatMul(tape, eye, m)), (std::vector<double>{1, 2, 3, 4}));
}

TEST(MatMulTest, OneByOne) {
  Tape tape;
  EXPECT_EQ(MatMul(tape, Tensor({1, 1}, {2}), Tensor({1, 1}, {3}))[0], 6.0);
}

TEST(MatMulTest, TwoByTwoProduct) {
  Tape tape;
  Tensor y = MatMul(tape, Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2, 2}, {5, 6, 7, 8}));
  EXPECT_EQ(y.shape(), (Shape{2, 2}));
  EXPECT_EQ(Values(y), (std::vector<double>{19, 22, 43, 50}));
}

TEST(MatMulTest, MatchesNaiveTripleLoop) {
  Rng rng(3);
  const std::size_t m = 5, k = 7, n = 6;
  Tensor a = RandomTensor(rng, {m, k});
  Tensor b = RandomTensor(rng, {k, n});
  Tape tape;
  Tensor y = MatMul(tape, a, b);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double ref = 0;
      for (std::size_t p = 0; p < k; ++p) ref += a[i * k + p] * b[p * n + j];
      EXPECT_NEAR(y[i * n + j], ref, 1e-12);
    }
  }
}

TEST(MatMulTest, InnerDimMismatchIsDimensionError) {
  Tape tape;
  EXPECT_THROW(MatMul(tape, Tensor::Zeros({2, 3}), Tensor::Zeros({2, 3})), DimensionError);
  EXPECT_THROW(MatMul(tape, Tensor::Zeros({6}), Tensor::Zeros({6, 1})), DimensionError);
}

TEST(ElementwiseTest, ShapeMismatchIsDimensionError) {
  Tape tape;
  EXPECT_THROW(Add(tape, Tensor::Zeros({2}), Tensor::Zeros({3})), DimensionError);
  EXPECT_THROW(Mul(tape, Tensor::Zeros({2, 1}), Tensor::Zeros({1, 2})), DimensionError);
}

TEST(ElementwiseTest, OverflowIsNumericError) {
  Tape tape;
  Tensor big({1}, {1e200});
  EXPECT_THROW(Mul(tape, big, big), NumericError);
}

TEST(LinearTest, AppliesToEveryLeadingIndex) {
  Tape tape;
  Tensor x({2, 1, 2}, {1, 2, 3, 4});
  Tensor w({2, 3}, {1, 0, 1, 0, 1, 1});
  Tensor b({3}, {0.5, 0, -1});
  Tensor y = Linear(tape, x, w, b);
  EXPECT_EQ(y.shape(), (Shape{2, 1, 3}));
  EXPECT_EQ(Values(y), (std::vector<double>{1.5, 2, 2, 3.5, 4, 6}));
  Tensor no_bias = Linear(tape, x, w, Tensor());
  EXPECT_EQ(Values(no_bias), (std::vector<double>{1, 2, 3, 3, 4, 7}));
}

TEST(SoftmaxTest, EqualLogitsAreUniform) {
  Tape tape;
  EXPECT_EQ(Values(SoftmaxRows(tape, Tensor({1, 2}, {0, 0}))), (std::vector<double>{0.5, 0.5}));
  for (double c : {-30.0, 0.0, 7.0, 700.0}) {
    Tensor y = SoftmaxRows(tape, Tensor({1, 3}, {c, c, c}));
    for (double v : y.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  }
}

TEST(SoftmaxTest, LogTwoAgainstZero) {
  Tape tape;
  Tensor y = SoftmaxRows(tape, Tensor({1, 2}, {std::log(2.0), 0.0}));
  EXPECT_NEAR(y[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0 / 3.0, 1e-15);
}

TEST(SoftmaxTest, RowsSumToOneAndShiftInvariant) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor x = RandomTensor(rng, {4, 9}, 5.0);
    const double c = rng.Uniform(-50.0, 50.0);
    std::vector<double> shifted = Values(x);
    for (double& v : shifted) v += c;
    Tape tape;
    Tensor y = SoftmaxRows(tape, x);
    Tensor ys = SoftmaxRows(tape, Tensor({4, 9}, shifted));
    for (std::size_t r = 0; r < 4; ++r) {
      double sum = 0;
      for (std::size_t j = 0; j < 9; ++j) {
        const double v = y[r * 9 + j];
        EXPECT_GE(v, 0.0);
        sum += v;
        EXPECT_NEAR(v, ys[r * 9 + j], 1e-12);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(LayerNormTest, ConstantRowGivesZeros) {
  Tape tape;
  Tensor y = LayerNorm(tape, Tensor({1, 4}, {3, 3, 3, 3}), Tensor::Filled({4}, 1.0),
                       Tensor::Zeros({4}));
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNormTest, TwoElementRowWithTinyEps) {
  Tape tape;
  Tensor y = LayerNorm(tape, Tensor({1, 2}, {1, 3}), Tensor::Filled({2}, 1.0),
                       Tensor::Zeros({2}), 1e-14);
  EXPECT_NEAR(y[0], -1.0, 1e-12);
  EXPECT_NEAR(y[1], 1.0, 1e-12);
}

TEST(LayerNormTest, ZeroGainBroadcastsBias) {
  Rng rng(5);
  Tape tape;
  Tensor beta({3}, {0.25, -1.0, 4.0});
  Tensor y = LayerNorm(tape, RandomTensor(rng, {5, 3}), Tensor::Zeros({3}), beta);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(y[r * 3 + j], beta[j]);
  }
}

TEST(LayerNormTest, RejectsNonPositiveEpsAndBadGainShape) {
  Tape tape;
  Tensor x({1, 2}, {1, 3});
  EXPECT_THROW(LayerNorm(tape, x, Tensor::Filled({2}, 1.0), Tensor::Zeros({2}), 0.0),
               ContractError);
  EXPECT_THROW(LayerNorm(tape, x, Tensor::Filled({3}, 1.0), Tensor::Zeros({2})),
               DimensionError);
}

TEST(GeluTest, MatchesErfDefinition) {
  Tape tape;
  const std::vector<double> xs = {-3.0, -1.0, -0.1, 0.0, 0.5, 1.0, 2.5};
  Tensor y = Gelu(tape, Tensor({xs.size()}, xs));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_NEAR(y[i], 0.5 * xs[i] * std::erfc(-xs[i] / std::sqrt(2.0)), 1e-15);
  }
  EXPECT_EQ(y[3], 0.0);
}

TEST(NegLogSigmoidTest, StableAtExtremes) {
  Tape tape;
  Tensor y = NegLogSigmoid(tape, Tensor({4}, {0.0, -800.0, 800.0, 1.0}));
  EXPECT_NEAR(y[0], std::log(2.0), 1e-15);
  EXPECT_NEAR(y[1], 800.0, 1e-12);
  EXPECT_GE(y[2], 0.0);
  EXPECT_LT(y[2], 1e-300);
  EXPECT_NEAR(y[3], std::log1p(std::exp(-1.0)), 1e-15);
}

TEST(EmbeddingGatherTest, SelectsRows) {
  Tape tape;
  Tensor table({3, 2}, {0, 1, 10, 11, 20, 21});
  const std::vector<int> ids = {2, 0, 2, 1};
  Tensor y = EmbeddingGather(tape, table, ids, {2, 2});
  EXPECT_EQ(y.shape(), (Shape{2, 2, 2}));
  EXPECT_EQ(Values(y), (std::vector<double>{20, 21, 0, 1, 20, 21, 10, 11}));
  const std::vector<int> bad = {3};
  EXPECT_THROW(EmbeddingGather(tape, table, bad, {1}), DimensionError);
}

TEST(EmbeddingGatherTest, RepeatedIdsAccumulateGradient) {
  Tensor table = Tensor::Zeros({3, 2}, true);
  const std::vector<int> ids = {1, 1, 2};
  Tape tape;
  tape.Backward(Sum(tape, EmbeddingGather(tape, table, ids, {3})));
  EXPECT_EQ(Values(Tensor({3, 2}, {table.grad().begin(), table.grad().end()})),
            (std::vector<double>{0, 0, 2, 2, 1, 1}));
}

TEST(MaskedMeanTest, ExcludesMaskedPositions) {
  Tape tape;
  Tensor x({1, 2, 2}, {1, 1, 3, 3});
  const std::vector<std::uint8_t> first = {1, 0};
  const std::vector<std::uint8_t> both = {1, 1};
  EXPECT_EQ(Values(MaskedMean(tape, x, first)), (std::vector<double>{1, 1}));
  EXPECT_EQ(Values(MaskedMean(tape, x, both)), (std::vector<double>{2, 2}));
  const std::vector<std::uint8_t> none = {0, 0};
  EXPECT_THROW(MaskedMean(tape, x, none), ContractError);
}

TEST(DropoutTest, IdentityAtRateZeroOrWithoutGenerator) {
  Tensor x({3}, {1, 2, 3}, true);
  Tape tape;
  Rng rng(1);
  EXPECT_TRUE(Dropout(tape, x, 0.0, &rng).SharesStorageWith(x));
  EXPECT_TRUE(Dropout(tape, x, 0.5, nullptr).SharesStorageWith(x));
  EXPECT_EQ(tape.size(), 0u);
}

TEST(DropoutTest, KeptUnitsAreRescaled) {
  Rng rng(9);
  Tape tape;
  Tensor x = Tensor::Filled({1000}, 1.0);
  Tensor y = Dropout(tape, x, 0.25, &rng);
  std::size_t kept = 0;
  for (double v : y.values()) {
    if (v != 0.0) {
      EXPECT_DOUBLE_EQ(v, 1.0 / 0.75);
      ++kept;
    }
  }
  EXPECT_GT(kept, 650u);
  EXPECT_LT(kept, 850u);
}

TEST(ReductionTest, SumMeanReshape) {
  Tape tape;
  Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(Sum(tape, x).item(), 21.0);
  EXPECT_EQ(Mean(tape, x).item(), 3.5);
  Tensor r = Reshape(tape, x, {3, 2});
  EXPECT_EQ(r.shape(), (Shape{3, 2}));
  EXPECT_EQ(Values(r), Values(x));
  EXPECT_THROW(Reshape(tape, x, {4, 2}), DimensionError);
}

// Reference attention straight from the definition, one head at a time.
std::vector<double> NaiveAttention(const Tensor& q, const Tensor& k, const Tensor& v,
                                   const std::vector<std::uint8_t>& mask, std::size_t heads) {
  const std::size_t b = q.dim(0), s = q.dim(1), d = q.dim(2), dh = d / heads;
  std::vector<double> out(b * s * d, 0.0);
  for (std::size_t n = 0; n < b; ++n) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < s; ++i) {
        std::vector<double> w(s, 0.0);
        double mx = -INFINITY;
        for (std::size_t j = 0; j < s; ++j) {
          if (!mask[n * s + j]) continue;
          double dot = 0;
          for (std::size_t c = 0; c < dh; ++c) {
            dot += q[(n * s + i) * d + h * dh + c] * k[(n * s + j) * d + h * dh + c];
          }
          w[j] = dot / std::sqrt(static_cast<double>(dh));
          mx = std::max(mx, w[j]);
        }
        double z = 0;
        for (std::size_t j = 0; j < s; ++j) {
          w[j] = mask[n * s + j] ? std::exp(w[j] - mx) : 0.0;
          z += w[j];
        }
        for (std::size_t j = 0; j < s; ++j) {
          for (std::size_t c = 0; c < dh; ++c) {
            out[(n * s + i) * d + h * dh + c] += w[j] / z * v[(n * s + j) * d + h * dh + c];
          }
        }
      }
    }
  }
  return out;
}

TEST(AttentionTest, MatchesDefinition) {
  Rng rng(21);
  const std::size_t b = 2, s = 5, d = 8, heads = 2;
  Tensor q = RandomTensor(rng, {b, s, d});
  Tensor k = RandomTensor(rng, {b, s, d});
  Tensor v = RandomTensor(rng, {b, s, d});
  const std::vector<std::uint8_t> mask = {1, 1, 1, 0, 0, 1, 1, 1, 1, 1};
  Tape tape;
  Tensor y = Attention(tape, q, k, v, mask, heads);
  const std::vector<double> ref = NaiveAttention(q, k, v, mask, heads);
  ASSERT_EQ(y.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
}

TEST(AttentionTest, WeightRowsNormalizedAndMaskedKeysZero) {
  Rng rng(22);
  const std::size_t b = 3, s = 6, d = 8, heads = 4;
  Tensor q = RandomTensor(rng, {b, s, d}, 3.0);
  Tensor k = RandomTensor(rng, {b, s, d}, 3.0);
  const std::vector<std::uint8_t> mask = {1, 1, 1, 1, 1, 1, 1, 0, 1, 0, 0, 0,
                                          1, 1, 1, 1, 0, 0};
  Tensor w = AttentionWeights(q, k, mask, heads);
  ASSERT_EQ(w.shape(), (Shape{b, heads, s, s}));
  for (std::size_t n = 0; n < b; ++n) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < s; ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < s; ++j) {
          const double x = w[((n * heads + h) * s + i) * s + j];
          if (mask[n * s + j]) {
            sum += x;
          } else {
            EXPECT_LT(x, 1e-12);
          }
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
      }
    }
  }
}

TEST(AttentionTest, HeadsMustDivideWidth) {
  Tape tape;
  Tensor x = Tensor::Zeros({1, 2, 6});
  const std::vector<std::uint8_t> mask = {1, 1};
  EXPECT_THROW(Attention(tape, x, x, x, mask, 4), DimensionError);
}

TEST(DeterminismTest, RepeatedRunsAreBitIdentical) {
  auto run = [] {
    Rng rng(77);
    Tensor x = RandomTensor(rng, {2, 4, 8});
    Tensor w = RandomTensor(rng, {8, 8});
    x.set_requires_grad(true);
    w.set_requires_grad(true);
    const std::vector<std::uint8_t> mask = {1, 1, 1, 0, 1, 1, 1, 1};
    Tape tape;
    Tensor h = Gelu(tape, Linear(tape, x, w, Tensor()));
    Tensor a = Attention(tape, h, h, h, mask, 2);
    Tensor loss = Mean(tape, SoftmaxRows(tape, Mul(tape, a, a)));
    tape.Backward(loss);
    std::vector<double> out = Values(a);
    out.insert(out.end(), x.grad().begin(), x.grad().end());
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace tagger::ops
