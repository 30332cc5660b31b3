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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "triplet_tagger/errors.h"

namespace tagger::ops {
namespace {

void RequireSameShape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " +
                         ShapeString(a.shape()) + " and " +
                         ShapeString(b.shape()) + " differ");
  }
}

void RequireRank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got " +
                         ShapeString(t.shape()));
  }
}

Tensor Finish(const char* op, Shape shape, std::vector<double> values) {
  CheckFinite(op, values);
  return Tensor(std::move(shape), std::move(values));
}

// out[m x n] += a[m x k] * b[k x n], row-major, axpy order.
void GemmAccumulate(const double* a, const double* b, double* out,
                    std::size_t m, std::size_t k, std::size_t n) {
  // Four rows of b per pass; each output still sums over p in order.
  for (std::size_t i = 0; i < m; ++i) {
    double* out_row = out + i * n;
    const double* a_row = a + i * k;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
      const double s0 = a_row[p], s1 = a_row[p + 1], s2 = a_row[p + 2],
                   s3 = a_row[p + 3];
      const double* b0 = b + p * n;
      const double* b1 = b0 + n;
      const double* b2 = b1 + n;
      const double* b3 = b2 + n;
      for (std::size_t j = 0; j < n; ++j) {
        double acc = out_row[j];
        acc += s0 * b0[j];
        acc += s1 * b1[j];
        acc += s2 * b2[j];
        acc += s3 * b3[j];
        out_row[j] = acc;
      }
    }
    for (; p < k; ++p) {
      const double s = a_row[p];
      const double* b_row = b + p * n;
      for (std::size_t j = 0; j < n; ++j) out_row[j] += s * b_row[j];
    }
  }
}

std::vector<double> Transpose(std::span<const double> x, std::size_t rows,
                              std::size_t cols) {
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t[j * rows + i] = x[i * cols + j];
  }
  return t;
}

// Backward of out = x * w for x[m x k], w[k x n].
void GemmBackward(const Tensor& x, const Tensor& w, std::size_t m,
                  std::size_t k, std::size_t n, std::span<const double> g) {
  if (x.requires_grad()) {
    std::vector<double> wt = Transpose(w.values(), k, n);
    std::vector<double> dx(m * k, 0.0);
    GemmAccumulate(g.data(), wt.data(), dx.data(), m, n, k);
    AccumulateGrad(x, dx);
  }
  if (w.requires_grad()) {
    // dw = x^T g, accumulated over rows of x in order.
    std::vector<double> xt = Transpose(x.values(), m, k);
    std::vector<double> dw(k * n, 0.0);
    GemmAccumulate(xt.data(), g.data(), dw.data(), k, m, n);
    AccumulateGrad(w, dw);
  }
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

Tensor Add(Tape& tape, const Tensor& a, const Tensor& b) {
  RequireSameShape("add", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  Tensor y = Finish("add", a.shape(), std::move(out));
  if (tape.ShouldRecord({&a, &b})) {
    tape.Record("add", {a, b}, y, [a, b](std::span<const double> g) {
      AccumulateGrad(a, g);
      AccumulateGrad(b, g);
    });
  }
  return y;
}

Tensor Sub(Tape& tape, const Tensor& a, const Tensor& b) {
  RequireSameShape("sub", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  Tensor y = Finish("sub", a.shape(), std::move(out));
  if (tape.ShouldRecord({&a, &b})) {
    tape.Record("sub", {a, b}, y, [a, b](std::span<const double> g) {
      AccumulateGrad(a, g);
      if (b.requires_grad()) {
        std::vector<double> neg(g.begin(), g.end());
        for (double& v : neg) v = -v;
        AccumulateGrad(b, neg);
      }
    });
  }
  return y;
}

Tensor Mul(Tape& tape, const Tensor& a, const Tensor& b) {
  RequireSameShape("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  Tensor y = Finish("mul", a.shape(), std::move(out));
  if (tape.ShouldRecord({&a, &b})) {
    tape.Record("mul", {a, b}, y, [a, b](std::span<const double> g) {
      std::vector<double> d(g.size());
      if (a.requires_grad()) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * b[i];
        AccumulateGrad(a, d);
      }
      if (b.requires_grad()) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * a[i];
        AccumulateGrad(b, d);
      }
    });
  }
  return y;
}

Tensor Scale(Tape& tape, const Tensor& x, double factor) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor;
  Tensor y = Finish("scale", x.shape(), std::move(out));
  if (tape.ShouldRecord({&x})) {
    tape.Record("scale", {x}, y, [x, factor](std::span<const double> g) {
      std::vector<double> d(g.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * factor;
      AccumulateGrad(x, d);
    });
  }
  return y;
}

Tensor MatMul(Tape& tape, const Tensor& a, const Tensor& b) {
  RequireRank("matmul", a, 2);
  RequireRank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dims differ, " +
                         ShapeString(a.shape()) + " x " +
                         ShapeString(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  GemmAccumulate(a.values().data(), b.values().data(), out.data(), m, k, n);
  Tensor y = Finish("matmul", {m, n}, std::move(out));
  if (tape.ShouldRecord({&a, &b})) {
    tape.Record("matmul", {a, b}, y, [a, b, m, k, n](std::span<const double> g) {
      GemmBackward(a, b, m, k, n, g);
    });
  }
  return y;
}

Tensor Linear(Tape& tape, const Tensor& x, const Tensor& w,
              const Tensor& bias) {
  RequireRank("linear", w, 2);
  if (x.rank() < 1 || x.shape().back() != w.dim(0)) {
    throw DimensionError("linear: input " + ShapeString(x.shape()) +
                         " does not match weight " + ShapeString(w.shape()));
  }
  const std::size_t k = w.dim(0), n = w.dim(1), m = x.size() / k;
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != n)) {
    throw DimensionError("linear: bias " + ShapeString(bias.shape()) +
                         " does not match weight " + ShapeString(w.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  if (bias.defined()) {
    for (std::size_t i = 0; i < m; ++i) {
      std::copy(bias.values().begin(), bias.values().end(),
                out.begin() + i * n);
    }
  }
  GemmAccumulate(x.values().data(), w.values().data(), out.data(), m, k, n);
  Shape shape = x.shape();
  shape.back() = n;
  Tensor y = Finish("linear", std::move(shape), std::move(out));
  if (tape.ShouldRecord({&x, &w, &bias})) {
    std::vector<Tensor> inputs = {x, w};
    if (bias.defined()) inputs.push_back(bias);
    tape.Record("linear", std::move(inputs), y,
                [x, w, bias, m, k, n](std::span<const double> g) {
                  GemmBackward(x, w, m, k, n, g);
                  if (bias.defined() && bias.requires_grad()) {
                    std::vector<double> db(n, 0.0);
                    for (std::size_t i = 0; i < m; ++i) {
                      for (std::size_t j = 0; j < n; ++j) db[j] += g[i * n + j];
                    }
                    AccumulateGrad(bias, db);
                  }
                });
  }
  return y;
}

Tensor Gelu(Tape& tape, const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * kInvSqrt2));
  }
  Tensor y = Finish("gelu", x.shape(), std::move(out));
  if (tape.ShouldRecord({&x})) {
    tape.Record("gelu", {x}, y, [x](std::span<const double> g) {
      std::vector<double> d(g.size());
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double v = x[i];
        const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
        d[i] = g[i] * (cdf + v * pdf);
      }
      AccumulateGrad(x, d);
    });
  }
  return y;
}

Tensor NegLogSigmoid(Tape& tape, const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = x[i];
    out[i] = v >= 0.0 ? std::log1p(std::exp(-v)) : -v + std::log1p(std::exp(v));
  }
  Tensor y = Finish("neg_log_sigmoid", x.shape(), std::move(out));
  if (tape.ShouldRecord({&x})) {
    tape.Record("neg_log_sigmoid", {x}, y, [x](std::span<const double> g) {
      std::vector<double> d(g.size());
      for (std::size_t i = 0; i < d.size(); ++i) {
        // d/dx softplus(-x) = -sigmoid(-x)
        const double v = x[i];
        const double s = v >= 0.0 ? std::exp(-v) / (1.0 + std::exp(-v))
                                  : 1.0 / (1.0 + std::exp(v));
        d[i] = -g[i] * s;
      }
      AccumulateGrad(x, d);
    });
  }
  return y;
}

Tensor SoftmaxRows(Tape& tape, const Tensor& x) {
  if (x.rank() < 1) throw DimensionError("softmax_rows: needs rank >= 1");
  const std::size_t n = x.shape().back(), rows = x.size() / n;
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.values().data() + r * n;
    double* o = out.data() + r * n;
    const double mx = *std::max_element(in, in + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < n; ++j) o[j] /= total;
  }
  Tensor y = Finish("softmax_rows", x.shape(), std::move(out));
  if (tape.ShouldRecord({&x})) {
    tape.Record("softmax_rows", {x}, y,
                [x, y, rows, n](std::span<const double> g) {
                  std::vector<double> d(g.size());
                  for (std::size_t r = 0; r < rows; ++r) {
                    const double* p = y.values().data() + r * n;
                    const double* gr = g.data() + r * n;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < n; ++j) dot += gr[j] * p[j];
                    for (std::size_t j = 0; j < n; ++j) {
                      d[r * n + j] = p[j] * (gr[j] - dot);
                    }
                  }
                  AccumulateGrad(x, d);
                });
  }
  return y;
}

Tensor LayerNorm(Tape& tape, const Tensor& x, const Tensor& gamma,
                 const Tensor& beta, double eps) {
  if (!(eps > 0.0)) throw ContractError("layer_norm: eps must be positive");
  if (x.rank() < 1) throw DimensionError("layer_norm: needs rank >= 1");
  const std::size_t n = x.shape().back(), rows = x.size() / n;
  if (gamma.shape() != Shape{n} || beta.shape() != Shape{n}) {
    throw DimensionError("layer_norm: gamma/beta must be [" +
                         std::to_string(n) + "]");
  }
  std::vector<double> out(x.size());
  std::vector<double> normalized(x.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.values().data() + r * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += in[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      const double xhat = (in[j] - mean) * inv_std[r];
      normalized[r * n + j] = xhat;
      out[r * n + j] = xhat * gamma[j] + beta[j];
    }
  }
  Tensor y = Finish("layer_norm", x.shape(), std::move(out));
  if (tape.ShouldRecord({&x, &gamma, &beta})) {
    tape.Record(
        "layer_norm", {x, gamma, beta}, y,
        [x, gamma, beta, rows, n, normalized = std::move(normalized),
         inv_std = std::move(inv_std)](std::span<const double> g) {
          std::vector<double> dgamma(n, 0.0), dbeta(n, 0.0);
          std::vector<double> dx(x.requires_grad() ? x.size() : 0);
          std::vector<double> dxhat(n);
          for (std::size_t r = 0; r < rows; ++r) {
            const double* gr = g.data() + r * n;
            const double* xh = normalized.data() + r * n;
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              dgamma[j] += gr[j] * xh[j];
              dbeta[j] += gr[j];
              dxhat[j] = gr[j] * gamma[j];
              mean_d += dxhat[j];
              mean_dx += dxhat[j] * xh[j];
            }
            if (dx.empty()) continue;
            mean_d /= static_cast<double>(n);
            mean_dx /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
              dx[r * n + j] = inv_std[r] * (dxhat[j] - mean_d - xh[j] * mean_dx);
            }
          }
          if (!dx.empty()) AccumulateGrad(x, dx);
          AccumulateGrad(gamma, dgamma);
          AccumulateGrad(beta, dbeta);
        });
  }
  return y;
}

Tensor EmbeddingGather(Tape& tape, const Tensor& table,
                       std::span<const int> ids, const Shape& index_shape) {
  RequireRank("embedding_gather", table, 2);
  if (NumElements(index_shape) != ids.size()) {
    throw DimensionError("embedding_gather: index shape " +
                         ShapeString(index_shape) + " does not hold " +
                         std::to_string(ids.size()) + " ids");
  }
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw DimensionError("embedding_gather: id " + std::to_string(ids[i]) +
                           " outside table of " + std::to_string(vocab) +
                           " rows");
    }
    const double* row = table.values().data() + ids[i] * d;
    std::copy(row, row + d, out.begin() + i * d);
  }
  Shape shape = index_shape;
  shape.push_back(d);
  Tensor y = Finish("embedding_gather", std::move(shape), std::move(out));
  if (tape.ShouldRecord({&table})) {
    tape.Record("embedding_gather", {table}, y,
                [table, ids = std::vector<int>(ids.begin(), ids.end()),
                 d](std::span<const double> g) {
                  std::vector<double> dt(table.size(), 0.0);
                  for (std::size_t i = 0; i < ids.size(); ++i) {
                    double* row = dt.data() + ids[i] * d;
                    for (std::size_t c = 0; c < d; ++c) row[c] += g[i * d + c];
                  }
                  AccumulateGrad(table, dt);
                });
  }
  return y;
}

Tensor MaskedMean(Tape& tape, const Tensor& x,
                  std::span<const std::uint8_t> mask) {
  RequireRank("masked_mean", x, 3);
  const std::size_t b = x.dim(0), s = x.dim(1), d = x.dim(2);
  if (mask.size() != b * s) {
    throw DimensionError("masked_mean: mask has " +
                         std::to_string(mask.size()) + " entries, expected " +
                         std::to_string(b * s));
  }
  std::vector<double> out(b * d, 0.0);
  std::vector<double> inv_count(b);
  for (std::size_t r = 0; r < b; ++r) {
    std::size_t count = 0;
    for (std::size_t t = 0; t < s; ++t) {
      if (!mask[r * s + t]) continue;
      ++count;
      const double* row = x.values().data() + (r * s + t) * d;
      for (std::size_t c = 0; c < d; ++c) out[r * d + c] += row[c];
    }
    if (count == 0) {
      throw ContractError("masked_mean: row " + std::to_string(r) +
                          " has no unmasked position");
    }
    inv_count[r] = 1.0 / static_cast<double>(count);
    for (std::size_t c = 0; c < d; ++c) out[r * d + c] *= inv_count[r];
  }
  Tensor y = Finish("masked_mean", {b, d}, std::move(out));
  if (tape.ShouldRecord({&x})) {
    tape.Record("masked_mean", {x}, y,
                [x, mask = std::vector<std::uint8_t>(mask.begin(), mask.end()),
                 inv_count = std::move(inv_count), b, s,
                 d](std::span<const double> g) {
                  std::vector<double> dx(x.size(), 0.0);
                  for (std::size_t r = 0; r < b; ++r) {
                    for (std::size_t t = 0; t < s; ++t) {
                      if (!mask[r * s + t]) continue;
                      for (std::size_t c = 0; c < d; ++c) {
                        dx[(r * s + t) * d + c] = g[r * d + c] * inv_count[r];
                      }
                    }
                  }
                  AccumulateGrad(x, dx);
                });
  }
  return y;
}

Tensor Dropout(Tape& tape, const Tensor& x, double rate, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ContractError("dropout: rate must be in [0, 1)");
  }
  if (rate == 0.0 || rng == nullptr) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factor(x.size());
  for (double& f : factor) f = rng->UniformDouble() < rate ? 0.0 : keep_scale;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor[i];
  Tensor y = Finish("dropout", x.shape(), std::move(out));
  if (tape.ShouldRecord({&x})) {
    tape.Record("dropout", {x}, y,
                [x, factor = std::move(factor)](std::span<const double> g) {
                  std::vector<double> d(g.size());
                  for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * factor[i];
                  AccumulateGrad(x, d);
                });
  }
  return y;
}

Tensor Sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  Tensor y = Finish("sum", {}, {total});
  if (tape.ShouldRecord({&x})) {
    tape.Record("sum", {x}, y, [x](std::span<const double> g) {
      AccumulateGrad(x, std::vector<double>(x.size(), g[0]));
    });
  }
  return y;
}

Tensor Mean(Tape& tape, const Tensor& x) {
  const double inv = 1.0 / static_cast<double>(x.size());
  double total = 0.0;
  for (double v : x.values()) total += v;
  Tensor y = Finish("mean", {}, {total * inv});
  if (tape.ShouldRecord({&x})) {
    tape.Record("mean", {x}, y, [x, inv](std::span<const double> g) {
      AccumulateGrad(x, std::vector<double>(x.size(), g[0] * inv));
    });
  }
  return y;
}

Tensor Reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (NumElements(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + ShapeString(x.shape()) +
                         " as " + ShapeString(shape));
  }
  Tensor y(std::move(shape), std::vector<double>(x.values().begin(),
                                                 x.values().end()));
  if (tape.ShouldRecord({&x})) {
    tape.Record("reshape", {x}, y,
                [x](std::span<const double> g) { AccumulateGrad(x, g); });
  }
  return y;
}

namespace {

struct AttentionDims {
  std::size_t batch, seq, model, heads, head_dim;
};

AttentionDims CheckAttention(const Tensor& q, const Tensor& k, const Tensor& v,
                             std::span<const std::uint8_t> mask,
                             std::size_t n_heads) {
  RequireRank("attention", q, 3);
  RequireSameShape("attention", q, k);
  RequireSameShape("attention", q, v);
  AttentionDims dims{q.dim(0), q.dim(1), q.dim(2), n_heads, 0};
  if (n_heads == 0 || dims.model % n_heads != 0) {
    throw DimensionError("attention: " + std::to_string(n_heads) +
                         " heads do not divide d_model " +
                         std::to_string(dims.model));
  }
  if (mask.size() != dims.batch * dims.seq) {
    throw DimensionError("attention: mask size mismatch");
  }
  dims.head_dim = dims.model / n_heads;
  return dims;
}

// Weights laid out [b][h][i][j]. Masked keys get exactly zero.
std::vector<double> ComputeAttentionWeights(const Tensor& q, const Tensor& k,
                                            std::span<const std::uint8_t> mask,
                                            const AttentionDims& a) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(a.head_dim));
  std::vector<double> weights(a.batch * a.heads * a.seq * a.seq, 0.0);
  std::span<const double> qv = q.values(), kv = k.values();
  for (std::size_t b = 0; b < a.batch; ++b) {
    const std::uint8_t* m = mask.data() + b * a.seq;
    if (std::none_of(m, m + a.seq, [](std::uint8_t x) { return x != 0; })) {
      throw ContractError("attention: row " + std::to_string(b) +
                          " has no unmasked key");
    }
    for (std::size_t h = 0; h < a.heads; ++h) {
      for (std::size_t i = 0; i < a.seq; ++i) {
        double* w = weights.data() + ((b * a.heads + h) * a.seq + i) * a.seq;
        const double* qi = qv.data() + (b * a.seq + i) * a.model + h * a.head_dim;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < a.seq; ++j) {
          if (!m[j]) continue;
          const double* kj =
              kv.data() + (b * a.seq + j) * a.model + h * a.head_dim;
          double dot = 0.0;
          for (std::size_t c = 0; c < a.head_dim; ++c) dot += qi[c] * kj[c];
          w[j] = dot * scale;
          mx = std::max(mx, w[j]);
        }
        double total = 0.0;
        for (std::size_t j = 0; j < a.seq; ++j) {
          if (!m[j]) continue;
          w[j] = std::exp(w[j] - mx);
          total += w[j];
        }
        for (std::size_t j = 0; j < a.seq; ++j) {
          if (m[j]) w[j] /= total;
        }
      }
    }
  }
  return weights;
}

}  // namespace

Tensor AttentionWeights(const Tensor& q, const Tensor& k,
                        std::span<const std::uint8_t> mask,
                        std::size_t n_heads) {
  const AttentionDims a = CheckAttention(q, k, k, mask, n_heads);
  return Tensor({a.batch, a.heads, a.seq, a.seq},
                ComputeAttentionWeights(q, k, mask, a));
}

Tensor Attention(Tape& tape, const Tensor& q, const Tensor& k,
                 const Tensor& v, std::span<const std::uint8_t> mask,
                 std::size_t n_heads) {
  const AttentionDims a = CheckAttention(q, k, v, mask, n_heads);
  std::vector<double> weights = ComputeAttentionWeights(q, k, mask, a);
  std::vector<double> out(q.size(), 0.0);
  std::span<const double> vv = v.values();
  for (std::size_t b = 0; b < a.batch; ++b) {
    for (std::size_t h = 0; h < a.heads; ++h) {
      for (std::size_t i = 0; i < a.seq; ++i) {
        const double* w = weights.data() + ((b * a.heads + h) * a.seq + i) * a.seq;
        double* o = out.data() + (b * a.seq + i) * a.model + h * a.head_dim;
        for (std::size_t j = 0; j < a.seq; ++j) {
          if (w[j] == 0.0) continue;
          const double* vj = vv.data() + (b * a.seq + j) * a.model + h * a.head_dim;
          for (std::size_t c = 0; c < a.head_dim; ++c) o[c] += w[j] * vj[c];
        }
      }
    }
  }
  Tensor y = Finish("attention", q.shape(), std::move(out));
  if (tape.ShouldRecord({&q, &k, &v})) {
    tape.Record(
        "attention", {q, k, v}, y,
        [q, k, v, a, weights = std::move(weights)](std::span<const double> g) {
          const double scale = 1.0 / std::sqrt(static_cast<double>(a.head_dim));
          std::vector<double> dq(q.size(), 0.0), dk(k.size(), 0.0),
              dv(v.size(), 0.0);
          std::vector<double> dp(a.seq);
          std::span<const double> qv = q.values(), kv = k.values(),
                                  vv = v.values();
          for (std::size_t b = 0; b < a.batch; ++b) {
            for (std::size_t h = 0; h < a.heads; ++h) {
              const std::size_t off = h * a.head_dim;
              for (std::size_t i = 0; i < a.seq; ++i) {
                const double* w =
                    weights.data() + ((b * a.heads + h) * a.seq + i) * a.seq;
                const double* gi = g.data() + (b * a.seq + i) * a.model + off;
                double weighted = 0.0;
                for (std::size_t j = 0; j < a.seq; ++j) {
                  dp[j] = 0.0;
                  if (w[j] == 0.0) continue;
                  const double* vj = vv.data() + (b * a.seq + j) * a.model + off;
                  double* dvj = dv.data() + (b * a.seq + j) * a.model + off;
                  for (std::size_t c = 0; c < a.head_dim; ++c) {
                    dp[j] += gi[c] * vj[c];
                    dvj[c] += w[j] * gi[c];
                  }
                  weighted += w[j] * dp[j];
                }
                const double* qi = qv.data() + (b * a.seq + i) * a.model + off;
                double* dqi = dq.data() + (b * a.seq + i) * a.model + off;
                for (std::size_t j = 0; j < a.seq; ++j) {
                  if (w[j] == 0.0) continue;
                  const double ds = w[j] * (dp[j] - weighted) * scale;
                  const double* kj = kv.data() + (b * a.seq + j) * a.model + off;
                  double* dkj = dk.data() + (b * a.seq + j) * a.model + off;
                  for (std::size_t c = 0; c < a.head_dim; ++c) {
                    dqi[c] += ds * kj[c];
                    dkj[c] += ds * qi[c];
                  }
                }
              }
            }
          }
          AccumulateGrad(q, dq);
          AccumulateGrad(k, dk);
          AccumulateGrad(v, dv);
        });
  }
  return y;
}

}  // namespace tagger::ops
