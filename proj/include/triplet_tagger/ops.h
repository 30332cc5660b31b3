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

#ifndef TRIPLET_TAGGER_OPS_H_
#define TRIPLET_TAGGER_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "triplet_tagger/random.h"
#include "triplet_tagger/tensor.h"

// Differentiable tensor ops. Every op checks its output for NaN/Inf and
// throws NumericError, reduces in a fixed left-to-right order, and records a
// backward rule on `tape` when an input requires a gradient.
namespace tagger::ops {

// Elementwise; shapes must match exactly.
Tensor Add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor Sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor Mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor Scale(Tape& tape, const Tensor& x, double factor);

// a[m x k] * b[k x n]. Both operands must be rank 2.
Tensor MatMul(Tape& tape, const Tensor& a, const Tensor& b);

// x[..., k] * w[k x n] + bias[n], applied to every leading index. `bias` may
// be a null Tensor.
Tensor Linear(Tape& tape, const Tensor& x, const Tensor& w,
              const Tensor& bias);

// Exact (erf-based) GELU.
Tensor Gelu(Tape& tape, const Tensor& x);

// -ln(sigmoid(x)) elementwise, i.e. softplus(-x), evaluated stably.
Tensor NegLogSigmoid(Tape& tape, const Tensor& x);

// Softmax over the last axis with max subtraction.
Tensor SoftmaxRows(Tape& tape, const Tensor& x);

// Normalizes each row over the last axis, then applies gamma/beta.
Tensor LayerNorm(Tape& tape, const Tensor& x, const Tensor& gamma,
                 const Tensor& beta, double eps = 1e-5);

// Rows of table[V x d] selected by `ids`; the result has shape
// index_shape + [d].
Tensor EmbeddingGather(Tape& tape, const Tensor& table,
                       std::span<const int> ids, const Shape& index_shape);

// Mean over the unmasked positions of x[b x s x d]; mask has b*s entries in
// {0, 1}. A row with no unmasked position is a ContractError.
Tensor MaskedMean(Tape& tape, const Tensor& x,
                  std::span<const std::uint8_t> mask);

// Inverted dropout. Identity (no record, same handle) when rate is 0 or no
// generator is supplied, which is how evaluation runs.
Tensor Dropout(Tape& tape, const Tensor& x, double rate, Rng* rng);

Tensor Sum(Tape& tape, const Tensor& x);
Tensor Mean(Tape& tape, const Tensor& x);

// Same values, new shape with the same element count.
Tensor Reshape(Tape& tape, const Tensor& x, Shape shape);

// Multi-head scaled dot-product self-attention over q, k, v of shape
// [b x s x d]. Keys whose mask entry is 0 get a logit of -inf, so they
// receive exactly zero weight. Returns the [b x s x d] context.
Tensor Attention(Tape& tape, const Tensor& q, const Tensor& k,
                 const Tensor& v, std::span<const std::uint8_t> mask,
                 std::size_t n_heads);

// The [b x heads x s x s] weights Attention() uses; not differentiable.
Tensor AttentionWeights(const Tensor& q, const Tensor& k,
                        std::span<const std::uint8_t> mask,
                        std::size_t n_heads);

}  // namespace tagger::ops

#endif  // TRIPLET_TAGGER_OPS_H_
