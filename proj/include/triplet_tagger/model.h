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

#ifndef TRIPLET_TAGGER_MODEL_H_
#define TRIPLET_TAGGER_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "triplet_tagger/tensor.h"

namespace tagger {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t max_len = 64;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_layers = 2;
  std::size_t d_ff = 128;
  std::size_t n_tags = 0;

  // Throws ContractError naming the first offending field.
  void Validate() const;

  bool operator==(const EncoderConfig&) const = default;
};

struct LayerParameters {
  Tensor attn_norm_gain, attn_norm_bias;
  Tensor query_w, query_b, key_w, key_b, value_w, value_b;
  Tensor output_w, output_b;
  Tensor ffn_norm_gain, ffn_norm_bias;
  Tensor ffn_in_w, ffn_in_b, ffn_out_w, ffn_out_b;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Every trainable tensor of the encoder and tag head. All of them require
// gradients; nothing is frozen.
struct Parameters {
  EncoderConfig config;
  Tensor token_embedding;     // [vocab_size x d_model]
  Tensor position_embedding;  // [max_len x d_model]
  std::vector<LayerParameters> layers;
  Tensor final_norm_gain, final_norm_bias;
  Tensor tag_w;  // [d_model x n_tags]
  Tensor tag_b;  // [n_tags]

  // Fixed order used by the optimizer and the checkpoint format. The
  // returned handles share storage with this object.
  std::vector<NamedTensor> Named() const;
  Parameters Clone() const;
  void ZeroGrad();

  // Inverse of Named(): adopts `tensors` (as handles) in Named() order.
  // DimensionError when a shape disagrees with `config`.
  static Parameters FromTensors(const EncoderConfig& config,
                                std::span<const Tensor> tensors);
};

// Deterministic in (config, seed). Weight matrices and embeddings are
// uniform in +-1/sqrt(d_model); biases are 0 and layer-norm gains 1.
Parameters InitParams(const EncoderConfig& config, std::uint64_t seed);

// True when both hold the same config and bit-identical values.
bool IdenticalParameters(const Parameters& a, const Parameters& b);

// Padded batch of token ids. Row r occupies ids[r*seq, (r+1)*seq); mask is 1
// on real tokens and 0 on padding.
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t seq = 0;
  std::vector<int> ids;
  std::vector<std::uint8_t> mask;

  // Pads each sequence with id 0 up to the longest one. Every sequence must
  // be nonempty.
  static TokenBatch FromSequences(std::span<const std::vector<int>> sequences);

  // DimensionError for seq > max_len, ContractError for ids outside the
  // vocabulary, bad mask values, or a row without real tokens.
  void Validate(const EncoderConfig& config) const;
};

// Pre-norm transformer stack. Returns [batch x seq x d_model].
Tensor Encode(Tape& tape, const Parameters& params, const TokenBatch& batch);

// Mean of the unmasked token vectors of each sentence: [batch x d_model].
Tensor PoolSentence(Tape& tape, const Tensor& encoded,
                    std::span<const std::uint8_t> mask);

// Affine tag head: [batch x seq x n_tags].
Tensor TagLogits(Tape& tape, const Parameters& params, const Tensor& encoded);

// Tag id emitted at masked positions, and never predicted for real tokens.
inline constexpr int kPadTagId = 0;

// Argmax tag per real token, lowest id on ties, kPadTagId at padding. Only
// title tokens go in; there is no parameter through which a description
// could reach the prediction.
std::vector<std::vector<int>> PredictTags(const Parameters& params,
                                          const TokenBatch& title_batch);

// Same argmax rule applied to precomputed logits [b x s x n_tags].
std::vector<std::vector<int>> ArgmaxTags(const Tensor& logits,
                                         std::span<const std::uint8_t> mask);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_MODEL_H_
