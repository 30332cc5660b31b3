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

#include "triplet_tagger/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "triplet_tagger/errors.h"
#include "triplet_tagger/ops.h"
#include "triplet_tagger/random.h"

namespace tagger {
namespace {

void RequirePositive(const char* field, std::size_t value) {
  if (value < 1) {
    throw ContractError(std::string("encoder config: ") + field +
                        " must be >= 1");
  }
}

Tensor Uniform(Rng& rng, Shape shape, double bound) {
  std::vector<double> values(NumElements(shape));
  for (double& v : values) v = rng.Uniform(-bound, bound);
  return Tensor(std::move(shape), std::move(values), true);
}

}  // namespace

void EncoderConfig::Validate() const {
  RequirePositive("vocab_size", vocab_size);
  RequirePositive("max_len", max_len);
  RequirePositive("d_model", d_model);
  RequirePositive("n_heads", n_heads);
  RequirePositive("n_layers", n_layers);
  RequirePositive("d_ff", d_ff);
  RequirePositive("n_tags", n_tags);
  if (d_model % n_heads != 0) {
    throw ContractError("encoder config: n_heads (" + std::to_string(n_heads) +
                        ") must divide d_model (" + std::to_string(d_model) +
                        ")");
  }
}

std::vector<NamedTensor> Parameters::Named() const {
  std::vector<NamedTensor> named = {
      {"token_embedding", token_embedding},
      {"position_embedding", position_embedding},
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerParameters& p = layers[l];
    const std::string prefix = "layers." + std::to_string(l) + ".";
    for (const auto& [name, t] : std::initializer_list<std::pair<const char*, Tensor>>{
             {"attn_norm_gain", p.attn_norm_gain},
             {"attn_norm_bias", p.attn_norm_bias},
             {"query_w", p.query_w},
             {"query_b", p.query_b},
             {"key_w", p.key_w},
             {"key_b", p.key_b},
             {"value_w", p.value_w},
             {"value_b", p.value_b},
             {"output_w", p.output_w},
             {"output_b", p.output_b},
             {"ffn_norm_gain", p.ffn_norm_gain},
             {"ffn_norm_bias", p.ffn_norm_bias},
             {"ffn_in_w", p.ffn_in_w},
             {"ffn_in_b", p.ffn_in_b},
             {"ffn_out_w", p.ffn_out_w},
             {"ffn_out_b", p.ffn_out_b}}) {
      named.push_back({prefix + name, t});
    }
  }
  named.push_back({"final_norm_gain", final_norm_gain});
  named.push_back({"final_norm_bias", final_norm_bias});
  named.push_back({"tag_w", tag_w});
  named.push_back({"tag_b", tag_b});
  return named;
}

Parameters Parameters::Clone() const {
  Parameters copy;
  copy.config = config;
  copy.token_embedding = token_embedding.Clone();
  copy.position_embedding = position_embedding.Clone();
  for (const LayerParameters& p : layers) {
    copy.layers.push_back(LayerParameters{
        p.attn_norm_gain.Clone(), p.attn_norm_bias.Clone(), p.query_w.Clone(),
        p.query_b.Clone(), p.key_w.Clone(), p.key_b.Clone(), p.value_w.Clone(),
        p.value_b.Clone(), p.output_w.Clone(), p.output_b.Clone(),
        p.ffn_norm_gain.Clone(), p.ffn_norm_bias.Clone(), p.ffn_in_w.Clone(),
        p.ffn_in_b.Clone(), p.ffn_out_w.Clone(), p.ffn_out_b.Clone()});
  }
  copy.final_norm_gain = final_norm_gain.Clone();
  copy.final_norm_bias = final_norm_bias.Clone();
  copy.tag_w = tag_w.Clone();
  copy.tag_b = tag_b.Clone();
  return copy;
}

Parameters Parameters::FromTensors(const EncoderConfig& config,
                                   std::span<const Tensor> tensors) {
  Parameters p = InitParams(config, 0);
  const std::vector<NamedTensor> expected = p.Named();
  if (tensors.size() != expected.size()) {
    throw DimensionError("parameters: expected " + std::to_string(expected.size()) +
                         " tensors, got " + std::to_string(tensors.size()));
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].shape() != expected[i].tensor.shape()) {
      throw DimensionError("parameters: " + expected[i].name + " has shape " +
                           ShapeString(tensors[i].shape()) + ", expected " +
                           ShapeString(expected[i].tensor.shape()));
    }
  }
  std::size_t next = 0;
  auto take = [&](Tensor& slot) { slot = tensors[next++]; };
  take(p.token_embedding);
  take(p.position_embedding);
  for (LayerParameters& l : p.layers) {
    for (Tensor* slot : {&l.attn_norm_gain, &l.attn_norm_bias, &l.query_w,
                         &l.query_b, &l.key_w, &l.key_b, &l.value_w, &l.value_b,
                         &l.output_w, &l.output_b, &l.ffn_norm_gain,
                         &l.ffn_norm_bias, &l.ffn_in_w, &l.ffn_in_b,
                         &l.ffn_out_w, &l.ffn_out_b}) {
      take(*slot);
    }
  }
  take(p.final_norm_gain);
  take(p.final_norm_bias);
  take(p.tag_w);
  take(p.tag_b);
  return p;
}

void Parameters::ZeroGrad() {
  for (NamedTensor& n : Named()) n.tensor.ZeroGrad();
}

Parameters InitParams(const EncoderConfig& config, std::uint64_t seed) {
  config.Validate();
  Rng rng(seed);
  const std::size_t d = config.d_model;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  auto weight = [&](Shape shape) { return Uniform(rng, std::move(shape), bound); };
  auto zeros = [](std::size_t n) { return Tensor::Zeros({n}, true); };
  auto ones = [](std::size_t n) { return Tensor::Filled({n}, 1.0, true); };

  Parameters p;
  p.config = config;
  p.token_embedding = weight({config.vocab_size, d});
  p.position_embedding = weight({config.max_len, d});
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    LayerParameters layer;
    layer.attn_norm_gain = ones(d);
    layer.attn_norm_bias = zeros(d);
    layer.query_w = weight({d, d});
    layer.query_b = zeros(d);
    layer.key_w = weight({d, d});
    layer.key_b = zeros(d);
    layer.value_w = weight({d, d});
    layer.value_b = zeros(d);
    layer.output_w = weight({d, d});
    layer.output_b = zeros(d);
    layer.ffn_norm_gain = ones(d);
    layer.ffn_norm_bias = zeros(d);
    layer.ffn_in_w = weight({d, config.d_ff});
    layer.ffn_in_b = zeros(config.d_ff);
    layer.ffn_out_w = weight({config.d_ff, d});
    layer.ffn_out_b = zeros(d);
    p.layers.push_back(std::move(layer));
  }
  p.final_norm_gain = ones(d);
  p.final_norm_bias = zeros(d);
  p.tag_w = weight({d, config.n_tags});
  p.tag_b = zeros(config.n_tags);
  return p;
}

bool IdenticalParameters(const Parameters& a, const Parameters& b) {
  if (!(a.config == b.config)) return false;
  const std::vector<NamedTensor> na = a.Named(), nb = b.Named();
  if (na.size() != nb.size()) return false;
  for (std::size_t i = 0; i < na.size(); ++i) {
    if (na[i].tensor.shape() != nb[i].tensor.shape()) return false;
    if (!std::equal(na[i].tensor.values().begin(), na[i].tensor.values().end(),
                    nb[i].tensor.values().begin())) {
      return false;
    }
  }
  return true;
}

TokenBatch TokenBatch::FromSequences(
    std::span<const std::vector<int>> sequences) {
  TokenBatch batch;
  batch.batch = sequences.size();
  for (const std::vector<int>& s : sequences) {
    if (s.empty()) throw ContractError("token batch: empty sequence");
    batch.seq = std::max(batch.seq, s.size());
  }
  batch.ids.assign(batch.batch * batch.seq, 0);
  batch.mask.assign(batch.batch * batch.seq, 0);
  for (std::size_t r = 0; r < sequences.size(); ++r) {
    std::copy(sequences[r].begin(), sequences[r].end(),
              batch.ids.begin() + r * batch.seq);
    std::fill_n(batch.mask.begin() + r * batch.seq, sequences[r].size(), 1);
  }
  return batch;
}

void TokenBatch::Validate(const EncoderConfig& config) const {
  if (batch == 0 || seq == 0) throw ContractError("token batch: empty");
  if (seq > config.max_len) {
    throw DimensionError("token batch: sequence length " + std::to_string(seq) +
                         " exceeds max_len " + std::to_string(config.max_len));
  }
  if (ids.size() != batch * seq || mask.size() != batch * seq) {
    throw ContractError("token batch: ids/mask size mismatch");
  }
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
      throw ContractError("token batch: id " + std::to_string(id) +
                          " outside vocabulary of " +
                          std::to_string(config.vocab_size));
    }
  }
  for (std::size_t r = 0; r < batch; ++r) {
    bool any = false;
    for (std::size_t t = 0; t < seq; ++t) {
      const std::uint8_t m = mask[r * seq + t];
      if (m > 1) throw ContractError("token batch: mask values must be 0/1");
      any = any || m == 1;
    }
    if (!any) {
      throw ContractError("token batch: row " + std::to_string(r) +
                          " has no real token");
    }
  }
}

Tensor Encode(Tape& tape, const Parameters& params, const TokenBatch& batch) {
  const EncoderConfig& config = params.config;
  batch.Validate(config);
  const Shape index_shape = {batch.batch, batch.seq};

  std::vector<int> positions(batch.batch * batch.seq);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    positions[i] = static_cast<int>(i % batch.seq);
  }
  Tensor h = ops::Add(
      tape, ops::EmbeddingGather(tape, params.token_embedding, batch.ids, index_shape),
      ops::EmbeddingGather(tape, params.position_embedding, positions, index_shape));

  for (const LayerParameters& layer : params.layers) {
    const Tensor a =
        ops::LayerNorm(tape, h, layer.attn_norm_gain, layer.attn_norm_bias);
    const Tensor q = ops::Linear(tape, a, layer.query_w, layer.query_b);
    const Tensor k = ops::Linear(tape, a, layer.key_w, layer.key_b);
    const Tensor v = ops::Linear(tape, a, layer.value_w, layer.value_b);
    const Tensor context = ops::Attention(tape, q, k, v, batch.mask, config.n_heads);
    h = ops::Add(tape, h, ops::Linear(tape, context, layer.output_w, layer.output_b));

    const Tensor f = ops::LayerNorm(tape, h, layer.ffn_norm_gain, layer.ffn_norm_bias);
    const Tensor inner = ops::Gelu(tape, ops::Linear(tape, f, layer.ffn_in_w, layer.ffn_in_b));
    h = ops::Add(tape, h, ops::Linear(tape, inner, layer.ffn_out_w, layer.ffn_out_b));
  }
  return ops::LayerNorm(tape, h, params.final_norm_gain, params.final_norm_bias);
}

Tensor PoolSentence(Tape& tape, const Tensor& encoded,
                    std::span<const std::uint8_t> mask) {
  return ops::MaskedMean(tape, encoded, mask);
}

Tensor TagLogits(Tape& tape, const Parameters& params, const Tensor& encoded) {
  return ops::Linear(tape, encoded, params.tag_w, params.tag_b);
}

std::vector<std::vector<int>> ArgmaxTags(const Tensor& logits,
                                         std::span<const std::uint8_t> mask) {
  if (logits.rank() != 3 || mask.size() != logits.dim(0) * logits.dim(1)) {
    throw DimensionError("argmax_tags: logits " + ShapeString(logits.shape()) +
                         " do not match mask of " + std::to_string(mask.size()));
  }
  const std::size_t b = logits.dim(0), s = logits.dim(1), k = logits.dim(2);
  std::vector<std::vector<int>> tags(b, std::vector<int>(s, kPadTagId));
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t t = 0; t < s; ++t) {
      if (!mask[r * s + t]) continue;
      const double* row = logits.values().data() + (r * s + t) * k;
      int best = kPadTagId + 1;
      for (std::size_t c = kPadTagId + 2; c < k; ++c) {
        if (row[c] > row[best]) best = static_cast<int>(c);
      }
      tags[r][t] = best;
    }
  }
  return tags;
}

std::vector<std::vector<int>> PredictTags(const Parameters& params,
                                          const TokenBatch& title_batch) {
  if (params.config.n_tags < 2) {
    throw ContractError("predict_tags: need at least one non-pad tag");
  }
  Tape tape = Tape::NoGrad();
  const Tensor encoded = Encode(tape, params, title_batch);
  return ArgmaxTags(TagLogits(tape, params, encoded), title_batch.mask);
}

}  // namespace tagger
