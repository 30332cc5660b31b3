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

#include "triplet_tagger/grad_check_suite.h"

#include <algorithm>

#include "triplet_tagger/model.h"
#include "triplet_tagger/objectives.h"
#include "triplet_tagger/ops.h"

namespace tagger {
namespace {

Tensor RandomTensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = rng.Uniform(lo, hi);
  return Tensor(std::move(shape), std::move(v));
}

// sum(y * R) for a fixed pseudo-random R, so every output component gets a
// distinct upstream gradient.
Tensor Project(Tape& tape, const Tensor& y, std::uint64_t salt) {
  Rng rng(salt);
  return ops::Sum(tape, ops::Mul(tape, y, RandomTensor(rng, y.shape())));
}

using Inputs = std::span<const Tensor>;

GradCheckCase Case(std::string name,
                   std::function<std::vector<Tensor>(Rng&)> make_inputs,
                   ScalarFunction f) {
  return GradCheckCase{std::move(name), std::move(make_inputs), std::move(f), 100};
}

std::function<std::vector<Tensor>(Rng&)> Shapes(std::vector<Shape> shapes) {
  return [shapes](Rng& rng) {
    std::vector<Tensor> inputs;
    for (const Shape& s : shapes) inputs.push_back(RandomTensor(rng, s));
    return inputs;
  };
}

const std::vector<std::uint8_t> kMask23 = {1, 1, 0, 1, 0, 0};
const std::vector<std::uint8_t> kAttentionMask = {1, 1, 0, 1, 1, 1};

// Tiny 2-layer, 16-dim encoder and one (title, description, negative) triple.
struct TinyModel {
  EncoderConfig config;
  TokenBatch title, positive, negative;
  std::vector<int> gold;
};

TinyModel MakeTinyModel() {
  TinyModel m;
  m.config.vocab_size = 12;
  m.config.max_len = 8;
  m.config.d_model = 16;
  m.config.n_heads = 2;
  m.config.n_layers = 2;
  m.config.d_ff = 32;
  m.config.n_tags = 8;
  const std::vector<std::vector<int>> title = {{2, 3, 4, 5}};
  const std::vector<std::vector<int>> positive = {{3, 4, 6, 7, 8}};
  const std::vector<std::vector<int>> negative = {{9, 10, 11}};
  m.title = TokenBatch::FromSequences(title);
  m.positive = TokenBatch::FromSequences(positive);
  m.negative = TokenBatch::FromSequences(negative);
  m.gold = {4, 2, 3, 6};  // B-BRAND B-ITEM I-ITEM B-ATTR
  return m;
}

std::function<std::vector<Tensor>(Rng&)> TinyModelInputs(const TinyModel& m) {
  return [config = m.config](Rng& rng) {
    const Parameters p = InitParams(config, rng.NextU64());
    std::vector<Tensor> inputs;
    for (const NamedTensor& n : p.Named()) {
      Tensor t = n.tensor.Clone();
      // Move gains and biases off their 1/0 init so every path is exercised.
      for (double& v : t.mutable_values()) v += rng.Uniform(-0.2, 0.2);
      inputs.push_back(t);
    }
    return inputs;
  };
}

Tensor TinyTriplet(Tape& tape, const TinyModel& m, const Parameters& p,
                   const Tensor& encoded_title) {
  const Tensor t = PoolSentence(tape, encoded_title, m.title.mask);
  const Tensor pos = PoolSentence(tape, Encode(tape, p, m.positive), m.positive.mask);
  const Tensor neg = PoolSentence(tape, Encode(tape, p, m.negative), m.negative.mask);
  return TripletLoss(tape, t, pos, neg).loss;
}

}  // namespace

std::vector<GradCheckCase> StandardGradCheckCases(
    const GradCheckSuiteOptions& options) {
  std::vector<GradCheckCase> cases;
  cases.push_back(Case("add", Shapes({{3, 4}, {3, 4}}), [](Tape& t, Inputs x) {
    return Project(t, ops::Add(t, x[0], x[1]), 1);
  }));
  cases.push_back(Case("sub", Shapes({{3, 4}, {3, 4}}), [](Tape& t, Inputs x) {
    return Project(t, ops::Sub(t, x[0], x[1]), 2);
  }));
  cases.push_back(Case("mul", Shapes({{3, 4}, {3, 4}}), [](Tape& t, Inputs x) {
    return Project(t, ops::Mul(t, x[0], x[1]), 3);
  }));
  cases.push_back(Case("scale", Shapes({{3, 4}}), [](Tape& t, Inputs x) {
    return Project(t, ops::Scale(t, x[0], -1.7), 4);
  }));
  cases.push_back(Case("matmul", Shapes({{3, 4}, {4, 2}}), [](Tape& t, Inputs x) {
    return Project(t, ops::MatMul(t, x[0], x[1]), 5);
  }));
  cases.push_back(Case("linear", Shapes({{2, 3, 4}, {4, 5}, {5}}), [](Tape& t, Inputs x) {
    return Project(t, ops::Linear(t, x[0], x[1], x[2]), 6);
  }));
  cases.push_back(Case(
      "gelu", [](Rng& rng) { return std::vector<Tensor>{RandomTensor(rng, {12}, -3, 3)}; },
      [](Tape& t, Inputs x) { return Project(t, ops::Gelu(t, x[0]), 7); }));
  cases.push_back(Case(
      "neg_log_sigmoid",
      [](Rng& rng) { return std::vector<Tensor>{RandomTensor(rng, {6}, -4, 4)}; },
      [](Tape& t, Inputs x) { return Project(t, ops::NegLogSigmoid(t, x[0]), 8); }));
  cases.push_back(Case(
      "softmax_rows",
      [](Rng& rng) { return std::vector<Tensor>{RandomTensor(rng, {3, 5}, -3, 3)}; },
      [](Tape& t, Inputs x) { return Project(t, ops::SoftmaxRows(t, x[0]), 9); }));
  cases.push_back(Case("layer_norm", Shapes({{3, 6}, {6}, {6}}), [](Tape& t, Inputs x) {
    return Project(t, ops::LayerNorm(t, x[0], x[1], x[2]), 10);
  }));
  cases.push_back(Case("embedding_gather", Shapes({{5, 3}}), [](Tape& t, Inputs x) {
    const std::vector<int> ids = {0, 2, 2, 4};
    return Project(t, ops::EmbeddingGather(t, x[0], ids, {2, 2}), 11);
  }));
  cases.push_back(Case("masked_mean", Shapes({{2, 3, 4}}), [](Tape& t, Inputs x) {
    return Project(t, ops::MaskedMean(t, x[0], kMask23), 12);
  }));
  cases.push_back(Case("dropout", Shapes({{4, 5}}), [](Tape& t, Inputs x) {
    Rng mask_rng(99);
    return Project(t, ops::Dropout(t, x[0], 0.3, &mask_rng), 13);
  }));
  cases.push_back(Case("sum", Shapes({{3, 4}}), [](Tape& t, Inputs x) {
    return ops::Sum(t, ops::Mul(t, x[0], x[0]));
  }));
  cases.push_back(Case("mean", Shapes({{3, 4}}), [](Tape& t, Inputs x) {
    return ops::Mean(t, ops::Mul(t, x[0], x[0]));
  }));
  cases.push_back(Case("reshape", Shapes({{3, 4}}), [](Tape& t, Inputs x) {
    return Project(t, ops::Reshape(t, x[0], {2, 6}), 14);
  }));
  cases.push_back(Case("attention", Shapes({{2, 3, 4}, {2, 3, 4}, {2, 3, 4}}),
                       [](Tape& t, Inputs x) {
                         return Project(t, ops::Attention(t, x[0], x[1], x[2],
                                                          kAttentionMask, 2),
                                        15);
                       }));
  cases.push_back(Case("cosine_similarity", Shapes({{1, 8}, {1, 8}}), [](Tape& t, Inputs x) {
    return ops::Sum(t, RowCosine(t, x[0], x[1]));
  }));
  cases.push_back(Case("row_cosine", Shapes({{3, 8}, {3, 8}}), [](Tape& t, Inputs x) {
    return Project(t, RowCosine(t, x[0], x[1]), 16);
  }));
  cases.push_back(Case("triplet_loss", Shapes({{2, 8}, {2, 8}, {2, 8}}), [](Tape& t, Inputs x) {
    return TripletLoss(t, x[0], x[1], x[2]).loss;
  }));
  cases.push_back(Case(
      "ner_loss",
      [](Rng& rng) { return std::vector<Tensor>{RandomTensor(rng, {2, 3, 5}, -2, 2)}; },
      [](Tape& t, Inputs x) {
        const std::vector<int> gold = {1, 4, 0, 2, 3, 0};
        return NerLoss(t, x[0], gold, kMask23);
      }));
  cases.push_back(Case("multitask_loss", Shapes({{1, 2, 5}, {1, 8}, {1, 8}, {1, 8}}),
                       [](Tape& t, Inputs x) {
                         const std::vector<int> gold = {1, 3};
                         const std::vector<std::uint8_t> mask = {1, 1};
                         const Tensor ner = NerLoss(t, x[0], gold, mask);
                         const Tensor trip = TripletLoss(t, x[1], x[2], x[3]).loss;
                         return MultitaskLoss(t, ner, trip, 0.7);
                       }));
  for (GradCheckCase& c : cases) c.points = options.points;

  const TinyModel tiny = MakeTinyModel();
  cases.push_back(GradCheckCase{
      "model_encode_pool_triplet", TinyModelInputs(tiny),
      [tiny](Tape& t, Inputs x) {
        const Parameters p = Parameters::FromTensors(tiny.config, x);
        return TinyTriplet(t, tiny, p, Encode(t, p, tiny.title));
      },
      1});
  cases.push_back(GradCheckCase{
      "model_encode_tag_ner", TinyModelInputs(tiny),
      [tiny](Tape& t, Inputs x) {
        const Parameters p = Parameters::FromTensors(tiny.config, x);
        const Tensor encoded = Encode(t, p, tiny.title);
        return NerLoss(t, TagLogits(t, p, encoded), tiny.gold, tiny.title.mask);
      },
      1});
  cases.push_back(GradCheckCase{
      "model_multitask_loss", TinyModelInputs(tiny),
      [tiny](Tape& t, Inputs x) {
        const Parameters p = Parameters::FromTensors(tiny.config, x);
        const Tensor encoded = Encode(t, p, tiny.title);
        const Tensor ner =
            NerLoss(t, TagLogits(t, p, encoded), tiny.gold, tiny.title.mask);
        return MultitaskLoss(t, ner, TinyTriplet(t, tiny, p, encoded), 1.0);
      },
      1});
  return cases;
}

GradCheckCase CorruptedGradCheckCase() {
  return Case("corrupted_square", Shapes({{4}}), [](Tape& t, Inputs x) {
    const Tensor& in = x[0];
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * in[i];
    Tensor y({in.size()}, std::move(out));
    if (t.ShouldRecord({&in})) {
      t.Record("corrupted_square", {in}, y, [in](std::span<const double> g) {
        std::vector<double> d(g.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * 3.0 * in[i];
        AccumulateGrad(in, d);
      });
    }
    return ops::Sum(t, y);
  });
}

std::vector<GradCheckResult> RunGradCheckSuite(
    const std::vector<GradCheckCase>& cases,
    const GradCheckSuiteOptions& options) {
  std::vector<GradCheckResult> results;
  Rng rng(options.seed);
  for (const GradCheckCase& c : cases) {
    GradCheckResult r;
    r.name = c.name;
    for (std::size_t point = 0; point < c.points; ++point) {
      const std::vector<Tensor> inputs = c.make_inputs(rng);
      r.max_rel_error = std::max(r.max_rel_error, GradCheck(c.f, inputs, options.h));
      ++r.points;
    }
    r.passed = r.max_rel_error <= options.tolerance;
    results.push_back(r);
  }
  return results;
}

}  // namespace tagger
