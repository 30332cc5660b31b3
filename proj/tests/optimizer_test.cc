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

#include "triplet_tagger/optimizer.h"

#include <cmath>
#include <limits>

#include "gtest/gtest.h"
#include "triplet_tagger/errors.h"

namespace tagger {
namespace {

EncoderConfig TinyConfig() {
  EncoderConfig c;
  c.vocab_size = 6;
  c.max_len = 4;
  c.d_model = 4;
  c.n_heads = 2;
  c.n_layers = 1;
  c.d_ff = 8;
  c.n_tags = 3;
  return c;
}

void FillGrads(Parameters& p, double value) {
  for (NamedTensor& n : p.Named()) {
    for (double& g : n.tensor.mutable_grad()) g = value;
  }
}

TEST(AdamTest, ZeroGradientLeavesParamsAndCountsStep) {
  Parameters p = InitParams(TinyConfig(), 1);
  const Parameters before = p.Clone();
  AdamState state = InitAdamState(p);
  p.ZeroGrad();
  OptimizerStep(p, state, AdamConfig());
  EXPECT_TRUE(IdenticalParameters(p, before));
  EXPECT_EQ(state.step, 1u);
}

TEST(AdamTest, FirstStepMovesByLearningRateAgainstGradientSign) {
  for (double g : {0.5, -3.0, 1e-2, 250.0}) {
    Parameters p = InitParams(TinyConfig(), 2);
    const Parameters before = p.Clone();
    AdamState state = InitAdamState(p);
    FillGrads(p, g);
    AdamConfig config;
    config.lr = 1e-3;
    OptimizerStep(p, state, config);
    const auto after = p.Named();
    const auto orig = before.Named();
    for (std::size_t i = 0; i < after.size(); ++i) {
      for (std::size_t j = 0; j < after[i].tensor.size(); ++j) {
        const double delta = after[i].tensor[j] - orig[i].tensor[j];
        EXPECT_LE(std::abs(delta + config.lr * (g > 0 ? 1.0 : -1.0)), config.lr * 1e-6)
            << "g=" << g << " " << after[i].name;
      }
    }
  }
}

TEST(AdamTest, MatchesClosedFormOverThreeSteps) {
  Parameters p = InitParams(TinyConfig(), 3);
  AdamState state = InitAdamState(p);
  AdamConfig c;
  c.lr = 0.01;
  const double x0 = p.tag_b[1];
  const double grads[3] = {0.4, -1.1, 0.25};
  double m = 0, v = 0, x = x0;
  for (int t = 1; t <= 3; ++t) {
    FillGrads(p, grads[t - 1]);
    OptimizerStep(p, state, c);
    m = c.beta1 * m + (1 - c.beta1) * grads[t - 1];
    v = c.beta2 * v + (1 - c.beta2) * grads[t - 1] * grads[t - 1];
    const double mh = m / (1 - std::pow(c.beta1, t));
    const double vh = v / (1 - std::pow(c.beta2, t));
    x -= c.lr * mh / (std::sqrt(vh) + c.eps);
    EXPECT_NEAR(p.tag_b[1], x, 1e-15);
  }
  EXPECT_EQ(state.step, 3u);
}

TEST(AdamTest, NonFiniteGradientAbortsWithoutChanges) {
  Parameters p = InitParams(TinyConfig(), 4);
  AdamState state = InitAdamState(p);
  FillGrads(p, 0.1);
  OptimizerStep(p, state, AdamConfig());
  const Parameters before = p.Clone();
  const AdamState state_before = state;
  FillGrads(p, 0.1);
  p.layers[0].ffn_out_w.mutable_grad()[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(OptimizerStep(p, state, AdamConfig()), NumericError);
  EXPECT_TRUE(IdenticalParameters(p, before));
  EXPECT_EQ(state, state_before);
}

TEST(AdamTest, Deterministic) {
  auto run = [] {
    Parameters p = InitParams(TinyConfig(), 5);
    AdamState state = InitAdamState(p);
    for (int i = 0; i < 10; ++i) {
      FillGrads(p, std::sin(i + 1.0));
      OptimizerStep(p, state, AdamConfig());
    }
    return p;
  };
  EXPECT_TRUE(IdenticalParameters(run(), run()));
}

}  // namespace
}  // namespace tagger
