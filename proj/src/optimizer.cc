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

#include "triplet_tagger/errors.h"

namespace tagger {

AdamState InitAdamState(const Parameters& params) {
  AdamState state;
  for (const NamedTensor& n : params.Named()) {
    state.first_moment.emplace_back(n.tensor.size(), 0.0);
    state.second_moment.emplace_back(n.tensor.size(), 0.0);
  }
  return state;
}

void OptimizerStep(Parameters& params, AdamState& state,
                   const AdamConfig& config) {
  std::vector<NamedTensor> named = params.Named();
  if (state.first_moment.size() != named.size() ||
      state.second_moment.size() != named.size()) {
    throw ContractError("optimizer state does not match the parameters");
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    if (state.first_moment[i].size() != named[i].tensor.size()) {
      throw ContractError("optimizer state size mismatch for " + named[i].name);
    }
    CheckFinite("gradient of " + named[i].name, named[i].tensor.grad());
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < named.size(); ++i) {
    std::span<double> values = named[i].tensor.mutable_values();
    std::span<const double> grad = named[i].tensor.grad();
    std::vector<double>& m = state.first_moment[i];
    std::vector<double>& v = state.second_moment[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = grad[j];
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g;
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      values[j] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace tagger
