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

#include "triplet_tagger/grad_check.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "triplet_tagger/errors.h"

namespace tagger {
namespace {

double Evaluate(const ScalarFunction& f, std::span<const Tensor> inputs) {
  Tape tape = Tape::NoGrad();
  const Tensor out = f(tape, inputs);
  const double value = out.item();
  if (!std::isfinite(value)) {
    throw NumericError("grad_check: function value is not finite");
  }
  return value;
}

}  // namespace

double GradCheck(const ScalarFunction& f, std::span<const Tensor> inputs,
                 double h) {
  if (!(h > 0.0 && h <= 1e-2)) {
    throw ContractError("grad_check: step must lie in (0, 1e-2], got " +
                        std::to_string(h));
  }
  std::vector<Tensor> handles(inputs.begin(), inputs.end());
  for (Tensor& t : handles) {
    t.set_requires_grad(true);
    t.ZeroGrad();
  }

  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    const Tensor loss = f(tape, handles);
    if (loss.size() != 1) {
      throw ContractError("grad_check: function must return a scalar");
    }
    CheckFinite("grad_check loss", loss.values());
    if (tape.size() > 0 && loss.requires_grad()) tape.Backward(loss);
    for (const Tensor& t : handles) {
      analytic.emplace_back(t.grad().begin(), t.grad().end());
    }
  }

  double worst = 0.0;
  for (std::size_t n = 0; n < handles.size(); ++n) {
    std::span<double> values = handles[n].mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = Evaluate(f, handles);
      values[i] = saved - h;
      const double down = Evaluate(f, handles);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err =
          std::abs(analytic[n][i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace tagger
