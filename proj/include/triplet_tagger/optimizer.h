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

#ifndef TRIPLET_TAGGER_OPTIMIZER_H_
#define TRIPLET_TAGGER_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "triplet_tagger/model.h"

namespace tagger {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments are stored per tensor in Parameters::Named() order.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  bool operator==(const AdamState&) const = default;
};

AdamState InitAdamState(const Parameters& params);

// One bias-corrected Adam update from the gradients currently held by the
// parameter tensors. All gradients are checked first; a non-finite one
// throws NumericError and leaves params and state untouched.
void OptimizerStep(Parameters& params, AdamState& state,
                   const AdamConfig& config);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_OPTIMIZER_H_
