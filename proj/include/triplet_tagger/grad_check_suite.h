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

#ifndef TRIPLET_TAGGER_GRAD_CHECK_SUITE_H_
#define TRIPLET_TAGGER_GRAD_CHECK_SUITE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "triplet_tagger/grad_check.h"
#include "triplet_tagger/random.h"

namespace tagger {

inline constexpr double kGradCheckTolerance = 1e-4;

// A named scalar function plus a generator of random inputs for it.
struct GradCheckCase {
  std::string name;
  std::function<std::vector<Tensor>(Rng&)> make_inputs;
  ScalarFunction f;
  std::size_t points = 100;
};

struct GradCheckResult {
  std::string name;
  std::size_t points = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckSuiteOptions {
  std::uint64_t seed = 20240611;
  // Points per primitive op; the end-to-end model cases always use one.
  std::size_t points = 100;
  double h = 1e-5;
  double tolerance = kGradCheckTolerance;
};

// Every differentiable op, each loss, and the end-to-end multitask loss on a
// 2-layer, 16-dim encoder. Names are unique.
std::vector<GradCheckCase> StandardGradCheckCases(
    const GradCheckSuiteOptions& options = {});

// y = x^2 with a backward rule that returns 3x instead of 2x. Exists so the
// suite can be shown to catch a broken rule.
GradCheckCase CorruptedGradCheckCase();

std::vector<GradCheckResult> RunGradCheckSuite(
    const std::vector<GradCheckCase>& cases,
    const GradCheckSuiteOptions& options = {});

}  // namespace tagger

#endif  // TRIPLET_TAGGER_GRAD_CHECK_SUITE_H_
