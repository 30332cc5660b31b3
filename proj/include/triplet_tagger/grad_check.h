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

#ifndef TRIPLET_TAGGER_GRAD_CHECK_H_
#define TRIPLET_TAGGER_GRAD_CHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "triplet_tagger/tensor.h"

namespace tagger {

// Builds a scalar from `inputs` using ops recorded on `tape`.
using ScalarFunction =
    std::function<Tensor(Tape& tape, std::span<const Tensor> inputs)>;

// Compares reverse-mode gradients of `f` against central differences with
// step `h` (0 < h <= 1e-2) and returns
//   max_i |analytic_i - numeric_i| / max(1, |numeric_i|)
// over every component of every input. Inputs are perturbed in place and
// restored; their gradient buffers are overwritten.
double GradCheck(const ScalarFunction& f, std::span<const Tensor> inputs,
                 double h = 1e-5);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_GRAD_CHECK_H_
