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

#ifndef TRIPLET_TAGGER_OBJECTIVES_H_
#define TRIPLET_TAGGER_OBJECTIVES_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "triplet_tagger/tensor.h"

namespace tagger {

// Added to the norm product in every cosine so a zero vector gives 0.
inline constexpr double kCosineEpsilon = 1e-8;

// Similarity of one (title, positive description, negative description)
// triple. margin is positive - negative, the quantity training pushes up.
struct TripletScores {
  double positive = 0.0;  // cosine(title, own description)
  double negative = 0.0;  // cosine(title, sampled other description)
  double margin = 0.0;
};

// dot(a, b) / (|a| |b| + 1e-8).
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// The logistic function of the margin. Reported alongside training, never
// minimized.
double SigmoidScore(double margin);

// -ln sigmoid(margin) for one triple, with its scores.
std::pair<double, TripletScores> TripletLoss(std::span<const double> title,
                                             std::span<const double> positive,
                                             std::span<const double> negative);

// l_ner + lambda * l_triplet. NumericError when an input is non-finite,
// ContractError for negative lambda.
double MultitaskLoss(double ner_loss, double triplet_loss, double lambda);

// Differentiable forms.

// Row-wise cosine of a[b x d] and b[b x d]: shape [b].
Tensor RowCosine(Tape& tape, const Tensor& a, const Tensor& b);

struct BatchTriplet {
  Tensor loss;  // scalar: mean over rows of -ln sigmoid(margin)
  std::vector<TripletScores> scores;
};

// Titles, positives and negatives are pooled embeddings [b x d].
BatchTriplet TripletLoss(Tape& tape, const Tensor& titles,
                         const Tensor& positives, const Tensor& negatives);

// Mean over unmasked tokens of -ln softmax(logits)[gold]. logits is
// [b x s x K] (or [n x K] with an n-entry mask); gold has one id per position
// and is ignored where the mask is 0. DataError for a gold id outside [0, K).
Tensor NerLoss(Tape& tape, const Tensor& logits, std::span<const int> gold,
               std::span<const std::uint8_t> mask);

Tensor MultitaskLoss(Tape& tape, const Tensor& ner_loss,
                     const Tensor& triplet_loss, double lambda);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_OBJECTIVES_H_
