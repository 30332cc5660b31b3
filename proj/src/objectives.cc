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

#include "triplet_tagger/objectives.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "triplet_tagger/errors.h"
#include "triplet_tagger/ops.h"

namespace tagger {
namespace {

double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine: dims " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
  }
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return dot / (std::sqrt(aa) * std::sqrt(bb) + kCosineEpsilon);
}

double SigmoidScore(double margin) {
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

std::pair<double, TripletScores> TripletLoss(std::span<const double> title,
                                             std::span<const double> positive,
                                             std::span<const double> negative) {
  for (std::span<const double> v : {title, positive, negative}) {
    CheckFinite("triplet_loss input", v);
  }
  TripletScores s;
  s.positive = CosineSimilarity(title, positive);
  s.negative = CosineSimilarity(title, negative);
  s.margin = s.positive - s.negative;
  return {Softplus(-s.margin), s};
}

double MultitaskLoss(double ner_loss, double triplet_loss, double lambda) {
  if (!std::isfinite(ner_loss) || !std::isfinite(triplet_loss) ||
      !std::isfinite(lambda)) {
    throw NumericError("multitask_loss: non-finite input");
  }
  if (lambda < 0.0) throw ContractError("multitask_loss: lambda must be >= 0");
  return ner_loss + lambda * triplet_loss;
}

Tensor RowCosine(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw DimensionError("row_cosine: shapes " + ShapeString(a.shape()) +
                         " and " + ShapeString(b.shape()));
  }
  const std::size_t rows = a.dim(0), d = a.dim(1);
  std::vector<double> out(rows), dots(rows), na(rows), nb(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::span<const double> ar = a.values().subspan(r * d, d);
    const std::span<const double> br = b.values().subspan(r * d, d);
    double dot = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dot += ar[i] * br[i];
      aa += ar[i] * ar[i];
      bb += br[i] * br[i];
    }
    dots[r] = dot;
    na[r] = std::sqrt(aa);
    nb[r] = std::sqrt(bb);
    out[r] = dot / (na[r] * nb[r] + kCosineEpsilon);
  }
  CheckFinite("row_cosine", out);
  Tensor y({rows}, std::move(out));
  if (tape.ShouldRecord({&a, &b})) {
    tape.Record(
        "row_cosine", {a, b}, y,
        [a, b, rows, d, dots = std::move(dots), na = std::move(na),
         nb = std::move(nb)](std::span<const double> g) {
          std::vector<double> da(a.size(), 0.0), db(b.size(), 0.0);
          for (std::size_t r = 0; r < rows; ++r) {
            const double denom = na[r] * nb[r] + kCosineEpsilon;
            const double inv = 1.0 / denom;
            // d(dot/denom) = (dx_dot * denom - dot * dx_denom) / denom^2
            const double coef_a = na[r] > 0.0 ? dots[r] * nb[r] / (na[r] * denom * denom) : 0.0;
            const double coef_b = nb[r] > 0.0 ? dots[r] * na[r] / (nb[r] * denom * denom) : 0.0;
            for (std::size_t i = 0; i < d; ++i) {
              const double ai = a[r * d + i], bi = b[r * d + i];
              da[r * d + i] = g[r] * (bi * inv - coef_a * ai);
              db[r * d + i] = g[r] * (ai * inv - coef_b * bi);
            }
          }
          AccumulateGrad(a, da);
          AccumulateGrad(b, db);
        });
  }
  return y;
}

BatchTriplet TripletLoss(Tape& tape, const Tensor& titles,
                         const Tensor& positives, const Tensor& negatives) {
  const Tensor pos = RowCosine(tape, titles, positives);
  const Tensor neg = RowCosine(tape, titles, negatives);
  const Tensor margin = ops::Sub(tape, pos, neg);
  BatchTriplet result;
  result.loss = ops::Mean(tape, ops::NegLogSigmoid(tape, margin));
  result.scores.reserve(margin.size());
  for (std::size_t r = 0; r < margin.size(); ++r) {
    result.scores.push_back(TripletScores{pos[r], neg[r], margin[r]});
  }
  return result;
}

Tensor NerLoss(Tape& tape, const Tensor& logits, std::span<const int> gold,
               std::span<const std::uint8_t> mask) {
  if (logits.rank() < 2) {
    throw DimensionError("ner_loss: logits need rank >= 2, got " +
                         ShapeString(logits.shape()));
  }
  const std::size_t k = logits.shape().back(), positions = logits.size() / k;
  if (gold.size() != positions || mask.size() != positions) {
    throw DimensionError("ner_loss: " + std::to_string(positions) +
                         " positions but " + std::to_string(gold.size()) +
                         " gold ids and " + std::to_string(mask.size()) +
                         " mask entries");
  }
  std::vector<double> probs(logits.size(), 0.0);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < positions; ++p) {
    if (!mask[p]) continue;
    if (gold[p] < 0 || static_cast<std::size_t>(gold[p]) >= k) {
      throw DataError("ner_loss: gold tag id " + std::to_string(gold[p]) +
                      " at position " + std::to_string(p) + " outside [0, " +
                      std::to_string(k) + ")");
    }
    const double* row = logits.values().data() + p * k;
    double* pr = probs.data() + p * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      pr[c] = std::exp(row[c] - mx);
      z += pr[c];
    }
    for (std::size_t c = 0; c < k; ++c) pr[c] /= z;
    total += -(row[gold[p]] - mx - std::log(z));
    ++count;
  }
  if (count == 0) throw ContractError("ner_loss: every position is masked");
  const double inv = 1.0 / static_cast<double>(count);
  Tensor y = Tensor::Scalar(total * inv);
  CheckFinite("ner_loss", y.values());
  if (tape.ShouldRecord({&logits})) {
    tape.Record("ner_loss", {logits}, y,
                [logits, k, positions, inv, probs = std::move(probs),
                 gold = std::vector<int>(gold.begin(), gold.end()),
                 mask = std::vector<std::uint8_t>(mask.begin(), mask.end())](
                    std::span<const double> g) {
                  std::vector<double> d(logits.size(), 0.0);
                  for (std::size_t p = 0; p < positions; ++p) {
                    if (!mask[p]) continue;
                    for (std::size_t c = 0; c < k; ++c) {
                      d[p * k + c] = g[0] * inv * probs[p * k + c];
                    }
                    d[p * k + gold[p]] -= g[0] * inv;
                  }
                  AccumulateGrad(logits, d);
                });
  }
  return y;
}

Tensor MultitaskLoss(Tape& tape, const Tensor& ner_loss,
                     const Tensor& triplet_loss, double lambda) {
  MultitaskLoss(ner_loss.item(), triplet_loss.item(), lambda);
  return ops::Add(tape, ner_loss, ops::Scale(tape, triplet_loss, lambda));
}

}  // namespace tagger
