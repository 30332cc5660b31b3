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

#ifndef TRIPLET_TAGGER_METRICS_H_
#define TRIPLET_TAGGER_METRICS_H_

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tagger {

using TagSequence = std::vector<std::string>;

// Half-open token range [start, end) carrying one entity type.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;

  auto operator<=>(const EntitySpan&) const = default;
};

// Maximal B-X (I-X)* runs. Invalid BIO is a ContractError: repair belongs at
// ingestion.
std::vector<EntitySpan> ExtractSpans(std::span<const std::string> tags);

// Inverse of ExtractSpans for non-overlapping spans over `length` tokens.
TagSequence TagsFromSpans(std::span<const EntitySpan> spans, std::size_t length);

struct SpanCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  double precision = 0.0;  // 0 when predicted == 0
  double recall = 0.0;     // 0 when gold == 0
};

// Micro-averaged exact-span matching: a predicted span is correct when a
// gold span of the same sentence has the same start, end and type.
SpanCounts SpanPrf(std::span<const std::vector<EntitySpan>> gold,
                   std::span<const std::vector<EntitySpan>> predicted);

// Fraction of sentences whose whole tag sequence matches. DataError on an
// empty corpus or a length mismatch.
double ExactMatchRate(std::span<const TagSequence> gold,
                      std::span<const TagSequence> predicted);

// Fraction of tokens whose tag matches, pooled over the corpus.
double TokenAccuracy(std::span<const TagSequence> gold,
                     std::span<const TagSequence> predicted);

// One row of the comparison table.
struct MetricsReport {
  std::string algorithm;
  double precision = 0.0;
  double recall = 0.0;
  double exact_match = 0.0;
  double token_accuracy = 0.0;
  std::size_t n_sentences = 0;
  std::size_t n_tokens = 0;
  std::size_t n_gold_spans = 0;
  std::size_t n_pred_spans = 0;
  std::size_t n_correct_spans = 0;
  // Set when the denominator was zero and the metric reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;

  // {"algorithm", "precision", "recall", "exact_match", "token_accuracy",
  //  "counts": {...}, "zero_denominator": {...}}
  std::string ToJson(int indent = 2) const;
  // DataError on malformed JSON or missing fields.
  static MetricsReport FromJson(std::string_view text);

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport Evaluate(std::string algorithm, std::span<const TagSequence> gold,
                       std::span<const TagSequence> predicted);

// "78%", "84.7%": a percentage with at most one decimal.
std::string FormatPercent(double fraction);

struct Comparison {
  std::string table;
  std::string json;
};

// Aligned Algorithm / Precision / Recall / Exact Matches / Accuracy table and
// a JSON array of the rows with raw values. ContractError for zero rows.
Comparison RenderComparison(std::span<const MetricsReport> rows);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_METRICS_H_
