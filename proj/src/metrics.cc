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

#include "triplet_tagger/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "triplet_tagger/corpus.h"
#include "triplet_tagger/errors.h"

namespace tagger {
namespace {

void RequireAligned(std::span<const TagSequence> gold,
                    std::span<const TagSequence> predicted) {
  if (gold.empty()) throw DataError("metrics: empty corpus");
  if (gold.size() != predicted.size()) {
    throw DataError("metrics: " + std::to_string(gold.size()) +
                    " gold sentences but " + std::to_string(predicted.size()) +
                    " predicted");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != predicted[i].size()) {
      throw DataError("metrics: sentence " + std::to_string(i) + " has " +
                      std::to_string(gold[i].size()) + " gold tags but " +
                      std::to_string(predicted[i].size()) + " predicted");
    }
  }
}

nlohmann::ordered_json ReportJson(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = r.algorithm;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["exact_match"] = r.exact_match;
  j["token_accuracy"] = r.token_accuracy;
  j["counts"] = {{"n_sentences", r.n_sentences},
                 {"n_tokens", r.n_tokens},
                 {"n_gold_spans", r.n_gold_spans},
                 {"n_pred_spans", r.n_pred_spans},
                 {"n_correct_spans", r.n_correct_spans}};
  j["zero_denominator"] = {{"precision", r.precision_undefined},
                           {"recall", r.recall_undefined}};
  return j;
}

}  // namespace

std::vector<EntitySpan> ExtractSpans(std::span<const std::string> tags) {
  if (!IsValidBioSequence(tags)) {
    throw ContractError("extract_spans: tags are not valid BIO");
  }
  for (const std::string& tag : tags) {
    const bool prefixed = (tag.rfind("B-", 0) == 0 || tag.rfind("I-", 0) == 0) && tag.size() > 2;
    if (tag != TagScheme::kOutside && !prefixed) {
      throw ContractError("extract_spans: malformed tag '" + tag + "'");
    }
  }
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    if (tag.rfind("B-", 0) == 0) {
      spans.push_back(EntitySpan{i, i + 1, tag.substr(2)});
    } else if (tag.rfind("I-", 0) == 0) {
      spans.back().end = i + 1;
    }
  }
  return spans;
}

TagSequence TagsFromSpans(std::span<const EntitySpan> spans, std::size_t length) {
  TagSequence tags(length, std::string(TagScheme::kOutside));
  for (const EntitySpan& s : spans) {
    if (s.start >= s.end || s.end > length) {
      throw ContractError("tags_from_spans: span out of range");
    }
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (tags[i] != TagScheme::kOutside) {
        throw ContractError("tags_from_spans: overlapping spans");
      }
      tags[i] = (i == s.start ? "B-" : "I-") + s.type;
    }
  }
  return tags;
}

SpanCounts SpanPrf(std::span<const std::vector<EntitySpan>> gold,
                   std::span<const std::vector<EntitySpan>> predicted) {
  if (gold.size() != predicted.size()) {
    throw DataError("span_prf: " + std::to_string(gold.size()) +
                    " gold sentences but " + std::to_string(predicted.size()) +
                    " predicted");
  }
  SpanCounts c;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    std::vector<EntitySpan> g = gold[s], p = predicted[s];
    std::sort(g.begin(), g.end());
    std::sort(p.begin(), p.end());
    c.gold += g.size();
    c.predicted += p.size();
    std::vector<EntitySpan> common;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(),
                          std::back_inserter(common));
    c.correct += common.size();
  }
  if (c.predicted > 0) {
    c.precision = static_cast<double>(c.correct) / static_cast<double>(c.predicted);
  }
  if (c.gold > 0) {
    c.recall = static_cast<double>(c.correct) / static_cast<double>(c.gold);
  }
  return c;
}

double ExactMatchRate(std::span<const TagSequence> gold,
                      std::span<const TagSequence> predicted) {
  RequireAligned(gold, predicted);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == predicted[i]) ++exact;
  }
  return static_cast<double>(exact) / static_cast<double>(gold.size());
}

double TokenAccuracy(std::span<const TagSequence> gold,
                     std::span<const TagSequence> predicted) {
  RequireAligned(gold, predicted);
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      correct += gold[i][t] == predicted[i][t];
    }
    total += gold[i].size();
  }
  if (total == 0) throw DataError("token_accuracy: corpus has no tokens");
  return static_cast<double>(correct) / static_cast<double>(total);
}

MetricsReport Evaluate(std::string algorithm, std::span<const TagSequence> gold,
                       std::span<const TagSequence> predicted) {
  RequireAligned(gold, predicted);
  std::vector<std::vector<EntitySpan>> gold_spans, pred_spans;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    gold_spans.push_back(ExtractSpans(gold[i]));
    pred_spans.push_back(ExtractSpans(predicted[i]));
    tokens += gold[i].size();
  }
  const SpanCounts counts = SpanPrf(gold_spans, pred_spans);
  MetricsReport r;
  r.algorithm = std::move(algorithm);
  r.precision = counts.precision;
  r.recall = counts.recall;
  r.exact_match = ExactMatchRate(gold, predicted);
  r.token_accuracy = TokenAccuracy(gold, predicted);
  r.n_sentences = gold.size();
  r.n_tokens = tokens;
  r.n_gold_spans = counts.gold;
  r.n_pred_spans = counts.predicted;
  r.n_correct_spans = counts.correct;
  r.precision_undefined = counts.predicted == 0;
  r.recall_undefined = counts.gold == 0;
  return r;
}

std::string MetricsReport::ToJson(int indent) const {
  return ReportJson(*this).dump(indent) + "\n";
}

MetricsReport MetricsReport::FromJson(std::string_view text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    MetricsReport r;
    r.algorithm = j.at("algorithm").get<std::string>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.exact_match = j.at("exact_match").get<double>();
    r.token_accuracy = j.at("token_accuracy").get<double>();
    if (j.contains("counts")) {
      const nlohmann::json& c = j.at("counts");
      r.n_sentences = c.value("n_sentences", std::size_t{0});
      r.n_tokens = c.value("n_tokens", std::size_t{0});
      r.n_gold_spans = c.value("n_gold_spans", std::size_t{0});
      r.n_pred_spans = c.value("n_pred_spans", std::size_t{0});
      r.n_correct_spans = c.value("n_correct_spans", std::size_t{0});
    }
    if (j.contains("zero_denominator")) {
      r.precision_undefined = j["zero_denominator"].value("precision", false);
      r.recall_undefined = j["zero_denominator"].value("recall", false);
    }
    for (double v : {r.precision, r.recall, r.exact_match, r.token_accuracy}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("metrics report: value " + std::to_string(v) +
                        " outside [0, 1]");
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics report: malformed JSON (") + e.what() + ")");
  }
}

std::string FormatPercent(double fraction) {
  const double tenths = std::round(fraction * 1000.0);
  char buf[32];
  if (std::fmod(tenths, 10.0) == 0.0) {
    std::snprintf(buf, sizeof(buf), "%.0f%%", tenths / 10.0);
  } else {
    std::snprintf(buf, sizeof(buf), "%.1f%%", tenths / 10.0);
  }
  return buf;
}

Comparison RenderComparison(std::span<const MetricsReport> rows) {
  if (rows.empty()) throw ContractError("render_comparison: no rows");
  const std::vector<std::string> header = {"Algorithm", "Precision", "Recall",
                                           "Exact Matches", "Accuracy"};
  std::vector<std::vector<std::string>> cells = {header};
  for (const MetricsReport& r : rows) {
    cells.push_back({r.algorithm, FormatPercent(r.precision),
                     FormatPercent(r.recall), FormatPercent(r.exact_match),
                     FormatPercent(r.token_accuracy)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream table;
  auto rule = [&]() {
    std::size_t total = 0;
    for (std::size_t w : width) total += w;
    table << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  };
  for (std::size_t r = 0; r < cells.size(); ++r) {
    if (r <= 1) rule();
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const std::string& s = cells[r][c];
      if (c == 0) {
        table << s << std::string(width[c] - s.size(), ' ');
      } else {
        table << "  " << std::string(width[c] - s.size(), ' ') << s;
      }
    }
    table << '\n';
  }
  rule();

  nlohmann::ordered_json json = nlohmann::ordered_json::array();
  for (const MetricsReport& r : rows) json.push_back(ReportJson(r));
  return Comparison{table.str(), json.dump(2) + "\n"};
}

}  // namespace tagger
