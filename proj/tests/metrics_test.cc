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

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "gtest/gtest.h"
#include "triplet_tagger/errors.h"

namespace tagger {
namespace {

using Spans = std::vector<EntitySpan>;

TEST(ExtractSpansTest, Examples) {
  EXPECT_TRUE(ExtractSpans(TagSequence{"O", "O", "O"}).empty());
  EXPECT_EQ(ExtractSpans(TagSequence{"B-ITEM", "I-ITEM", "O", "B-BRAND"}),
            (Spans{{0, 2, "ITEM"}, {3, 4, "BRAND"}}));
  EXPECT_EQ(ExtractSpans(TagSequence{"B-ITEM", "B-ITEM"}),
            (Spans{{0, 1, "ITEM"}, {1, 2, "ITEM"}}));
  EXPECT_TRUE(ExtractSpans(TagSequence{}).empty());
}

TEST(ExtractSpansTest, InvalidBioIsContractError) {
  EXPECT_THROW(ExtractSpans(TagSequence{"I-ITEM"}), ContractError);
  EXPECT_THROW(ExtractSpans(TagSequence{"B-ITEM", "I-BRAND"}), ContractError);
  EXPECT_THROW(ExtractSpans(TagSequence{"O", "I-ITEM"}), ContractError);
  EXPECT_THROW(ExtractSpans(TagSequence{"X-ITEM"}), ContractError);
}

TEST(SpanPrfTest, Examples) {
  const std::vector<Spans> gold = {{{0, 2, "ITEM"}, {3, 4, "BRAND"}}};
  SpanCounts c = SpanPrf(gold, gold);
  EXPECT_EQ(c.precision, 1.0);
  EXPECT_EQ(c.recall, 1.0);

  const std::vector<Spans> half = {{{0, 2, "ITEM"}, {3, 4, "ATTR"}}};
  c = SpanPrf(gold, half);
  EXPECT_EQ(c.correct, 1u);
  EXPECT_EQ(c.precision, 0.5);
  EXPECT_EQ(c.recall, 0.5);

  const std::vector<Spans> none = {{}};
  c = SpanPrf(gold, none);
  EXPECT_EQ(c.predicted, 0u);
  EXPECT_EQ(c.precision, 0.0);
  EXPECT_EQ(c.recall, 0.0);

  const std::vector<Spans> two = {{}, {}};
  EXPECT_THROW(SpanPrf(gold, two), DataError);
}

TEST(SpanPrfTest, SpansInOtherSentencesDoNotCount) {
  const std::vector<Spans> gold = {{{0, 1, "ITEM"}}, {}};
  const std::vector<Spans> pred = {{}, {{0, 1, "ITEM"}}};
  EXPECT_EQ(SpanPrf(gold, pred).correct, 0u);
}

TagSequence RandomBio(std::mt19937_64& rng) {
  static const char* kTypes[] = {"ITEM", "BRAND", "ATTR"};
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 12)(rng);
  TagSequence tags;
  std::string open;
  for (std::size_t i = 0; i < n; ++i) {
    const int choice = std::uniform_int_distribution<int>(0, open.empty() ? 3 : 4)(rng);
    if (choice == 0) {
      tags.push_back("O");
      open.clear();
    } else if (choice <= 3) {
      open = kTypes[choice - 1];
      tags.push_back("B-" + open);
    } else {
      tags.push_back("I-" + open);
    }
  }
  return tags;
}

// A span (s, e, t) exists iff tags[s] opens t, every inner tag continues t
// and the token after e does not continue t.
std::set<std::tuple<std::size_t, std::size_t, std::string>> OracleSpans(
    const TagSequence& tags) {
  std::set<std::tuple<std::size_t, std::size_t, std::string>> out;
  for (const std::string type : {"ITEM", "BRAND", "ATTR"}) {
    for (std::size_t s = 0; s < tags.size(); ++s) {
      for (std::size_t e = s + 1; e <= tags.size(); ++e) {
        bool ok = tags[s] == "B-" + type;
        for (std::size_t k = s + 1; ok && k < e; ++k) ok = tags[k] == "I-" + type;
        if (ok && e < tags.size() && tags[e] == "I-" + type) ok = false;
        if (ok) out.emplace(s, e, type);
      }
    }
  }
  return out;
}

TEST(SpanPrfTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(17);
  std::vector<Spans> gold, pred;
  std::size_t n_gold = 0, n_pred = 0, n_correct = 0;
  for (int i = 0; i < 1000; ++i) {
    TagSequence g = RandomBio(rng);
    TagSequence p = RandomBio(rng);
    p.resize(g.size(), "O");
    if (!p.empty() && p.front().starts_with("I-")) p.front() = "O";
    const auto og = OracleSpans(g);
    const auto op = OracleSpans(p);
    n_gold += og.size();
    n_pred += op.size();
    for (const auto& s : op) n_correct += og.count(s);
    gold.push_back(ExtractSpans(g));
    pred.push_back(ExtractSpans(p));
    ASSERT_EQ(gold.back().size(), og.size());
    for (const EntitySpan& s : gold.back()) ASSERT_TRUE(og.count({s.start, s.end, s.type}));
    EXPECT_EQ(TagsFromSpans(gold.back(), g.size()), g);
  }
  const SpanCounts c = SpanPrf(gold, pred);
  EXPECT_EQ(c.gold, n_gold);
  EXPECT_EQ(c.predicted, n_pred);
  EXPECT_EQ(c.correct, n_correct);
  EXPECT_EQ(c.precision, static_cast<double>(n_correct) / n_pred);
  EXPECT_EQ(c.recall, static_cast<double>(n_correct) / n_gold);
  EXPECT_GT(n_correct, 0u);
}

TEST(TagsFromSpansTest, RoundTrip) {
  const Spans spans = {{1, 3, "BRAND"}, {3, 4, "BRAND"}, {5, 6, "ITEM"}};
  const TagSequence tags = TagsFromSpans(spans, 7);
  EXPECT_EQ(tags, (TagSequence{"O", "B-BRAND", "I-BRAND", "B-BRAND", "O", "B-ITEM", "O"}));
  EXPECT_EQ(ExtractSpans(tags), spans);
}

TEST(SequenceMetricsTest, Examples) {
  const std::vector<TagSequence> gold = {{"B-ITEM"}, {"O", "B-ITEM"}, {"O"}, {"B-BRAND", "O"}};
  std::vector<TagSequence> pred = gold;
  EXPECT_EQ(ExactMatchRate(gold, pred), 1.0);
  pred[1][0] = "B-ATTR";
  EXPECT_EQ(ExactMatchRate(gold, pred), 0.75);

  std::vector<TagSequence> ten = {TagSequence(10, "O")};
  std::vector<TagSequence> one_wrong = ten;
  EXPECT_EQ(TokenAccuracy(ten, one_wrong), 1.0);
  one_wrong[0][4] = "B-ITEM";
  EXPECT_EQ(TokenAccuracy(ten, one_wrong), 0.9);
  EXPECT_EQ(TokenAccuracy(ten, std::vector<TagSequence>{TagSequence(10, "B-ITEM")}), 0.0);
}

TEST(SequenceMetricsTest, Errors) {
  const std::vector<TagSequence> empty;
  EXPECT_THROW(ExactMatchRate(empty, empty), DataError);
  EXPECT_THROW(TokenAccuracy(empty, empty), DataError);
  const std::vector<TagSequence> a = {{"O", "O"}};
  const std::vector<TagSequence> b = {{"O"}};
  EXPECT_THROW(ExactMatchRate(a, b), DataError);
  EXPECT_THROW(TokenAccuracy(a, b), DataError);
  EXPECT_THROW(Evaluate("x", a, b), DataError);
}

TEST(EvaluateTest, GoldenFile) {
  std::ifstream in(std::string(TAGGER_TEST_DATA_DIR) + "/golden_eval.txt");
  ASSERT_TRUE(in);
  std::vector<TagSequence> gold(1), pred(1);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      gold.emplace_back();
      pred.emplace_back();
      continue;
    }
    std::istringstream fields(line);
    std::string token, g, p;
    fields >> token >> g >> p;
    gold.back().push_back(g);
    pred.back().push_back(p);
  }
  ASSERT_EQ(gold.size(), 10u);
  const MetricsReport r = Evaluate("golden", gold, pred);
  EXPECT_EQ(r.n_sentences, 10u);
  EXPECT_EQ(r.n_tokens, 30u);
  EXPECT_DOUBLE_EQ(r.exact_match, 6.0 / 10.0);
  EXPECT_DOUBLE_EQ(r.token_accuracy, 22.0 / 30.0);
  EXPECT_EQ(r.n_gold_spans, 21u);
  EXPECT_EQ(r.n_pred_spans, 21u);
  EXPECT_EQ(r.n_correct_spans, 16u);
  EXPECT_DOUBLE_EQ(r.precision, 16.0 / 21.0);
  EXPECT_DOUBLE_EQ(r.recall, 16.0 / 21.0);
}

TEST(EvaluateTest, ExactMatchImpliesFullTokenCredit) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TagSequence> gold, pred;
    for (int i = 0; i < 8; ++i) {
      TagSequence g = RandomBio(rng);
      if (g.empty()) g.push_back("O");
      gold.push_back(g);
      pred.push_back(i % 2 == 0 ? g : TagSequence(g.size(), "O"));
    }
    const MetricsReport r = Evaluate("p", gold, pred);
    for (double v : {r.precision, r.recall, r.exact_match, r.token_accuracy}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(r.exact_match, 0.5);
    EXPECT_GE(r.token_accuracy * r.n_tokens + 1e-9,
              static_cast<double>(gold[0].size() + gold[2].size() + gold[4].size() +
                                  gold[6].size()));
  }
}

TEST(EvaluateTest, ZeroDenominatorFlags) {
  const std::vector<TagSequence> gold = {{"B-ITEM", "O"}};
  const std::vector<TagSequence> pred = {{"O", "O"}};
  MetricsReport r = Evaluate("none", gold, pred);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_TRUE(r.precision_undefined);
  EXPECT_FALSE(r.recall_undefined);
  r = Evaluate("none", pred, pred);
  EXPECT_TRUE(r.precision_undefined);
  EXPECT_TRUE(r.recall_undefined);
  EXPECT_EQ(r.exact_match, 1.0);
}

TEST(FormatPercentTest, Examples) {
  EXPECT_EQ(FormatPercent(0.78), "78%");
  EXPECT_EQ(FormatPercent(0.847), "84.7%");
  EXPECT_EQ(FormatPercent(1.0), "100%");
  EXPECT_EQ(FormatPercent(0.0), "0%");
  EXPECT_EQ(FormatPercent(2.0 / 3.0), "66.7%");
  EXPECT_EQ(FormatPercent(0.43), "43%");
}

MetricsReport Row(std::string name, double p, double r, double em, double acc) {
  MetricsReport row;
  row.algorithm = std::move(name);
  row.precision = p;
  row.recall = r;
  row.exact_match = em;
  row.token_accuracy = acc;
  return row;
}

std::vector<MetricsReport> PublishedRows() {
  return {Row("BERT-Multitask-Triplet", 0.78, 0.63, 0.43, 0.85),
          Row("BERT-base", 0.77, 0.62, 0.41, 0.847)};
}

std::vector<std::vector<std::string>> Cells(const std::string& table) {
  std::vector<std::vector<std::string>> out;
  std::istringstream lines(table);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.starts_with("-")) continue;
    std::vector<std::string> row;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const std::size_t start = line.find_first_not_of(' ', pos);
      if (start == std::string::npos) break;
      std::size_t end = line.find("  ", start);
      if (end == std::string::npos) end = line.size();
      row.push_back(line.substr(start, end - start));
      pos = end;
    }
    out.push_back(row);
  }
  return out;
}

TEST(RenderComparisonTest, PublishedTable) {
  const Comparison c = RenderComparison(PublishedRows());
  const std::vector<std::vector<std::string>> expected = {
      {"Algorithm", "Precision", "Recall", "Exact Matches", "Accuracy"},
      {"BERT-Multitask-Triplet", "78%", "63%", "43%", "85%"},
      {"BERT-base", "77%", "62%", "41%", "84.7%"}};
  EXPECT_EQ(Cells(c.table), expected);
  std::istringstream lines(c.table);
  std::string line;
  std::size_t width = 0;
  while (std::getline(lines, line)) {
    if (width == 0) width = line.size();
    EXPECT_EQ(line.size(), width) << line;
  }
}

TEST(RenderComparisonTest, SingleRowAndErrors) {
  const std::vector<MetricsReport> one = {Row("solo", 1, 0.5, 0.25, 0.125)};
  const auto cells = Cells(RenderComparison(one).table);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[1], (std::vector<std::string>{"solo", "100%", "50%", "25%", "12.5%"}));
  EXPECT_THROW(RenderComparison(std::vector<MetricsReport>{}), ContractError);
}

TEST(RenderComparisonTest, JsonMirrorsRawValues) {
  const auto rows = PublishedRows();
  const Comparison c = RenderComparison(rows);
  const std::string json = c.json;
  EXPECT_NE(json.find("0.847"), std::string::npos);
  EXPECT_NE(json.find("\"BERT-base\""), std::string::npos);
}

TEST(MetricsReportTest, JsonRoundTrip) {
  const std::vector<TagSequence> gold = {{"B-ITEM", "I-ITEM", "O"}, {"B-BRAND"}};
  const std::vector<TagSequence> pred = {{"B-ITEM", "O", "O"}, {"B-BRAND"}};
  const MetricsReport r = Evaluate("model", gold, pred);
  const MetricsReport back = MetricsReport::FromJson(r.ToJson());
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.ToJson(), r.ToJson());
  for (const MetricsReport& row : PublishedRows()) {
    EXPECT_EQ(MetricsReport::FromJson(row.ToJson()), row);
  }
  EXPECT_THROW(MetricsReport::FromJson("{"), DataError);
  EXPECT_THROW(MetricsReport::FromJson("{\"algorithm\": \"x\"}"), DataError);
}

}  // namespace
}  // namespace tagger
