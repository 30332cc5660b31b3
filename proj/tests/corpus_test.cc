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

#include "triplet_tagger/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "gtest/gtest.h"
#include "triplet_tagger/errors.h"

namespace tagger {
namespace {

using Tokens = std::vector<std::string>;

std::filesystem::path TempPath(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("corpus_test_" + std::to_string(::getpid()) + "_" + name);
}

TEST(TokenizeTest, Examples) {
  EXPECT_EQ(Tokenize("Red Mug, 12oz"), (Tokens{"red", "mug", ",", "12oz"}));
  EXPECT_EQ(Tokenize(""), Tokens{});
  EXPECT_EQ(Tokenize("  a  b "), (Tokens{"a", "b"}));
}

TEST(TokenizeTest, PunctuationAndUnicodeWhitespace) {
  EXPECT_EQ(Tokenize("(Large)."), (Tokens{"(", "large", ")", "."}));
  EXPECT_EQ(Tokenize("don't stop-motion"), (Tokens{"don't", "stop-motion"}));
  // U+00A0 no-break space and U+3000 ideographic space separate tokens.
  EXPECT_EQ(Tokenize("a\xC2\xA0" "b\xE3\x80\x80" "c"), (Tokens{"a", "b", "c"}));
  EXPECT_EQ(Tokenize("\t\n"), Tokens{});
  EXPECT_EQ(Tokenize("..."), (Tokens{".", ".", "."}));
}

TEST(TagSchemeTest, DefaultTags) {
  const TagScheme s;
  EXPECT_EQ(s.tags(), (Tokens{"PAD", "O", "B-ITEM", "I-ITEM", "B-BRAND", "I-BRAND", "B-ATTR",
                              "I-ATTR"}));
  EXPECT_EQ(s.Id("PAD"), 0);
  EXPECT_EQ(s.Id("O"), 1);
  EXPECT_EQ(s.Name(4), "B-BRAND");
  try {
    s.Id("B-COLOR");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("B-COLOR"), std::string::npos);
  }
}

TEST(BioTest, Validity) {
  EXPECT_TRUE(IsValidBioSequence(Tokens{"B-ITEM", "I-ITEM", "O", "B-BRAND"}));
  EXPECT_TRUE(IsValidBioSequence(Tokens{"B-ITEM", "B-ITEM"}));
  EXPECT_FALSE(IsValidBioSequence(Tokens{"O", "I-ITEM"}));
  EXPECT_FALSE(IsValidBioSequence(Tokens{"I-ITEM"}));
  EXPECT_FALSE(IsValidBioSequence(Tokens{"B-BRAND", "I-ITEM"}));
}

TEST(BioTest, RepairTurnsStrayInsideIntoBegin) {
  Tokens tags = {"O", "I-ITEM", "I-ITEM", "B-BRAND", "I-ATTR"};
  EXPECT_EQ(RepairBio(tags), 2u);
  EXPECT_EQ(tags, (Tokens{"O", "B-ITEM", "I-ITEM", "B-BRAND", "B-ATTR"}));
  EXPECT_TRUE(IsValidBioSequence(tags));
  EXPECT_EQ(RepairBio(tags), 0u);
}

TEST(VocabularyTest, ThresholdAndReservedIds) {
  const std::vector<CatalogItem> items = {{"x", {"a", "a", "b"}, {"O", "O", "O"}, ""}};
  const Vocabulary v = BuildVocab(items, 2);
  EXPECT_TRUE(v.Contains("a"));
  EXPECT_FALSE(v.Contains("b"));
  EXPECT_EQ(v.Id("<pad>"), 0);
  EXPECT_EQ(v.Id("<unk>"), 1);
  EXPECT_EQ(v.Id("a"), 2);
  EXPECT_EQ(v.Id("never-seen"), Vocabulary::kUnkId);
}

TEST(VocabularyTest, OrderedByCountThenLexicographic) {
  const std::vector<CatalogItem> items = {
      {"x", {"b", "c", "a"}, {"O", "O", "O"}, "c zeta zeta"},
      {"y", {"a"}, {"O"}, "Zeta."}};
  const Vocabulary v = BuildVocab(items, 1);
  EXPECT_EQ(v.tokens(), (Tokens{"<pad>", "<unk>", "zeta", "a", "c", ".", "b"}));
  EXPECT_EQ(BuildVocab(items, 1).tokens(), v.tokens());
  EXPECT_EQ(BuildVocab(items, 1).Hash(), v.Hash());
  EXPECT_THROW(BuildVocab(items, 0), ContractError);
}

TEST(GenerateSyntheticTest, ItemsAreValid) {
  const TagScheme scheme;
  const std::vector<CatalogItem> items = GenerateSynthetic(17, 500);
  ASSERT_EQ(items.size(), 500u);
  std::set<std::string> ids;
  for (const CatalogItem& item : items) {
    EXPECT_NO_THROW(ValidateItem(item, scheme)) << item.id;
    EXPECT_TRUE(ids.insert(item.id).second);
  }
  EXPECT_THROW(GenerateSynthetic(1, 0), ContractError);
  EXPECT_GE(SyntheticItemNamePoolSize(), 200u);
}

TEST(GenerateSyntheticTest, DescriptionContainsItemSpan) {
  for (const CatalogItem& item : GenerateSynthetic(5, 1000)) {
    const Tokens desc = Tokenize(item.description);
    Tokens span;
    for (std::size_t i = 0; i < item.title_tags.size(); ++i) {
      if (item.title_tags[i].ends_with("ITEM")) span.push_back(item.title_tokens[i]);
    }
    ASSERT_FALSE(span.empty()) << item.id;
    ASSERT_LE(span.size(), 3u);
    EXPECT_NE(std::search(desc.begin(), desc.end(), span.begin(), span.end()), desc.end())
        << item.id;
    const auto sentences = std::count_if(item.description.begin(), item.description.end(),
                                         [](char c) { return c == '.' || c == '!'; });
    EXPECT_GE(sentences, 2) << item.description;
    EXPECT_LE(sentences, 4) << item.description;
  }
}

TEST(GenerateSyntheticTest, DeterministicAndPrefixStable) {
  const auto a = GenerateSynthetic(9, 50);
  EXPECT_EQ(a, GenerateSynthetic(9, 50));
  const auto longer = GenerateSynthetic(9, 80);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), longer.begin()));
  EXPECT_NE(a, GenerateSynthetic(10, 50));
}

TEST(HoldoutTest, SizesAndPartition) {
  EXPECT_EQ(HoldoutTestSize(10, 0.3), 3u);
  EXPECT_EQ(HoldoutTestSize(2000, 0.3), 600u);
  EXPECT_EQ(HoldoutTestSize(5, 0.3), 2u);  // 1.5 rounds up
  const auto items = GenerateSynthetic(1, 10);
  const HoldoutSplit s = SplitHoldout(items, 0.3, 4);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.test.size(), 3u);
  std::set<std::string> seen;
  for (const auto& side : {s.train, s.test}) {
    for (const CatalogItem& item : side) EXPECT_TRUE(seen.insert(item.id).second);
  }
  EXPECT_EQ(seen.size(), 10u);
  const HoldoutSplit again = SplitHoldout(items, 0.3, 4);
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.test, s.test);
}

TEST(HoldoutTest, RoundsHalfUpForManySizes) {
  for (std::size_t n = 2; n < 400; ++n) {
    const double exact = 0.3 * static_cast<double>(n);
    const std::size_t k = HoldoutTestSize(n, 0.3);
    EXPECT_LE(std::abs(static_cast<double>(k) - exact), 0.5 + 1e-9) << n;
  }
}

TEST(HoldoutTest, EmptySideIsDataError) {
  const auto items = GenerateSynthetic(1, 1);
  EXPECT_THROW(SplitHoldout(items, 0.3, 1), DataError);
  const auto two = GenerateSynthetic(1, 2);
  EXPECT_THROW(SplitHoldout(two, 1.0, 1), ContractError);
}

TEST(CatalogIoTest, RoundTrip) {
  const auto items = GenerateSynthetic(3, 40);
  const auto path = TempPath("roundtrip.jsonl");
  SaveCatalog(items, path);
  EXPECT_EQ(LoadCatalog(path), items);
  std::filesystem::remove(path);
}

TEST(CatalogIoTest, ErrorsNameTheLine) {
  const std::string good =
      R"({"id":"a","title_tokens":["red","mug"],"title_tags":["O","B-ITEM"],"description":"x"})";
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      ReadCatalog(in);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string mismatch = error_of(
      good + "\n" +
      R"({"id":"b","title_tokens":["red"],"title_tags":["O","B-ITEM"],"description":"x"})");
  EXPECT_NE(mismatch.find("line 2"), std::string::npos) << mismatch;
  const std::string unknown = error_of(
      R"({"id":"b","title_tokens":["red"],"title_tags":["B-COLOR"],"description":"x"})");
  EXPECT_NE(unknown.find("B-COLOR"), std::string::npos) << unknown;
  const std::string malformed = error_of(good + "\n\n{not json");
  EXPECT_NE(malformed.find("line 3"), std::string::npos) << malformed;
  const std::string missing = error_of(R"({"id":"b","title_tokens":["red"]})");
  EXPECT_NE(missing.find("line 1"), std::string::npos) << missing;
}

TEST(CatalogIoTest, MissingFileIsDataError) {
  EXPECT_THROW(LoadCatalog("/nonexistent/dir/catalog.jsonl"), DataError);
}

TEST(ConllTest, FormatOfOneSentence) {
  const std::vector<CatalogItem> items = {{"m1", {"red", "mug"}, {"O", "B-ITEM"}, "desc"}};
  std::ostringstream out;
  WriteConll(items, out);
  EXPECT_EQ(out.str(), "# id: m1\nred\tO\nmug\tB-ITEM\n\n");
}

TEST(ConllTest, RoundTripPreservesTokensAndTags) {
  const auto items = GenerateSynthetic(8, 30);
  std::stringstream buf;
  WriteConll(items, buf);
  const ConllImport back = ReadConll(buf);
  ASSERT_EQ(back.items.size(), items.size());
  EXPECT_EQ(back.repaired_tags, 0u);
  for (std::size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(back.items[i].id, items[i].id);
    EXPECT_EQ(back.items[i].title_tokens, items[i].title_tokens);
    EXPECT_EQ(back.items[i].title_tags, items[i].title_tags);
  }
}

TEST(ConllTest, RepairsStrayInsideWithWarning) {
  std::istringstream in("# id: s1\nred\tO\nmug\tI-ITEM\n\n");
  const ConllImport r = ReadConll(in);
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].title_tags, (Tokens{"O", "B-ITEM"}));
  EXPECT_EQ(r.repaired_tags, 1u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(ConllTest, JoinsDescriptionsAndReportsDangling) {
  const auto conll = TempPath("join.conll");
  const auto desc = TempPath("join.jsonl");
  {
    std::ofstream out(conll);
    out << "# id: a\nmug\tB-ITEM\n\n# id: b\ncup\tB-ITEM\n";
  }
  const std::vector<CatalogItem> catalog = {{"a", {"mug"}, {"B-ITEM"}, "A fine mug."}};
  SaveCatalog(catalog, desc);
  const ConllImport r = ImportConll(conll, desc);
  ASSERT_EQ(r.items.size(), 2u);
  EXPECT_EQ(r.items[0].description, "A fine mug.");
  EXPECT_EQ(r.items[1].description, "");
  EXPECT_EQ(r.dangling_ids, Tokens{"b"});
  EXPECT_EQ(r.warnings.size(), 1u);
  std::filesystem::remove(conll);
  std::filesystem::remove(desc);
}

TEST(ConllTest, MalformedLinesAreDataErrors) {
  std::istringstream no_tab("# id: a\nmug B-ITEM\n");
  EXPECT_THROW(ReadConll(no_tab), DataError);
  std::istringstream bad_tag("# id: a\nmug\tB-COLOR\n");
  EXPECT_THROW(ReadConll(bad_tag), DataError);
}

TEST(EncodeCatalogTest, IdsTagsAndDescriptions) {
  const std::vector<CatalogItem> items = {
      {"a", {"red", "mug"}, {"O", "B-ITEM"}, "A red mug, really red."},
      {"b", {"zzz"}, {"B-BRAND"}, ""}};
  const Vocabulary v = BuildVocab(std::span(items).first(1), 1);
  const TagScheme scheme;
  const auto enc = EncodeCatalog(items, v, scheme, 4);
  EXPECT_EQ(enc[0].title_ids, (std::vector<int>{v.Id("red"), v.Id("mug")}));
  EXPECT_EQ(enc[0].tag_ids, (std::vector<int>{1, 2}));
  EXPECT_EQ(enc[0].description_ids.size(), 4u);  // truncated to max_len
  EXPECT_EQ(enc[1].title_ids, (std::vector<int>{Vocabulary::kUnkId}));
  EXPECT_EQ(enc[1].description_ids, (std::vector<int>{Vocabulary::kUnkId}));
  EXPECT_THROW(EncodeCatalog(items, v, scheme, 1), DimensionError);
}

}  // namespace
}  // namespace tagger
