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

#ifndef TRIPLET_TAGGER_CORPUS_H_
#define TRIPLET_TAGGER_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tagger {

// One retail item: a BIO-tagged title and an untagged description.
struct CatalogItem {
  std::string id;
  std::vector<std::string> title_tokens;
  std::vector<std::string> title_tags;
  std::string description;

  bool operator==(const CatalogItem&) const = default;
};

// Tag inventory: PAD (id 0), O (id 1), then B-X, I-X for each entity type in
// order.
class TagScheme {
 public:
  static constexpr std::string_view kPad = "PAD";
  static constexpr std::string_view kOutside = "O";

  // ITEM, BRAND, ATTR.
  TagScheme();
  explicit TagScheme(std::vector<std::string> entity_types);

  const std::vector<std::string>& entity_types() const { return types_; }
  const std::vector<std::string>& tags() const { return tags_; }
  std::size_t size() const { return tags_.size(); }

  std::optional<int> Find(std::string_view tag) const;
  // DataError naming the tag when it is not in the scheme.
  int Id(std::string_view tag) const;
  const std::string& Name(int id) const;

  // Every tag is a non-PAD member and each I-X follows B-X or I-X.
  bool IsValidBio(std::span<const std::string> tags) const;

  bool operator==(const TagScheme& other) const { return types_ == other.types_; }

 private:
  std::vector<std::string> types_;
  std::vector<std::string> tags_;
};

// I-X is allowed only after B-X or I-X of the same type.
bool IsValidBioSequence(std::span<const std::string> tags);

// Rewrites each stray I-X into B-X. Returns the number of rewrites.
std::size_t RepairBio(std::vector<std::string>& tags);

// Throws DataError unless the item has >= 1 token, equal token and tag
// counts, whitespace-free nonempty tokens, and valid BIO over `scheme`.
void ValidateItem(const CatalogItem& item, const TagScheme& scheme);

// Lowercases ASCII, splits on Unicode whitespace, and peels leading and
// trailing ASCII punctuation off each word into one-character tokens.
std::vector<std::string> Tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  // Only the reserved entries.
  Vocabulary();
  // `tokens` in id order; entries 0 and 1 must be the reserved tokens.
  static Vocabulary FromTokens(std::vector<std::string> tokens);

  int Id(std::string_view token) const;  // kUnkId when absent
  const std::string& Token(int id) const;
  bool Contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  // FNV-1a over the tokens in id order.
  std::uint64_t Hash() const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Tokens seen at least min_freq times across titles and tokenized
// descriptions, ordered by descending count then lexicographically.
Vocabulary BuildVocab(std::span<const CatalogItem> items, std::size_t min_freq);

// Number of distinct item names the generator draws from.
std::size_t SyntheticItemNamePoolSize();

// Synthetic catalog: titles follow
//   [new] <brand> <item name> [sep] <attributes> [pack of N]
// with gold BIO tags by construction, and each description opens with a
// sentence that contains the item name verbatim. Item i depends only on
// (seed, i).
std::vector<CatalogItem> GenerateSynthetic(std::uint64_t seed, std::size_t n);

// round-half-up(fraction * n).
std::size_t HoldoutTestSize(std::size_t n, double fraction);

struct HoldoutSplit {
  std::vector<CatalogItem> train;
  std::vector<CatalogItem> test;
};

// Seeded shuffle; the first HoldoutTestSize() items go to test. DataError if
// either side would be empty, ContractError unless 0 < fraction < 1.
HoldoutSplit SplitHoldout(std::span<const CatalogItem> items, double fraction,
                          std::uint64_t seed);

// JSON-lines catalog, one object per item:
//   {"id": str, "title_tokens": [str], "title_tags": [str], "description": str}
std::vector<CatalogItem> ReadCatalog(std::istream& in,
                                     const TagScheme& scheme = TagScheme());
void WriteCatalog(std::span<const CatalogItem> items, std::ostream& out);
std::vector<CatalogItem> LoadCatalog(const std::filesystem::path& path,
                                     const TagScheme& scheme = TagScheme());
void SaveCatalog(std::span<const CatalogItem> items,
                 const std::filesystem::path& path);

// CoNLL: "# id: <id>" header, one "token<TAB>tag" line per token, blank line
// after each sentence.
void WriteConll(std::span<const CatalogItem> items, std::ostream& out);
void ExportConll(std::span<const CatalogItem> items,
                 const std::filesystem::path& path);

struct ConllImport {
  std::vector<CatalogItem> items;
  std::size_t repaired_tags = 0;
  // Ids absent from the descriptions catalog; their description is empty.
  std::vector<std::string> dangling_ids;
  std::vector<std::string> warnings;
};

// Invalid BIO is repaired and counted. Descriptions, when a catalog is
// given, are joined by id.
ConllImport ReadConll(std::istream& in, const TagScheme& scheme = TagScheme());
ConllImport ImportConll(
    const std::filesystem::path& path,
    const std::optional<std::filesystem::path>& descriptions_path = std::nullopt,
    const TagScheme& scheme = TagScheme());

// Model-ready ids for one item.
struct EncodedItem {
  std::vector<int> title_ids;
  std::vector<int> tag_ids;
  std::vector<int> description_ids;
};

// Descriptions are truncated to max_len; an empty description becomes a
// single <unk>. A title longer than max_len is a DimensionError.
std::vector<EncodedItem> EncodeCatalog(std::span<const CatalogItem> items,
                                       const Vocabulary& vocab,
                                       const TagScheme& scheme,
                                       std::size_t max_len);

std::vector<int> EncodeTokens(std::span<const std::string> tokens,
                              const Vocabulary& vocab);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_CORPUS_H_
