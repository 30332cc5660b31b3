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
#include <array>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "triplet_tagger/errors.h"
#include "triplet_tagger/random.h"

namespace tagger {
namespace {

bool IsInside(std::string_view tag) {
  return tag.size() > 2 && tag.substr(0, 2) == "I-";
}
bool IsBegin(std::string_view tag) {
  return tag.size() > 2 && tag.substr(0, 2) == "B-";
}
std::string_view EntityOf(std::string_view tag) { return tag.substr(2); }

bool IsPunct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

// Decodes one UTF-8 code point at text[i]; advances i. Malformed bytes are
// returned as themselves.
char32_t NextCodePoint(std::string_view text, std::size_t& i) {
  const unsigned char c = static_cast<unsigned char>(text[i]);
  std::size_t len = 1;
  char32_t cp = c;
  if (c >= 0xF0 && c < 0xF8) {
    len = 4;
    cp = c & 0x07;
  } else if (c >= 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if (c >= 0xC0) {
    len = 2;
    cp = c & 0x1F;
  }
  if (len > 1 && i + len <= text.size()) {
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) {
        ++i;
        return c;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    i += len;
    return cp;
  }
  ++i;
  return c;
}

bool IsUnicodeSpace(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 ||
         cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

void EmitWord(std::string_view word, std::vector<std::string>& out) {
  std::size_t begin = 0, end = word.size();
  while (begin < end && IsPunct(static_cast<unsigned char>(word[begin]))) {
    out.emplace_back(1, word[begin]);
    ++begin;
  }
  std::vector<std::string> trailing;
  while (end > begin && IsPunct(static_cast<unsigned char>(word[end - 1]))) {
    trailing.emplace_back(1, word[end - 1]);
    --end;
  }
  if (end > begin) {
    std::string core(word.substr(begin, end - begin));
    for (char& ch : core) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    out.push_back(std::move(core));
  }
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

TagScheme::TagScheme() : TagScheme({"ITEM", "BRAND", "ATTR"}) {}

TagScheme::TagScheme(std::vector<std::string> entity_types)
    : types_(std::move(entity_types)) {
  if (types_.empty()) throw ContractError("tag scheme: no entity types");
  tags_ = {std::string(kPad), std::string(kOutside)};
  for (const std::string& t : types_) {
    if (t.empty() || std::any_of(t.begin(), t.end(), [](unsigned char c) {
          return std::isspace(c);
        })) {
      throw ContractError("tag scheme: bad entity type '" + t + "'");
    }
    tags_.push_back("B-" + t);
    tags_.push_back("I-" + t);
  }
  std::unordered_set<std::string> unique(tags_.begin(), tags_.end());
  if (unique.size() != tags_.size()) {
    throw ContractError("tag scheme: duplicate entity types");
  }
}

std::optional<int> TagScheme::Find(std::string_view tag) const {
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (tags_[i] == tag) return static_cast<int>(i);
  }
  return std::nullopt;
}

int TagScheme::Id(std::string_view tag) const {
  std::optional<int> id = Find(tag);
  if (!id) throw DataError("unknown tag '" + std::string(tag) + "'");
  return *id;
}

const std::string& TagScheme::Name(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tags_.size()) {
    throw DataError("tag id " + std::to_string(id) + " outside scheme");
  }
  return tags_[id];
}

bool TagScheme::IsValidBio(std::span<const std::string> tags) const {
  for (const std::string& t : tags) {
    std::optional<int> id = Find(t);
    if (!id || t == kPad) return false;
  }
  return IsValidBioSequence(tags);
}

bool IsValidBioSequence(std::span<const std::string> tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!IsInside(tags[i])) continue;
    if (i == 0) return false;
    const std::string& prev = tags[i - 1];
    if (!(IsBegin(prev) || IsInside(prev)) ||
        EntityOf(prev) != EntityOf(tags[i])) {
      return false;
    }
  }
  return true;
}

std::size_t RepairBio(std::vector<std::string>& tags) {
  std::size_t repairs = 0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!IsInside(tags[i])) continue;
    const bool continues =
        i > 0 && (IsBegin(tags[i - 1]) || IsInside(tags[i - 1])) &&
        EntityOf(tags[i - 1]) == EntityOf(tags[i]);
    if (!continues) {
      tags[i] = "B-" + std::string(EntityOf(tags[i]));
      ++repairs;
    }
  }
  return repairs;
}

void ValidateItem(const CatalogItem& item, const TagScheme& scheme) {
  const std::string who = "item '" + item.id + "': ";
  if (item.title_tokens.empty()) throw DataError(who + "empty title");
  if (item.title_tokens.size() != item.title_tags.size()) {
    throw DataError(who + std::to_string(item.title_tokens.size()) +
                    " tokens but " + std::to_string(item.title_tags.size()) +
                    " tags");
  }
  for (const std::string& token : item.title_tokens) {
    if (token.empty() ||
        std::any_of(token.begin(), token.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      throw DataError(who + "token '" + token + "' is empty or has whitespace");
    }
  }
  for (const std::string& tag : item.title_tags) {
    if (!scheme.Find(tag) || tag == TagScheme::kPad) {
      throw DataError(who + "unknown tag '" + tag + "'");
    }
  }
  if (!IsValidBioSequence(item.title_tags)) {
    throw DataError(who + "tags are not valid BIO");
  }
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0, word_start = 0;
  while (i < text.size()) {
    const std::size_t at = i;
    const char32_t cp = NextCodePoint(text, i);
    if (IsUnicodeSpace(cp)) {
      if (at > word_start) EmitWord(text.substr(word_start, at - word_start), tokens);
      word_start = i;
    }
  }
  if (text.size() > word_start) EmitWord(text.substr(word_start), tokens);
  return tokens;
}

Vocabulary::Vocabulary() {
  tokens_ = {std::string(kPadToken), std::string(kUnkToken)};
  index_ = {{tokens_[0], kPadId}, {tokens_[1], kUnkId}};
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw DataError("vocabulary must start with <pad>, <unk>");
  }
  Vocabulary vocab;
  vocab.tokens_ = std::move(tokens);
  vocab.index_.clear();
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    if (!vocab.index_.emplace(vocab.tokens_[i], static_cast<int>(i)).second) {
      throw DataError("vocabulary: duplicate token '" + vocab.tokens_[i] + "'");
    }
  }
  return vocab;
}

int Vocabulary::Id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::Token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[id];
}

bool Vocabulary::Contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::uint64_t Vocabulary::Hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const std::string& t : tokens_) {
    for (unsigned char c : t) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xFF;  // separator; 0xFF never occurs in UTF-8
    h *= 1099511628211ULL;
  }
  return h;
}

Vocabulary BuildVocab(std::span<const CatalogItem> items,
                      std::size_t min_freq) {
  if (min_freq < 1) throw ContractError("build_vocab: min_freq must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const CatalogItem& item : items) {
    for (const std::string& t : item.title_tokens) ++counts[t];
    for (const std::string& t : Tokenize(item.description)) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : counts) {
    if (count >= min_freq && token != Vocabulary::kPadToken &&
        token != Vocabulary::kUnkToken) {
      kept.emplace_back(token, count);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::vector<std::string> tokens = {std::string(Vocabulary::kPadToken),
                                     std::string(Vocabulary::kUnkToken)};
  for (auto& [token, count] : kept) tokens.push_back(std::move(token));
  return Vocabulary::FromTokens(std::move(tokens));
}

// Synthetic catalog ---------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 40> kBrands = {
    "acme",      "nordik",   "brightline", "oakridge",  "vanta",
    "lumos",     "kestrel",  "harbor",     "solace",    "tundra",
    "pinecrest", "zephyr",   "mosaic",     "ember",     "quill",
    "sable",     "aurora",   "cobalt",     "fable",     "granite",
    "helix",     "ironwood", "juniper",    "kinetic",   "lark",
    "meridian",  "nimbus",   "orchid",     "paragon",   "quartz",
    "blue ridge", "north star", "red oak", "silver fox", "golden gate",
    "summit",    "terra",    "willow",     "yarrow",    "zenith"};

constexpr std::array<std::string_view, 64> kNouns = {
    "mug",      "lamp",     "blender",  "toaster",    "backpack",  "kettle",
    "pillow",   "blanket",  "chair",    "desk",       "jacket",    "sneakers",
    "headphones", "speaker", "watch",   "wallet",     "umbrella",  "bottle",
    "skillet",  "candle",   "rug",      "towel",      "mirror",    "clock",
    "vase",     "planter",  "notebook", "pen",        "stapler",   "drill",
    "hammer",   "flashlight", "tent",   "cooler",     "thermos",   "scarf",
    "gloves",   "hat",      "sweater",  "hoodie",     "jeans",     "sandals",
    "boots",    "mattress", "shelf",    "bookcase",   "nightstand", "dresser",
    "stroller", "crib",     "puzzle",   "kite",       "skateboard", "helmet",
    "monitor",  "keyboard", "mouse",    "charger",    "router",    "camera",
    "tripod",   "grill",    "spatula",  "whisk"};

constexpr std::array<std::string_view, 12> kModifiers = {
    "travel", "mini",     "smart",   "outdoor", "kids",     "classic",
    "electric", "portable", "wireless", "ceramic", "deluxe", "compact"};

constexpr std::array<std::string_view, 28> kAttributes = {
    "red",   "blue",   "green",  "black",  "white",  "gray",   "navy",
    "pink",  "teal",   "beige",  "small",  "medium", "large",  "12oz",
    "16oz",  "2qt",    "10in",   "queen",  "king",   "cotton", "steel",
    "glass", "bamboo", "leather", "wool",  "ceramic", "oak",   "xl"};

struct ItemName {
  std::vector<std::string> tokens;
};

std::vector<ItemName> BuildItemNamePool() {
  std::vector<ItemName> pool;
  const std::size_t m = kModifiers.size();
  for (std::size_t i = 0; i < kNouns.size(); ++i) {
    const std::string noun(kNouns[i]);
    const std::size_t first = i % m;
    std::size_t second = (i * 5 + 3) % m;
    if (second == first) second = (second + 1) % m;
    std::size_t third = (i * 7 + 1) % m;
    if (third == first) third = (third + 2) % m;
    pool.push_back({{noun}});
    pool.push_back({{std::string(kModifiers[first]), noun}});
    pool.push_back({{std::string(kModifiers[second]), noun}});
    pool.push_back({{std::string(kModifiers[third]),
                     std::string(kModifiers[first]), noun}});
  }
  return pool;
}

const std::vector<ItemName>& ItemNamePool() {
  static const std::vector<ItemName> pool = BuildItemNamePool();
  return pool;
}

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string Capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

constexpr std::array<std::string_view, 4> kItemSentences = {
    "The {item} from {brand} is built to last.",
    "This {item} is designed for everyday use.",
    "Enjoy your new {item} at home or on the go.",
    "Every {item} by {brand} is carefully inspected."};

constexpr std::array<std::string_view, 8> kFillerSentences = {
    "It comes in {attr}.",
    "Perfect for home, office, or travel.",
    "{brand} designs products with care.",
    "Easy to clean and simple to store.",
    "Makes a great gift for friends and family.",
    "Backed by a one-year warranty.",
    "Customers love the quality and value.",
    "Order today and enjoy fast shipping."};

std::string Fill(std::string_view pattern, const std::string& item,
                 const std::string& brand, const std::string& attr) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern.substr(i, 6) == "{item}") {
      out += item;
      i += 6;
    } else if (pattern.substr(i, 7) == "{brand}") {
      out += brand;
      i += 7;
    } else if (pattern.substr(i, 6) == "{attr}") {
      out += attr;
      i += 6;
    } else {
      out += pattern[i++];
    }
  }
  return out;
}

CatalogItem GenerateItem(std::uint64_t seed, std::size_t index) {
  Rng rng(MixSeed(seed, index));
  const std::vector<ItemName>& pool = ItemNamePool();
  const std::string brand(kBrands[rng.UniformIndex(kBrands.size())]);
  const ItemName& name = pool[rng.UniformIndex(pool.size())];
  const std::size_t n_attrs = 1 + rng.UniformIndex(2);
  std::vector<std::string> attrs;
  while (attrs.size() < n_attrs) {
    std::string a(kAttributes[rng.UniformIndex(kAttributes.size())]);
    if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(a);
  }

  CatalogItem item;
  char id[32];
  std::snprintf(id, sizeof(id), "item-%06zu", index);
  item.id = id;
  auto push = [&](const std::string& token, const std::string& tag) {
    item.title_tokens.push_back(token);
    item.title_tags.push_back(tag);
  };
  auto push_span = [&](const std::vector<std::string>& tokens,
                       const std::string& type) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      push(tokens[i], (i == 0 ? "B-" : "I-") + type);
    }
  };

  if (rng.UniformDouble() < 0.15) push("new", "O");
  std::vector<std::string> brand_tokens;
  std::istringstream brand_words(brand);
  for (std::string w; brand_words >> w;) brand_tokens.push_back(w);
  push_span(brand_tokens, "BRAND");
  push_span(name.tokens, "ITEM");
  const double sep = rng.UniformDouble();
  if (sep < 0.25) {
    push(",", "O");
  } else if (sep < 0.45) {
    push("-", "O");
  }
  for (const std::string& a : attrs) push_span({a}, "ATTR");
  if (rng.UniformDouble() < 0.15) {
    push("pack", "O");
    push("of", "O");
    push(std::to_string(2 + rng.UniformIndex(5)), "O");
  }

  const std::string item_text = Join(name.tokens);
  const std::string brand_text = Capitalize(brand);
  const std::string attr_text = Join(attrs);
  std::vector<std::string> sentences;
  sentences.push_back(Fill(kItemSentences[rng.UniformIndex(kItemSentences.size())],
                           item_text, brand_text, attr_text));
  const std::size_t n_filler = 1 + rng.UniformIndex(3);
  std::vector<std::size_t> filler(kFillerSentences.size());
  for (std::size_t i = 0; i < filler.size(); ++i) filler[i] = i;
  rng.Shuffle(std::span<std::size_t>(filler));
  for (std::size_t i = 0; i < n_filler; ++i) {
    sentences.push_back(
        Fill(kFillerSentences[filler[i]], item_text, brand_text, attr_text));
  }
  item.description = Join(sentences);
  return item;
}

}  // namespace

std::size_t SyntheticItemNamePoolSize() { return ItemNamePool().size(); }

std::vector<CatalogItem> GenerateSynthetic(std::uint64_t seed, std::size_t n) {
  if (n < 1) throw ContractError("generate_synthetic: n must be >= 1");
  std::vector<CatalogItem> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) items.push_back(GenerateItem(seed, i));
  return items;
}

std::size_t HoldoutTestSize(std::size_t n, double fraction) {
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n) + 0.5));
}

HoldoutSplit SplitHoldout(std::span<const CatalogItem> items, double fraction,
                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ContractError("split_holdout: fraction must lie in (0, 1)");
  }
  const std::size_t n_test = HoldoutTestSize(items.size(), fraction);
  if (n_test == 0 || n_test >= items.size()) {
    throw DataError("split_holdout: " + std::to_string(items.size()) +
                    " items at fraction " + std::to_string(fraction) +
                    " leave an empty side");
  }
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(order));
  HoldoutSplit split;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_test ? split.test : split.train).push_back(items[order[i]]);
  }
  return split;
}

// Files ---------------------------------------------------------------------

std::vector<CatalogItem> ReadCatalog(std::istream& in, const TagScheme& scheme) {
  std::vector<CatalogItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "catalog line " + std::to_string(line_no) + ": ";
    CatalogItem item;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      item.id = j.at("id").get<std::string>();
      item.title_tokens = j.at("title_tokens").get<std::vector<std::string>>();
      item.title_tags = j.at("title_tags").get<std::vector<std::string>>();
      item.description = j.at("description").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + "malformed record (" + e.what() + ")");
    }
    try {
      ValidateItem(item, scheme);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    items.push_back(std::move(item));
  }
  return items;
}

void WriteCatalog(std::span<const CatalogItem> items, std::ostream& out) {
  for (const CatalogItem& item : items) {
    nlohmann::ordered_json j;
    j["id"] = item.id;
    j["title_tokens"] = item.title_tokens;
    j["title_tags"] = item.title_tags;
    j["description"] = item.description;
    try {
      out << j.dump() << '\n';
    } catch (const nlohmann::json::exception& e) {
      throw DataError("item '" + item.id + "': " + e.what());
    }
  }
}

std::vector<CatalogItem> LoadCatalog(const std::filesystem::path& path,
                                     const TagScheme& scheme) {
  std::ifstream in = OpenForRead(path);
  return ReadCatalog(in, scheme);
}

void SaveCatalog(std::span<const CatalogItem> items,
                 const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  WriteCatalog(items, out);
  if (!out) throw DataError("failed writing " + path.string());
}

void WriteConll(std::span<const CatalogItem> items, std::ostream& out) {
  for (const CatalogItem& item : items) {
    out << "# id: " << item.id << '\n';
    for (std::size_t i = 0; i < item.title_tokens.size(); ++i) {
      out << item.title_tokens[i] << '\t' << item.title_tags[i] << '\n';
    }
    out << '\n';
  }
}

void ExportConll(std::span<const CatalogItem> items,
                 const std::filesystem::path& path) {
  std::ofstream out = OpenForWrite(path);
  WriteConll(items, out);
  if (!out) throw DataError("failed writing " + path.string());
}

ConllImport ReadConll(std::istream& in, const TagScheme& scheme) {
  ConllImport result;
  CatalogItem current;
  bool open = false;
  std::size_t line_no = 0, anonymous = 0;

  auto close = [&]() {
    if (!open) return;
    if (current.title_tokens.empty()) {
      throw DataError("conll line " + std::to_string(line_no) + ": sentence '" +
                      current.id + "' has no tokens");
    }
    if (current.id.empty()) current.id = "sentence-" + std::to_string(++anonymous);
    const std::size_t fixed = RepairBio(current.title_tags);
    if (fixed > 0) {
      result.repaired_tags += fixed;
      result.warnings.push_back("sentence '" + current.id + "': repaired " +
                                std::to_string(fixed) + " stray I- tag(s)");
    }
    ValidateItem(current, scheme);
    result.items.push_back(std::move(current));
    current = CatalogItem();
    open = false;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      close();
      continue;
    }
    if (line.rfind("# id:", 0) == 0) {
      close();
      std::string id = line.substr(5);
      id.erase(0, id.find_first_not_of(' '));
      current.id = id;
      open = true;
      continue;
    }
    if (line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw DataError("conll line " + std::to_string(line_no) +
                      ": expected 'token<TAB>tag'");
    }
    std::string tag = line.substr(tab + 1);
    if (!scheme.Find(tag) || tag == TagScheme::kPad) {
      throw DataError("conll line " + std::to_string(line_no) +
                      ": unknown tag '" + tag + "'");
    }
    current.title_tokens.push_back(line.substr(0, tab));
    current.title_tags.push_back(std::move(tag));
    open = true;
  }
  close();
  return result;
}

ConllImport ImportConll(
    const std::filesystem::path& path,
    const std::optional<std::filesystem::path>& descriptions_path,
    const TagScheme& scheme) {
  std::ifstream in = OpenForRead(path);
  ConllImport result = ReadConll(in, scheme);
  if (!descriptions_path) return result;
  std::unordered_map<std::string, std::string> descriptions;
  for (CatalogItem& item : LoadCatalog(*descriptions_path, scheme)) {
    descriptions.emplace(item.id, std::move(item.description));
  }
  for (CatalogItem& item : result.items) {
    auto it = descriptions.find(item.id);
    if (it == descriptions.end()) {
      result.dangling_ids.push_back(item.id);
      result.warnings.push_back("sentence '" + item.id +
                                "': no description; using empty text");
    } else {
      item.description = it->second;
    }
  }
  return result;
}

std::vector<int> EncodeTokens(std::span<const std::string> tokens,
                              const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(vocab.Id(t));
  return ids;
}

std::vector<EncodedItem> EncodeCatalog(std::span<const CatalogItem> items,
                                       const Vocabulary& vocab,
                                       const TagScheme& scheme,
                                       std::size_t max_len) {
  std::vector<EncodedItem> encoded;
  encoded.reserve(items.size());
  for (const CatalogItem& item : items) {
    if (item.title_tokens.size() > max_len) {
      throw DimensionError("item '" + item.id + "': title has " +
                           std::to_string(item.title_tokens.size()) +
                           " tokens, max_len is " + std::to_string(max_len));
    }
    EncodedItem e;
    e.title_ids = EncodeTokens(item.title_tokens, vocab);
    for (const std::string& tag : item.title_tags) e.tag_ids.push_back(scheme.Id(tag));
    std::vector<std::string> desc = Tokenize(item.description);
    if (desc.size() > max_len) desc.resize(max_len);
    e.description_ids = EncodeTokens(desc, vocab);
    if (e.description_ids.empty()) e.description_ids.push_back(Vocabulary::kUnkId);
    encoded.push_back(std::move(e));
  }
  return encoded;
}

}  // namespace tagger
