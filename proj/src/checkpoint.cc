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

#include "triplet_tagger/checkpoint.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "triplet_tagger/errors.h"

namespace tagger {
namespace {

constexpr std::array<char, 8> kMagic = {'T', 'T', 'A', 'G', 'C', 'K', 'P', 'T'};

void PutU64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

void PutU32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

std::uint64_t GetU64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw DataError("checkpoint: truncated file");
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

std::uint32_t GetU32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw DataError("checkpoint: truncated file");
  }
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

void PutDoubles(std::ostream& out, std::span<const double> values) {
  for (double v : values) PutU64(out, std::bit_cast<std::uint64_t>(v));
}

void GetDoubles(std::istream& in, std::span<double> values) {
  for (double& v : values) v = std::bit_cast<double>(GetU64(in));
}

std::string HashHex(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

nlohmann::json ConfigJson(const EncoderConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"max_len", c.max_len},
          {"d_model", c.d_model},       {"n_heads", c.n_heads},
          {"n_layers", c.n_layers},     {"d_ff", c.d_ff},
          {"n_tags", c.n_tags}};
}

}  // namespace

void RequireSameConfig(const EncoderConfig& stored,
                       const EncoderConfig& expected) {
  const std::array<std::tuple<const char*, std::size_t, std::size_t>, 7> fields = {{
      {"vocab_size", stored.vocab_size, expected.vocab_size},
      {"max_len", stored.max_len, expected.max_len},
      {"d_model", stored.d_model, expected.d_model},
      {"n_heads", stored.n_heads, expected.n_heads},
      {"n_layers", stored.n_layers, expected.n_layers},
      {"d_ff", stored.d_ff, expected.d_ff},
      {"n_tags", stored.n_tags, expected.n_tags},
  }};
  for (const auto& [name, have, want] : fields) {
    if (have != want) {
      throw DataError(std::string("checkpoint config mismatch: ") + name +
                      " is " + std::to_string(have) + ", expected " +
                      std::to_string(want));
    }
  }
}

void WriteCheckpoint(const Checkpoint& checkpoint, std::ostream& out) {
  const std::vector<NamedTensor> named = checkpoint.params.Named();
  nlohmann::json header;
  header["encoder"] = ConfigJson(checkpoint.params.config);
  header["vocab"] = checkpoint.vocab.tokens();
  header["vocab_hash"] = HashHex(checkpoint.vocab.Hash());
  header["entity_types"] = checkpoint.tags.entity_types();
  header["epochs_completed"] = checkpoint.epochs_completed;
  header["global_step"] = checkpoint.global_step;
  header["label"] = checkpoint.label;
  nlohmann::json tensors = nlohmann::json::array();
  for (const NamedTensor& n : named) {
    tensors.push_back({{"name", n.name}, {"shape", n.tensor.shape()}});
  }
  header["tensors"] = std::move(tensors);
  if (checkpoint.optimizer) {
    header["optimizer"] = {{"kind", "adam"}, {"step", checkpoint.optimizer->step}};
  } else {
    header["optimizer"] = nullptr;
  }
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  PutU32(out, kCheckpointVersion);
  PutU64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const NamedTensor& n : named) PutDoubles(out, n.tensor.values());
  if (checkpoint.optimizer) {
    const AdamState& s = *checkpoint.optimizer;
    if (s.first_moment.size() != named.size()) {
      throw ContractError("checkpoint: optimizer state does not match params");
    }
    for (const auto& m : s.first_moment) PutDoubles(out, m);
    for (const auto& v : s.second_moment) PutDoubles(out, v);
  }
}

Checkpoint ReadCheckpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw DataError("checkpoint: bad magic; not a checkpoint file");
  }
  const std::uint32_t version = GetU32(in);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint64_t header_len = GetU64(in);
  if (header_len > (1ULL << 32)) throw DataError("checkpoint: header too large");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
    throw DataError("checkpoint: truncated header");
  }

  Checkpoint checkpoint;
  std::vector<std::pair<std::string, Shape>> layout;
  std::optional<std::uint64_t> optimizer_step;
  std::string vocab_hash;
  try {
    const nlohmann::json header = nlohmann::json::parse(text);
    const nlohmann::json& e = header.at("encoder");
    EncoderConfig& c = checkpoint.params.config;
    c.vocab_size = e.at("vocab_size").get<std::size_t>();
    c.max_len = e.at("max_len").get<std::size_t>();
    c.d_model = e.at("d_model").get<std::size_t>();
    c.n_heads = e.at("n_heads").get<std::size_t>();
    c.n_layers = e.at("n_layers").get<std::size_t>();
    c.d_ff = e.at("d_ff").get<std::size_t>();
    c.n_tags = e.at("n_tags").get<std::size_t>();
    checkpoint.vocab =
        Vocabulary::FromTokens(header.at("vocab").get<std::vector<std::string>>());
    vocab_hash = header.at("vocab_hash").get<std::string>();
    checkpoint.tags =
        TagScheme(header.at("entity_types").get<std::vector<std::string>>());
    checkpoint.epochs_completed = header.at("epochs_completed").get<std::size_t>();
    checkpoint.global_step = header.at("global_step").get<std::uint64_t>();
    checkpoint.label = header.value("label", std::string());
    for (const nlohmann::json& t : header.at("tensors")) {
      layout.emplace_back(t.at("name").get<std::string>(),
                          t.at("shape").get<Shape>());
    }
    if (!header.at("optimizer").is_null()) {
      optimizer_step = header.at("optimizer").at("step").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("checkpoint: malformed header (") + ex.what() + ")");
  } catch (const ContractError& ex) {
    throw DataError(std::string("checkpoint: ") + ex.what());
  }

  if (vocab_hash != HashHex(checkpoint.vocab.Hash())) {
    throw DataError("checkpoint: vocabulary hash mismatch");
  }
  EncoderConfig& config = checkpoint.params.config;
  try {
    config.Validate();
  } catch (const ContractError& ex) {
    throw DataError(std::string("checkpoint: ") + ex.what());
  }
  if (config.vocab_size != checkpoint.vocab.size()) {
    throw DataError("checkpoint: vocab_size " + std::to_string(config.vocab_size) +
                    " but vocabulary holds " + std::to_string(checkpoint.vocab.size()));
  }
  if (config.n_tags != checkpoint.tags.size()) {
    throw DataError("checkpoint: n_tags " + std::to_string(config.n_tags) +
                    " but tag scheme has " + std::to_string(checkpoint.tags.size()));
  }

  // Shapes and names follow from the config alone; the header must agree.
  Parameters params = InitParams(config, 0);
  std::vector<NamedTensor> named = params.Named();
  if (named.size() != layout.size()) {
    throw DataError("checkpoint: expected " + std::to_string(named.size()) +
                    " tensors, header lists " + std::to_string(layout.size()));
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    if (named[i].name != layout[i].first || named[i].tensor.shape() != layout[i].second) {
      throw DataError("checkpoint: tensor " + std::to_string(i) + " is '" +
                      layout[i].first + "' " + ShapeString(layout[i].second) +
                      ", expected '" + named[i].name + "' " +
                      ShapeString(named[i].tensor.shape()));
    }
    GetDoubles(in, named[i].tensor.mutable_values());
  }
  checkpoint.params = std::move(params);

  if (optimizer_step) {
    AdamState state = InitAdamState(checkpoint.params);
    state.step = *optimizer_step;
    for (auto& m : state.first_moment) GetDoubles(in, m);
    for (auto& v : state.second_moment) GetDoubles(in, v);
    checkpoint.optimizer = std::move(state);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("checkpoint: trailing bytes after payload");
  }
  return checkpoint;
}

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  WriteCheckpoint(checkpoint, out);
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return ReadCheckpoint(in);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          const EncoderConfig& expected) {
  Checkpoint checkpoint = LoadCheckpoint(path);
  RequireSameConfig(checkpoint.params.config, expected);
  return checkpoint;
}

}  // namespace tagger
