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

#include "run_config.h"

#include <fstream>
#include <map>
#include <set>

namespace tagger::cli {
namespace {

using Json = nlohmann::json;

const std::map<std::string, std::set<std::string>>& Schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"data", {"catalog", "holdout_fraction", "split_seed", "min_freq"}},
      {"encoder", {"max_len", "d_model", "n_heads", "n_layers", "d_ff"}},
      {"train",
       {"epochs", "batch_size", "lr", "lambda", "seed", "beta1", "beta2", "eps",
        "warm_start", "mode"}},
  };
  return schema;
}

std::uint64_t GetCount(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError(where + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

double GetNumber(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

std::string GetString(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

}  // namespace

void ApplyOverride(Json& doc, std::string_view key, std::string_view value) {
  if (key.empty()) throw ConfigError("empty override key");
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const Json::exception&) {
    parsed = std::string(value);
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part(key.substr(start, dot - start));
    if (part.empty()) throw ConfigError("bad override key '" + std::string(key) + "'");
    if (!node->is_object() && !node->is_null()) {
      throw ConfigError("override '" + std::string(key) + "' descends into a non-object");
    }
    if (dot == std::string_view::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

RunConfig ParseRunConfig(const Json& doc, std::optional<std::uint64_t> env_seed) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "output_dir") continue;
    auto section = Schema().find(key);
    if (section == Schema().end()) throw ConfigError("unknown config key '" + key + "'");
    if (!value.is_object()) throw ConfigError("config section '" + key + "' must be an object");
    for (const auto& [field, unused] : value.items()) {
      if (!section->second.count(field)) {
        throw ConfigError("unknown config key '" + key + "." + field + "'");
      }
    }
  }

  RunConfig rc;
  if (!doc.contains("output_dir")) throw ConfigError("config needs output_dir");
  rc.output_dir = GetString(doc["output_dir"], "output_dir");
  if (!doc.contains("data") || !doc["data"].contains("catalog")) {
    throw ConfigError("config needs data.catalog");
  }
  const Json& data = doc["data"];
  rc.catalog = GetString(data["catalog"], "data.catalog");
  if (data.contains("holdout_fraction")) {
    rc.holdout_fraction = GetNumber(data["holdout_fraction"], "data.holdout_fraction");
  }
  if (!(rc.holdout_fraction > 0.0 && rc.holdout_fraction < 1.0)) {
    throw ConfigError("data.holdout_fraction must lie in (0, 1)");
  }
  if (data.contains("split_seed")) rc.split_seed = GetCount(data["split_seed"], "data.split_seed");
  if (data.contains("min_freq")) rc.min_freq = GetCount(data["min_freq"], "data.min_freq");
  if (rc.min_freq < 1) throw ConfigError("data.min_freq must be >= 1");

  if (doc.contains("encoder")) {
    const Json& e = doc["encoder"];
    auto count = [&](const char* field, std::size_t& slot) {
      if (e.contains(field)) slot = GetCount(e[field], std::string("encoder.") + field);
    };
    count("max_len", rc.encoder.max_len);
    count("d_model", rc.encoder.d_model);
    count("n_heads", rc.encoder.n_heads);
    count("n_layers", rc.encoder.n_layers);
    count("d_ff", rc.encoder.d_ff);
  }
  // Placeholders so the structural checks run now; the real values come
  // from the data.
  EncoderConfig probe = rc.encoder;
  probe.vocab_size = 2;
  probe.n_tags = 2;
  try {
    probe.Validate();
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }

  TrainConfig& t = rc.train;
  bool have_seed = false;
  if (doc.contains("train")) {
    const Json& j = doc["train"];
    if (j.contains("epochs")) t.epochs = GetCount(j["epochs"], "train.epochs");
    if (j.contains("batch_size")) t.batch_size = GetCount(j["batch_size"], "train.batch_size");
    if (j.contains("lr")) t.lr = GetNumber(j["lr"], "train.lr");
    if (j.contains("lambda")) t.lambda = GetNumber(j["lambda"], "train.lambda");
    if (j.contains("beta1")) t.beta1 = GetNumber(j["beta1"], "train.beta1");
    if (j.contains("beta2")) t.beta2 = GetNumber(j["beta2"], "train.beta2");
    if (j.contains("eps")) t.adam_eps = GetNumber(j["eps"], "train.eps");
    if (j.contains("seed")) {
      t.seed = GetCount(j["seed"], "train.seed");
      have_seed = true;
    }
    if (j.contains("warm_start") && !j["warm_start"].is_null()) {
      t.warm_start = GetString(j["warm_start"], "train.warm_start");
    }
    if (j.contains("mode")) {
      const std::string mode = GetString(j["mode"], "train.mode");
      std::optional<TrainMode> parsed = ParseMode(mode);
      if (!parsed) throw ConfigError("train.mode must be 'baseline' or 'multitask'");
      t.mode = *parsed;
    }
  }
  if (!have_seed && env_seed) t.seed = *env_seed;
  try {
    t.Validate();
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }
  return rc;
}

RunConfig LoadRunConfig(const std::filesystem::path& path,
                        std::span<const std::string> overrides,
                        std::optional<std::uint64_t> env_seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    const std::string& arg = overrides[i];
    if (arg.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + arg + "'");
    const std::string body = arg.substr(2);
    const std::size_t eq = body.find('=');
    if (eq != std::string::npos) {
      ApplyOverride(doc, body.substr(0, eq), body.substr(eq + 1));
    } else if (i + 1 < overrides.size()) {
      ApplyOverride(doc, body, overrides[++i]);
    } else {
      throw ConfigError("override '" + arg + "' has no value");
    }
  }
  return ParseRunConfig(doc, env_seed);
}

nlohmann::ordered_json RunConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["data"] = {{"catalog", catalog.string()},
               {"holdout_fraction", holdout_fraction},
               {"split_seed", effective_split_seed()},
               {"min_freq", min_freq}};
  j["encoder"] = {{"max_len", encoder.max_len},
                  {"d_model", encoder.d_model},
                  {"n_heads", encoder.n_heads},
                  {"n_layers", encoder.n_layers},
                  {"d_ff", encoder.d_ff}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"lr", train.lr},
                {"lambda", train.lambda},
                {"seed", train.seed},
                {"beta1", train.beta1},
                {"beta2", train.beta2},
                {"eps", train.adam_eps},
                {"warm_start", train.warm_start ? nlohmann::ordered_json(train.warm_start->string())
                                                : nlohmann::ordered_json(nullptr)},
                {"mode", std::string(ModeName(train.mode))}};
  return j;
}

}  // namespace tagger::cli
