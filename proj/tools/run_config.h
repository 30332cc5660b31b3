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

#ifndef TRIPLET_TAGGER_TOOLS_RUN_CONFIG_H_
#define TRIPLET_TAGGER_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "triplet_tagger/model.h"
#include "triplet_tagger/trainer.h"

namespace tagger::cli {

// Bad config file content or override; reported as a usage error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything `train` needs. Parsed from a JSON document of the form
//
//   {
//     "data":    {"catalog": str, "holdout_fraction": 0.3,
//                 "split_seed": int, "min_freq": 1},
//     "encoder": {"max_len": 64, "d_model": 64, "n_heads": 4,
//                 "n_layers": 2, "d_ff": 128},
//     "train":   {"epochs": 10, "batch_size": 16, "lr": 0.001, "lambda": 1.0,
//                 "seed": int, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8,
//                 "warm_start": str|null, "mode": "multitask"|"baseline"},
//     "output_dir": str
//   }
//
// Only data.catalog and output_dir are required. Unknown keys are errors.
// vocab_size and n_tags are derived from the data, not configured.
struct RunConfig {
  std::filesystem::path catalog;
  double holdout_fraction = 0.3;
  std::optional<std::uint64_t> split_seed;
  std::size_t min_freq = 1;
  EncoderConfig encoder;
  TrainConfig train;
  std::filesystem::path output_dir;

  std::uint64_t effective_split_seed() const {
    return split_seed.value_or(train.seed);
  }

  // Fully resolved settings, without output_dir.
  nlohmann::ordered_json ToJson() const;
};

// Sets the dotted `key` (e.g. "train.lr") in `doc`. The value is read as
// JSON when it parses (numbers, true/false/null, quoted strings) and as a
// bare string otherwise.
void ApplyOverride(nlohmann::json& doc, std::string_view key,
                   std::string_view value);

// `env_seed` fills train.seed when the document leaves it unset.
RunConfig ParseRunConfig(const nlohmann::json& doc,
                         std::optional<std::uint64_t> env_seed);

// Reads `path`, applies the "--a.b=value" / "--a.b value" overrides, and
// parses. ConfigError for a missing file or bad content.
RunConfig LoadRunConfig(const std::filesystem::path& path,
                        std::span<const std::string> overrides,
                        std::optional<std::uint64_t> env_seed);

}  // namespace tagger::cli

#endif  // TRIPLET_TAGGER_TOOLS_RUN_CONFIG_H_
