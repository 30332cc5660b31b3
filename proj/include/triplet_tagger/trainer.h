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

#ifndef TRIPLET_TAGGER_TRAINER_H_
#define TRIPLET_TAGGER_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triplet_tagger/corpus.h"
#include "triplet_tagger/model.h"
#include "triplet_tagger/objectives.h"
#include "triplet_tagger/optimizer.h"
#include "triplet_tagger/random.h"

namespace tagger {

// kBaseline never touches descriptions; kMultitask adds the triplet term.
enum class TrainMode { kBaseline, kMultitask };

std::string_view ModeName(TrainMode mode);
std::optional<TrainMode> ParseMode(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  double lambda = 1.0;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  // Parameters to start from instead of a fresh init.
  std::optional<std::filesystem::path> warm_start;
  TrainMode mode = TrainMode::kMultitask;

  void Validate() const;
  AdamConfig adam() const { return {lr, beta1, beta2, adam_eps}; }
};

// One row per optimizer step. Triplet columns are empty in baseline mode.
struct StepRecord {
  std::size_t epoch = 0;
  std::uint64_t step = 0;
  double loss_total = 0.0;
  double loss_ner = 0.0;
  std::optional<double> loss_triplet;
  std::optional<double> sigmoid_score;  // batch mean of sigmoid(margin)

  bool operator==(const StepRecord&) const = default;
};

struct History {
  std::vector<StepRecord> steps;

  // Header: epoch,step,loss_total,loss_ner,loss_triplet,sigmoid_score
  void WriteCsv(std::ostream& out) const;
  std::string ToCsv() const;
};

struct EpochSummary {
  std::size_t epoch = 0;
  double mean_total = 0.0;
  double mean_ner = 0.0;
  std::optional<double> mean_triplet;
  std::optional<double> dev_exact_match;
};

// Uniform over [0, catalog_size) minus `anchor`. DataError when
// catalog_size < 2.
std::size_t SampleNegative(Rng& rng, std::size_t anchor,
                           std::size_t catalog_size);

struct LossWeights {
  double ner = 1.0;
  double triplet = 1.0;
};

struct StepLosses {
  double total = 0.0;
  double ner = 0.0;
  std::optional<double> triplet;
  std::optional<double> sigmoid_score;
  std::vector<TripletScores> scores;
};

// Forward and backward for one batch of `corpus` rows; gradients accumulate
// into params. Titles produce the NER loss; in multitask mode the title,
// own-description and negative-description sentence embeddings (one shared
// encoder) produce the triplet loss. total = weights.ner * ner +
// weights.triplet * triplet, backpropagated once. `negatives` holds one
// corpus row per anchor and is ignored in baseline mode.
StepLosses ForwardBackward(const Parameters& params,
                           std::span<const EncodedItem> corpus,
                           std::span<const std::size_t> batch,
                           std::span<const std::size_t> negatives,
                           TrainMode mode, LossWeights weights);

// Zeroes gradients, samples one negative per anchor from `corpus` with
// `rng`, runs ForwardBackward with (1, lambda), and applies Adam.
StepLosses TrainStep(Parameters& params, AdamState& optimizer,
                     std::span<const EncodedItem> corpus,
                     std::span<const std::size_t> batch,
                     const TrainConfig& config, Rng& rng);

struct TrainState {
  Parameters params;
  AdamState optimizer;
  std::size_t epochs_completed = 0;
  std::uint64_t global_step = 0;
};

// Fresh parameters from the config seed, or the warm-start checkpoint's
// parameters (config must match) with a new optimizer.
TrainState InitTrainState(const EncoderConfig& encoder,
                          const TrainConfig& config);

struct TrainResult {
  TrainState state;
  History history;
  std::vector<EpochSummary> epochs;
};

using EpochCallback = std::function<void(const EpochSummary&)>;

// Runs epochs state.epochs_completed .. config.epochs - 1. Each epoch visits
// the training rows in an order shuffled by (seed, epoch); negatives for
// step k come from a generator seeded by (seed, k). Resuming from a saved
// state therefore reproduces the uninterrupted run exactly.
TrainResult Train(const TrainConfig& config, TrainState state,
                  std::span<const EncodedItem> train,
                  std::span<const EncodedItem> dev = {},
                  const EpochCallback& on_epoch = nullptr);

// Title-only predictions for encoded items, batched.
std::vector<std::vector<int>> PredictEncoded(const Parameters& params,
                                             std::span<const EncodedItem> items,
                                             std::size_t batch_size = 64);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_TRAINER_H_
