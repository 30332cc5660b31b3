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

#include "triplet_tagger/trainer.h"

#include <cmath>
#include <ostream>
#include <sstream>

#include "triplet_tagger/checkpoint.h"
#include "triplet_tagger/errors.h"
#include "triplet_tagger/ops.h"

namespace tagger {
namespace {

// Stream ids for MixSeed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kNegativeStream = 3;

void AppendOptional(std::ostream& out, const std::optional<double>& v) {
  out << ',';
  if (v) out << *v;
}

TokenBatch Gather(std::span<const EncodedItem> corpus,
                  std::span<const std::size_t> rows,
                  std::vector<int> EncodedItem::*field) {
  std::vector<std::vector<int>> sequences;
  sequences.reserve(rows.size());
  for (std::size_t r : rows) sequences.push_back(corpus[r].*field);
  return TokenBatch::FromSequences(sequences);
}

}  // namespace

std::string_view ModeName(TrainMode mode) {
  return mode == TrainMode::kBaseline ? "baseline" : "multitask";
}

std::optional<TrainMode> ParseMode(std::string_view name) {
  if (name == "baseline") return TrainMode::kBaseline;
  if (name == "multitask") return TrainMode::kMultitask;
  return std::nullopt;
}

void TrainConfig::Validate() const {
  if (batch_size < 1) throw ContractError("train: batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ContractError("train: lr must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ContractError("train: lambda must be >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ContractError("train: betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ContractError("train: adam eps must be > 0");
}

void History::WriteCsv(std::ostream& out) const {
  out << "epoch,step,loss_total,loss_ner,loss_triplet,sigmoid_score\n";
  const std::streamsize old = out.precision(17);
  for (const StepRecord& r : steps) {
    out << r.epoch << ',' << r.step << ',' << r.loss_total << ',' << r.loss_ner;
    AppendOptional(out, r.loss_triplet);
    AppendOptional(out, r.sigmoid_score);
    out << '\n';
  }
  out.precision(old);
}

std::string History::ToCsv() const {
  std::ostringstream out;
  WriteCsv(out);
  return out.str();
}

std::size_t SampleNegative(Rng& rng, std::size_t anchor,
                           std::size_t catalog_size) {
  if (catalog_size < 2) {
    throw DataError("sample_negative: need at least 2 items, catalog has " +
                    std::to_string(catalog_size));
  }
  if (anchor >= catalog_size) {
    throw ContractError("sample_negative: anchor outside catalog");
  }
  const std::size_t draw = rng.UniformIndex(catalog_size - 1);
  return draw >= anchor ? draw + 1 : draw;
}

StepLosses ForwardBackward(const Parameters& params,
                           std::span<const EncodedItem> corpus,
                           std::span<const std::size_t> batch,
                           std::span<const std::size_t> negatives,
                           TrainMode mode, LossWeights weights) {
  if (batch.empty()) throw ContractError("train_step: empty batch");
  Tape tape;
  const TokenBatch titles = Gather(corpus, batch, &EncodedItem::title_ids);
  std::vector<int> gold(titles.batch * titles.seq, kPadTagId);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const std::vector<int>& tags = corpus[batch[r]].tag_ids;
    std::copy(tags.begin(), tags.end(), gold.begin() + r * titles.seq);
  }

  const Tensor encoded_titles = Encode(tape, params, titles);
  const Tensor ner = NerLoss(tape, TagLogits(tape, params, encoded_titles), gold,
                             titles.mask);
  StepLosses losses;
  losses.ner = ner.item();
  Tensor total = ops::Scale(tape, ner, weights.ner);

  if (mode == TrainMode::kMultitask) {
    if (negatives.size() != batch.size()) {
      throw ContractError("train_step: need one negative per anchor");
    }
    const TokenBatch positive_batch =
        Gather(corpus, batch, &EncodedItem::description_ids);
    const TokenBatch negative_batch =
        Gather(corpus, negatives, &EncodedItem::description_ids);
    const Tensor anchors = PoolSentence(tape, encoded_titles, titles.mask);
    const Tensor positives = PoolSentence(
        tape, Encode(tape, params, positive_batch), positive_batch.mask);
    const Tensor negatives_pooled = PoolSentence(
        tape, Encode(tape, params, negative_batch), negative_batch.mask);
    BatchTriplet triplet = TripletLoss(tape, anchors, positives, negatives_pooled);
    losses.triplet = triplet.loss.item();
    double sigmoid_sum = 0.0;
    for (const TripletScores& s : triplet.scores) sigmoid_sum += SigmoidScore(s.margin);
    losses.sigmoid_score = sigmoid_sum / static_cast<double>(triplet.scores.size());
    losses.scores = std::move(triplet.scores);
    total = MultitaskLoss(tape, total, triplet.loss, weights.triplet);
  }

  losses.total = total.item();
  CheckFinite("training loss", total.values());
  tape.Backward(total);
  return losses;
}

StepLosses TrainStep(Parameters& params, AdamState& optimizer,
                     std::span<const EncodedItem> corpus,
                     std::span<const std::size_t> batch,
                     const TrainConfig& config, Rng& rng) {
  params.ZeroGrad();
  std::vector<std::size_t> negatives;
  if (config.mode == TrainMode::kMultitask) {
    negatives.reserve(batch.size());
    for (std::size_t anchor : batch) {
      negatives.push_back(SampleNegative(rng, anchor, corpus.size()));
    }
  }
  StepLosses losses = ForwardBackward(params, corpus, batch, negatives,
                                      config.mode, {1.0, config.lambda});
  OptimizerStep(params, optimizer, config.adam());
  return losses;
}

TrainState InitTrainState(const EncoderConfig& encoder,
                          const TrainConfig& config) {
  TrainState state;
  if (config.warm_start) {
    state.params = LoadCheckpoint(*config.warm_start, encoder).params;
  } else {
    state.params = InitParams(encoder, MixSeed(config.seed, kInitStream));
  }
  state.optimizer = InitAdamState(state.params);
  return state;
}

TrainResult Train(const TrainConfig& config, TrainState state,
                  std::span<const EncodedItem> train,
                  std::span<const EncodedItem> dev,
                  const EpochCallback& on_epoch) {
  config.Validate();
  if (train.empty()) throw DataError("train: empty training set");
  if (config.mode == TrainMode::kMultitask && train.size() < 2) {
    throw DataError("train: multitask mode needs at least 2 training items");
  }
  TrainResult result;
  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = state.epochs_completed; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle(MixSeed(config.seed, kShuffleStream, epoch));
    shuffle.Shuffle(std::span<std::size_t>(order));

    EpochSummary summary;
    summary.epoch = epoch;
    double triplet_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      Rng negatives(MixSeed(config.seed, kNegativeStream, state.global_step));
      const StepLosses losses =
          TrainStep(state.params, state.optimizer, train, batch, config, negatives);
      result.history.steps.push_back(StepRecord{epoch, state.global_step,
                                                losses.total, losses.ner,
                                                losses.triplet,
                                                losses.sigmoid_score});
      ++state.global_step;
      ++steps;
      summary.mean_total += losses.total;
      summary.mean_ner += losses.ner;
      if (losses.triplet) triplet_sum += *losses.triplet;
    }
    summary.mean_total /= static_cast<double>(steps);
    summary.mean_ner /= static_cast<double>(steps);
    if (config.mode == TrainMode::kMultitask) {
      summary.mean_triplet = triplet_sum / static_cast<double>(steps);
    }
    if (!dev.empty()) {
      const std::vector<std::vector<int>> predicted = PredictEncoded(state.params, dev);
      std::size_t exact = 0;
      for (std::size_t i = 0; i < dev.size(); ++i) {
        if (predicted[i] == dev[i].tag_ids) ++exact;
      }
      summary.dev_exact_match = static_cast<double>(exact) / static_cast<double>(dev.size());
    }
    state.epochs_completed = epoch + 1;
    result.epochs.push_back(summary);
    if (on_epoch) on_epoch(summary);
  }
  result.state = std::move(state);
  return result;
}

std::vector<std::vector<int>> PredictEncoded(const Parameters& params,
                                             std::span<const EncodedItem> items,
                                             std::size_t batch_size) {
  if (batch_size < 1) throw ContractError("predict: batch_size must be >= 1");
  std::vector<std::vector<int>> out;
  out.reserve(items.size());
  for (std::size_t start = 0; start < items.size(); start += batch_size) {
    const std::size_t end = std::min(items.size(), start + batch_size);
    std::vector<std::vector<int>> titles;
    for (std::size_t i = start; i < end; ++i) titles.push_back(items[i].title_ids);
    const TokenBatch batch = TokenBatch::FromSequences(titles);
    std::vector<std::vector<int>> tags = PredictTags(params, batch);
    for (std::size_t r = 0; r < tags.size(); ++r) {
      tags[r].resize(titles[r].size());
      out.push_back(std::move(tags[r]));
    }
  }
  return out;
}

}  // namespace tagger
