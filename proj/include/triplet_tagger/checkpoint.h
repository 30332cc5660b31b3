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

#ifndef TRIPLET_TAGGER_CHECKPOINT_H_
#define TRIPLET_TAGGER_CHECKPOINT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "triplet_tagger/corpus.h"
#include "triplet_tagger/model.h"
#include "triplet_tagger/optimizer.h"

namespace tagger {

// Everything needed to predict (params, vocabulary, tag scheme) and to resume
// training (optimizer moments, progress counters).
//
// File layout, all integers little-endian:
//   8 bytes   magic "TTAGCKPT"
//   u32       format version (1)
//   u64       header length H
//   H bytes   UTF-8 JSON header: encoder config, vocabulary tokens and
//             FNV-1a hash, entity types, progress, tensor names and shapes,
//             and whether optimizer moments follow
//   f64[]     tensor values in header order (IEEE-754 bit patterns)
//   f64[]     if present: Adam first moments, then second moments, same order
struct Checkpoint {
  Parameters params;
  Vocabulary vocab;
  TagScheme tags;
  std::optional<AdamState> optimizer;
  std::size_t epochs_completed = 0;
  std::uint64_t global_step = 0;
  // Free-form run name, e.g. the training mode.
  std::string label;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void WriteCheckpoint(const Checkpoint& checkpoint, std::ostream& out);
Checkpoint ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path);
// DataError on any malformed or inconsistent content.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);
// Also checks the stored encoder config against `expected`; a mismatch is a
// DataError naming the first differing field.
Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          const EncoderConfig& expected);

void RequireSameConfig(const EncoderConfig& stored,
                       const EncoderConfig& expected);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_CHECKPOINT_H_
