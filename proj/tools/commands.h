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

#ifndef TRIPLET_TAGGER_TOOLS_COMMANDS_H_
#define TRIPLET_TAGGER_TOOLS_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace tagger::cli {

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumeric = 3,
};

// Environment variable consulted when no seed flag or config seed is given.
inline constexpr const char* kSeedEnvVar = "TRIPLET_TAGGER_SEED";

// Runs one command line (args[0] is the program name). Regular output goes to
// `out`, diagnostics to `err`, and `predict` reads titles from `in` when no
// input file is given.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, std::istream& in);

}  // namespace tagger::cli

#endif  // TRIPLET_TAGGER_TOOLS_COMMANDS_H_
