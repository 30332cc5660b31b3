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

#ifndef TRIPLET_TAGGER_ERRORS_H_
#define TRIPLET_TAGGER_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tagger {

// Base of every error the library throws. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that cannot be combined (inner dims, sequence longer than max_len).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by an op, a loss, or a gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (non-scalar loss, invalid BIO
// reaching span extraction, all-masked row).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data: files, tags, checkpoints.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace tagger

#endif  // TRIPLET_TAGGER_ERRORS_H_
