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

#ifndef TRIPLET_TAGGER_TENSOR_H_
#define TRIPLET_TAGGER_TENSOR_H_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tagger {

using Shape = std::vector<std::size_t>;

// Product of the dims; 1 for the rank-0 shape.
std::size_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

namespace internal {
struct TensorStorage;
}  // namespace internal

// Dense row-major array of doubles with an optional gradient buffer.
//
// Tensor is a handle: copies share storage, so a parameter held by a model
// and the same parameter passed to an op are one object. Clone() makes an
// independent deep copy. The gradient buffer exists exactly when
// requires_grad() is true and always has the shape of the values.
class Tensor {
 public:
  // Null handle; defined() is false.
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Filled(Shape shape, double value, bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const { return shape().at(axis); }
  std::size_t size() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double operator[](std::size_t i) const { return values()[i]; }
  // The single value of a one-element tensor.
  double item() const;

  bool requires_grad() const;
  // Enabling allocates a zeroed gradient; disabling releases it.
  void set_requires_grad(bool requires_grad);
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void ZeroGrad();

  // False for tensors produced by a recorded op.
  bool is_leaf() const;

  Tensor Clone() const;
  bool SharesStorageWith(const Tensor& other) const {
    return storage_ == other.storage_;
  }

 private:
  friend class Tape;
  std::shared_ptr<internal::TensorStorage> storage_;
};

// Receives d(loss)/d(output) and accumulates into the inputs' gradients.
using BackwardFn = std::function<void(std::span<const double> output_grad)>;

// Ordered record of differentiable ops for one forward pass.
//
// Ops record themselves only when the tape is recording and at least one
// input requires a gradient; the output then requires a gradient too.
// Records are appended in execution order, so every input of record k is a
// leaf or the output of an earlier record. Backward() visits each record
// once in reverse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // A tape that never records; for inference and finite differences.
  static Tape NoGrad();

  bool recording() const { return recording_; }
  bool ShouldRecord(std::initializer_list<const Tensor*> inputs) const;

  void Record(std::string_view op, std::vector<Tensor> inputs, Tensor& output,
              BackwardFn backward);

  std::size_t size() const { return records_.size(); }
  std::vector<std::string> OpNames() const;

  // Seeds d(loss)/d(loss) = 1 and propagates to every leaf that requires a
  // gradient. Leaf gradients accumulate into whatever they already hold.
  // Throws ContractError for a non-scalar loss, a loss not produced on this
  // tape, or a second call; NumericError if any leaf gradient is non-finite.
  void Backward(const Tensor& loss);

  void Clear();

 private:
  struct OpRecord {
    std::string op;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  bool recording_ = true;
  bool backward_done_ = false;
  std::vector<OpRecord> records_;
};

inline void Backward(const Tensor& loss, Tape& tape) { tape.Backward(loss); }

// Adds `delta` into t's gradient when t requires one.
void AccumulateGrad(const Tensor& t, std::span<const double> delta);

// Throws NumericError naming `what` if any value is NaN or Inf.
void CheckFinite(std::string_view what, std::span<const double> values);

}  // namespace tagger

#endif  // TRIPLET_TAGGER_TENSOR_H_
