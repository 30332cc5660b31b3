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

#include "triplet_tagger/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "triplet_tagger/errors.h"

namespace tagger {
namespace internal {

struct TensorStorage {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
  bool is_leaf = true;
};

}  // namespace internal

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : storage_(std::make_shared<internal::TensorStorage>()) {
  for (std::size_t d : shape) {
    if (d == 0) {
      throw DimensionError("tensor dims must be positive, got " +
                           ShapeString(shape));
    }
  }
  if (NumElements(shape) != values.size()) {
    throw DimensionError("shape " + ShapeString(shape) + " needs " +
                         std::to_string(NumElements(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  storage_->shape = std::move(shape);
  storage_->values = std::move(values);
  set_requires_grad(requires_grad);
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  return Filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::Filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = NumElements(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value),
                requires_grad);
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return Tensor({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return storage_->shape; }

std::size_t Tensor::size() const { return storage_->values.size(); }

std::span<const double> Tensor::values() const { return storage_->values; }

std::span<double> Tensor::mutable_values() { return storage_->values; }

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + ShapeString(shape()));
  }
  return storage_->values[0];
}

bool Tensor::requires_grad() const { return storage_->requires_grad; }

void Tensor::set_requires_grad(bool requires_grad) {
  storage_->requires_grad = requires_grad;
  if (requires_grad) {
    storage_->grad.assign(storage_->values.size(), 0.0);
  } else {
    storage_->grad.clear();
    storage_->grad.shrink_to_fit();
  }
}

std::span<const double> Tensor::grad() const { return storage_->grad; }

std::span<double> Tensor::mutable_grad() { return storage_->grad; }

void Tensor::ZeroGrad() {
  std::fill(storage_->grad.begin(), storage_->grad.end(), 0.0);
}

bool Tensor::is_leaf() const { return storage_->is_leaf; }

Tensor Tensor::Clone() const {
  if (!defined()) return Tensor();
  return Tensor(storage_->shape, storage_->values, storage_->requires_grad);
}

void AccumulateGrad(const Tensor& t, std::span<const double> delta) {
  if (!t.requires_grad()) return;
  Tensor handle = t;
  std::span<double> grad = handle.mutable_grad();
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += delta[i];
}

void CheckFinite(std::string_view what, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(std::string(what) + ": non-finite value " +
                         std::to_string(values[i]) + " at index " +
                         std::to_string(i));
    }
  }
}

Tape Tape::NoGrad() {
  Tape tape;
  tape.recording_ = false;
  return tape;
}

bool Tape::ShouldRecord(std::initializer_list<const Tensor*> inputs) const {
  if (!recording_) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) {
    return t->defined() && t->requires_grad();
  });
}

void Tape::Record(std::string_view op, std::vector<Tensor> inputs,
                  Tensor& output, BackwardFn backward) {
  if (!recording_) return;
  const bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) {
    return t.defined() && t.requires_grad();
  });
  if (!any) return;
  if (backward_done_) {
    throw ContractError("cannot record '" + std::string(op) +
                        "' after Backward() on the same tape");
  }
  output.set_requires_grad(true);
  output.storage_->is_leaf = false;
  records_.push_back(
      OpRecord{std::string(op), std::move(inputs), output, std::move(backward)});
}

std::vector<std::string> Tape::OpNames() const {
  std::vector<std::string> names;
  names.reserve(records_.size());
  for (const OpRecord& r : records_) names.push_back(r.op);
  return names;
}

void Tape::Backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        (loss.defined() ? ShapeString(loss.shape())
                                        : std::string("<null>")));
  }
  if (backward_done_) {
    throw ContractError("Backward() already ran on this tape");
  }
  std::size_t end = records_.size();
  while (end > 0 && !records_[end - 1].output.SharesStorageWith(loss)) --end;
  if (end == 0) {
    throw ContractError("loss was not produced on this tape");
  }
  backward_done_ = true;

  Tensor seed = loss;
  seed.mutable_grad()[0] = 1.0;

  for (std::size_t k = end; k-- > 0;) {
    OpRecord& record = records_[k];
    std::span<const double> g = record.output.grad();
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) {
      continue;
    }
    record.backward(g);
  }

  for (const OpRecord& record : records_) {
    for (const Tensor& input : record.inputs) {
      if (input.defined() && input.requires_grad() && input.is_leaf()) {
        CheckFinite("gradient of leaf input to '" + record.op + "'",
                    input.grad());
      }
    }
  }
}

void Tape::Clear() {
  records_.clear();
  backward_done_ = false;
}

}  // namespace tagger
