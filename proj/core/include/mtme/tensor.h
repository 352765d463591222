// Copyright 2026 The MTME Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mtme {

using Shape = std::vector<std::size_t>;
using NodeId = std::size_t;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace internal {
struct TapeState;
struct TensorAccess;
}  // namespace internal

// Dense row-major fp64 array. Copies are cheap: storage is shared and copied
// on the first write through mutable_values(). A tensor produced by an
// operation on tracked inputs is itself tracked by the same Tape and carries
// its node id; it stops being tracked once that tape is destroyed.
class Tensor {
 public:
  // Scalar zero.
  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return data_->size(); }

  std::span<const double> values() const { return *data_; }
  // Writable view. Detaches the tensor from its tape and un-shares storage.
  std::span<double> mutable_values();

  double operator[](std::size_t i) const { return (*data_)[i]; }
  double at(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j, std::size_t k) const;
  // Value of a single-element tensor.
  double item() const;

  bool requires_grad() const;
  std::optional<NodeId> node_id() const;

  // Same values, no tape membership.
  Tensor detach() const;

 private:
  friend struct internal::TensorAccess;

  Shape shape_;
  std::shared_ptr<std::vector<double>> data_;
  std::weak_ptr<internal::TapeState> tape_;
  std::optional<NodeId> node_;
};

// Exact element-for-element equality of shape and values.
bool bitwise_equal(const Tensor& a, const Tensor& b);

// Row-major integer matrix of token ids, rows = batch, cols = time.
struct IdMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> ids;

  IdMatrix() = default;
  IdMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), ids(r * c, 0) {}
  IdMatrix(std::size_t r, std::size_t c, std::vector<std::int32_t> values);

  std::int32_t at(std::size_t r, std::size_t c) const { return ids[r * cols + c]; }
  std::int32_t& at(std::size_t r, std::size_t c) { return ids[r * cols + c]; }
  std::span<const std::int32_t> row(std::size_t r) const {
    return std::span<const std::int32_t>(ids).subspan(r * cols, cols);
  }
};

}  // namespace mtme
