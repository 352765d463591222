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

#include "mtme/tensor.h"

#include <algorithm>
#include <sstream>

#include "mtme/error.h"
#include "tape_internal.h"

namespace mtme {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor() : data_(std::make_shared<std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " +
                                 shape_to_string(shape_));
  }
  if (shape_numel(shape_) != values.size()) {
    throw ShapeError("shape " + shape_to_string(shape_) + " needs " +
                     std::to_string(shape_numel(shape_)) + " values, got " +
                     std::to_string(values.size()));
  }
  data_ = std::make_shared<std::vector<double>>(std::move(values));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw ShapeError("matrix needs at least one row");
  const std::size_t cols = rows.begin()->size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw ShapeError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), cols}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw IndexError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_to_string(shape_));
  }
  return shape_[axis];
}

std::span<double> Tensor::mutable_values() {
  tape_.reset();
  node_.reset();
  if (data_.use_count() > 1) data_ = std::make_shared<std::vector<double>>(*data_);
  return *data_;
}

double Tensor::at(std::size_t i, std::size_t j) const {
  if (rank() != 2 || i >= shape_[0] || j >= shape_[1]) {
    throw IndexError("index (" + std::to_string(i) + ", " + std::to_string(j) +
                     ") invalid for shape " + shape_to_string(shape_));
  }
  return (*data_)[i * shape_[1] + j];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  if (rank() != 3 || i >= shape_[0] || j >= shape_[1] || k >= shape_[2]) {
    throw IndexError("index (" + std::to_string(i) + ", " + std::to_string(j) +
                     ", " + std::to_string(k) + ") invalid for shape " +
                     shape_to_string(shape_));
  }
  return (*data_)[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() needs a single element, shape is " +
                     shape_to_string(shape_));
  }
  return (*data_)[0];
}

bool Tensor::requires_grad() const { return node_.has_value() && !tape_.expired(); }

std::optional<NodeId> Tensor::node_id() const {
  if (!requires_grad()) return std::nullopt;
  return node_;
}

Tensor Tensor::detach() const {
  Tensor t = *this;
  t.tape_.reset();
  t.node_.reset();
  return t;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  auto va = a.values();
  auto vb = b.values();
  return std::equal(va.begin(), va.end(), vb.begin());
}

IdMatrix::IdMatrix(std::size_t r, std::size_t c, std::vector<std::int32_t> values)
    : rows(r), cols(c), ids(std::move(values)) {
  if (ids.size() != rows * cols) {
    throw ShapeError("id matrix " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " needs " +
                     std::to_string(rows * cols) + " ids, got " +
                     std::to_string(ids.size()));
  }
}

}  // namespace mtme
