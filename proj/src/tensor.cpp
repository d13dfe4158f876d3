// Copyright 2026 The salient-reid Authors. All Rights Reserved.
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

#include "sreid/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "sreid/errors.hpp"

namespace sreid {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != element_count(shape_)) {
    throw InvalidInput("tensor: " + std::to_string(data_.size()) +
                       " values do not fit shape " + shape_string(shape_));
  }
}

std::size_t Tensor::slice_size() const {
  if (shape_.empty() || shape_[0] == 0) return 0;
  return data_.size() / shape_[0];
}

Tensor Tensor::slice(std::size_t n) const {
  const std::size_t stride = slice_size();
  std::vector<std::size_t> sub(shape_.begin() + 1, shape_.end());
  if (sub.empty()) sub.push_back(1);
  return Tensor(std::move(sub),
                std::vector<double>(data_.begin() + n * stride,
                                    data_.begin() + (n + 1) * stride));
}

void Tensor::set_slice(std::size_t n, const Tensor& value) {
  const std::size_t stride = slice_size();
  if (value.size() != stride) {
    throw InvalidInput("tensor: slice of size " + std::to_string(value.size()) +
                       " does not fit " + shape_string(shape_));
  }
  std::copy(value.data_.begin(), value.data_.end(),
            data_.begin() + n * stride);
}

std::span<const double> Tensor::row(std::size_t n) const {
  const std::size_t stride = slice_size();
  return std::span<const double>(data_).subspan(n * stride, stride);
}

std::span<double> Tensor::row(std::size_t n) {
  const std::size_t stride = slice_size();
  return std::span<double>(data_).subspan(n * stride, stride);
}

Tensor Tensor::stack(std::span<const Tensor> items) {
  if (items.empty()) return {};
  std::vector<std::size_t> shape{items.size()};
  shape.insert(shape.end(), items[0].shape_.begin(), items[0].shape_.end());
  Tensor out(shape);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].same_shape(items[0])) {
      throw InvalidInput("tensor: cannot stack " + shape_string(items[i].shape_) +
                         " with " + shape_string(items[0].shape_));
    }
    out.set_slice(i, items[i]);
  }
  return out;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor& Tensor::operator+=(const Tensor& other) {
  if (!same_shape(other)) {
    throw InvalidInput("tensor: shape mismatch " + shape_string(shape_) + " += " +
                       shape_string(other.shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor flip_horizontal(const Tensor& t) {
  if (t.rank() < 2) throw InvalidInput("flip_horizontal: rank < 2");
  const std::size_t w = t.shape().back();
  const std::size_t rows = t.size() / w;
  Tensor out(t.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = t.data() + r * w;
    double* dst = out.data() + r * w;
    for (std::size_t j = 0; j < w; ++j) dst[j] = src[w - 1 - j];
  }
  return out;
}

}  // namespace sreid
