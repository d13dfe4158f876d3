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

#ifndef SREID_POOLING_HPP_
#define SREID_POOLING_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "sreid/tensor.hpp"

namespace sreid {

enum class PoolingMode { kGap, kGmp, kPPool };

PoolingMode parse_pooling_mode(std::string_view name);
std::string_view to_string(PoolingMode mode);

/// Learnable Lehmer-mean pooling.
///
///   F^k = sum_a a^l / sum_a a^(l-1),  a ranging over max(A[k], eps)
///
/// F equals the channel mean at l = 1 and tends to the channel max as
/// l grows. One scalar exponent is shared by all channels.
struct PPoolingLayer {
  double l = 3.0;
  double l_min = 1.0;
  double l_max = 20.0;
  double eps = 1e-6;

  /// Throws ConfigError unless 1 <= l_min <= l <= l_max and eps > 0.
  void validate() const;
  /// Pulls l back into [l_min, l_max]; called after every optimizer step.
  void clamp();
};

using PooledVector = std::vector<double>;

// Single feature maps, shape (C, H, W).
PooledVector gap(const Tensor& A);
PooledVector gmp(const Tensor& A);
PooledVector ppool_forward(const Tensor& A, const PPoolingLayer& layer);
/// dF^k/dl for every channel.
PooledVector ppool_grad_l(const Tensor& A, const PPoolingLayer& layer);
/// dF^k/dA[k,i,j]; entries whose raw value is below eps are 0.
Tensor ppool_grad_input(const Tensor& A, const PPoolingLayer& layer);

namespace detail {

// Per-channel primitives shared by the single-map API and the batch kernels.
// `values` is one spatial plane.
double lehmer_mean(std::span<const double> values, double l, double eps);
double lehmer_grad_l(std::span<const double> values, double l, double eps);
/// Writes dF/da into `grad` (same length as `values`) and returns F.
double lehmer_grad_input(std::span<const double> values, double l, double eps,
                         std::span<double> grad);
void check_nonnegative(std::span<const double> values);

}  // namespace detail

}  // namespace sreid

#endif  // SREID_POOLING_HPP_
