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

#ifndef SREID_KERNELS_HPP_
#define SREID_KERNELS_HPP_

#include <cstddef>

#include "sreid/pooling.hpp"
#include "sreid/tensor.hpp"

// Data-parallel inner loops of the network.
//
// `sreid::kernels` holds the OpenMP versions used by the model. Each one
// parallelizes over outputs that are written by exactly one thread, so
// results are bit-identical for any thread count. `sreid::kernels::serial`
// holds straightforward reference loops kept for tests and benchmarks.
namespace sreid::kernels {

/// 3x3 convolution, zero padding 1, no bias.
///   x: (N, Cin, H, W), w: (Cout, Cin, 3, 3) -> y: (N, Cout, Ho, Wo)
struct ConvShape {
  std::size_t batch, in_channels, out_channels, in_h, in_w, stride;
  std::size_t out_h() const { return (in_h + 2 - 3) / stride + 1; }
  std::size_t out_w() const { return (in_w + 2 - 3) / stride + 1; }
  static ConvShape of(const Tensor& x, const Tensor& w, std::size_t stride);
};

Tensor conv3x3_forward(const Tensor& x, const Tensor& w, std::size_t stride);
/// dL/dx given dL/dy.
Tensor conv3x3_backward_input(const Tensor& dy, const Tensor& w,
                              const ConvShape& shape);
/// Adds dL/dw into `dw`.
void conv3x3_backward_weight(const Tensor& x, const Tensor& dy,
                             std::size_t stride, Tensor& dw);

/// Global pooling of every (n, k) plane: (N, C, H, W) -> (N, C).
Tensor pool_forward(PoolingMode mode, const Tensor& A, const PPoolingLayer& layer);

struct PoolGrad {
  Tensor input;         // (N, C, H, W)
  double l = 0.0;       // d(sum_{n,k} g[n,k] F[n,k]) / dl, P-pooling only
};
/// Backward of pool_forward for upstream gradient `g` of shape (N, C).
/// GMP routes the gradient to the first maximal element in row-major order.
PoolGrad pool_backward(PoolingMode mode, const Tensor& A, const PPoolingLayer& layer,
                       const Tensor& g);

namespace serial {

Tensor conv3x3_forward(const Tensor& x, const Tensor& w, std::size_t stride);
Tensor conv3x3_backward_input(const Tensor& dy, const Tensor& w,
                              const ConvShape& shape);
void conv3x3_backward_weight(const Tensor& x, const Tensor& dy,
                             std::size_t stride, Tensor& dw);
Tensor pool_forward(PoolingMode mode, const Tensor& A, const PPoolingLayer& layer);
PoolGrad pool_backward(PoolingMode mode, const Tensor& A, const PPoolingLayer& layer,
                       const Tensor& g);

}  // namespace serial

/// Threads the parallel kernels will use (1 when built without OpenMP).
int max_threads();

}  // namespace sreid::kernels

#endif  // SREID_KERNELS_HPP_
