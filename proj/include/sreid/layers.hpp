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

#ifndef SREID_LAYERS_HPP_
#define SREID_LAYERS_HPP_

#include <string>
#include <vector>

#include "sreid/rng.hpp"
#include "sreid/tensor.hpp"

namespace sreid {

/// A learnable tensor and its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
  bool weight_decay = true;

  Parameter() = default;
  Parameter(std::string n, Tensor v, bool decay = true)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()), weight_decay(decay) {}
  void zero_grad() { grad.fill(0.0); }
};

/// 3x3 convolution, padding 1, no bias (always followed by batch norm).
class Conv3x3 {
 public:
  Conv3x3() = default;
  Conv3x3(const std::string& name, std::size_t in_channels, std::size_t out_channels,
          std::size_t stride, Rng& rng);

  Tensor forward(const Tensor& x) const;
  /// Returns dL/dx; adds dL/dw into `dw` when non-null.
  Tensor backward(const Tensor& x, const Tensor& dy, Tensor* dw) const;

  std::size_t stride() const { return stride_; }
  Parameter weight;

 private:
  std::size_t stride_ = 1;
};

/// Batch normalization over axis 1 of (N, C) or (N, C, H, W) inputs.
class BatchNorm {
 public:
  struct Cache {
    Tensor xhat;
    std::vector<double> inv_std;
    std::vector<double> batch_mean;
    std::vector<double> batch_var;  // biased
    bool batch_stats = false;
  };

  BatchNorm() = default;
  BatchNorm(const std::string& name, std::size_t channels, bool learn_bias = true);

  /// Batch statistics when `batch_stats`, running statistics otherwise.
  Tensor forward(const Tensor& x, bool batch_stats, Cache& cache) const;
  /// Folds the batch statistics recorded in `cache` into the running ones.
  void update_running(const Cache& cache, std::size_t per_channel_count);
  Tensor backward(const Tensor& dy, const Cache& cache, Tensor* dgamma, Tensor* dbeta) const;

  Parameter gamma;
  Parameter beta;
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Bias-free fully connected layer, y = x W^T.
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, std::size_t in_features, std::size_t out_features,
         double init_std, Rng& rng);

  Tensor forward(const Tensor& x) const;
  Tensor backward(const Tensor& x, const Tensor& dy, Tensor* dw) const;

  Parameter weight;  // (out, in)
};

Tensor relu(const Tensor& x);
/// dL/dx of y = relu(x) expressed through the output y.
Tensor relu_backward(const Tensor& y, const Tensor& dy);

}  // namespace sreid

#endif  // SREID_LAYERS_HPP_
