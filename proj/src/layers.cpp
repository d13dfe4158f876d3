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

#include "sreid/layers.hpp"

#include <cmath>
#include <cstdint>

#include "sreid/errors.hpp"
#include "sreid/kernels.hpp"

namespace sreid {

Conv3x3::Conv3x3(const std::string& name, std::size_t in_channels,
                 std::size_t out_channels, std::size_t stride, Rng& rng)
    : weight(name + ".weight", Tensor({out_channels, in_channels, 3, 3})), stride_(stride) {
  // Kaiming normal, fan-out mode
  const double std = std::sqrt(2.0 / static_cast<double>(out_channels * 9));
  for (double& v : weight.value.values()) v = std * rng.normal();
}

Tensor Conv3x3::forward(const Tensor& x) const {
  return kernels::conv3x3_forward(x, weight.value, stride_);
}

Tensor Conv3x3::backward(const Tensor& x, const Tensor& dy, Tensor* dw) const {
  if (dw) kernels::conv3x3_backward_weight(x, dy, stride_, *dw);
  return kernels::conv3x3_backward_input(
      dy, weight.value, kernels::ConvShape::of(x, weight.value, stride_));
}

BatchNorm::BatchNorm(const std::string& name, std::size_t channels, bool learn_bias)
    : gamma(name + ".gamma", Tensor({channels}, 1.0), false),
      beta(name + ".beta", Tensor({channels}, 0.0), false),
      running_mean({channels}, 0.0),
      running_var({channels}, 1.0) {
  beta.trainable = learn_bias;
}

namespace {

struct Layout {
  std::size_t batch, channels, inner;
};

Layout layout_of(const Tensor& x, std::size_t channels) {
  if (x.rank() < 2 || x.dim(1) != channels) {
    throw InvalidInput("batch norm: expected " + std::to_string(channels) +
                       " channels, got " + shape_string(x.shape()));
  }
  return {x.dim(0), channels, x.size() / (x.dim(0) * channels)};
}

}  // namespace

Tensor BatchNorm::forward(const Tensor& x, bool batch_stats, Cache& cache) const {
  const Layout L = layout_of(x, gamma.value.size());
  const double count = static_cast<double>(L.batch * L.inner);
  Tensor y(x.shape());
  cache.xhat = Tensor(x.shape());
  cache.inv_std.assign(L.channels, 0.0);
  cache.batch_mean.assign(L.channels, 0.0);
  cache.batch_var.assign(L.channels, 0.0);
  cache.batch_stats = batch_stats;

#pragma omp parallel for schedule(static)
  for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(L.channels); ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    double mean = running_mean[c];
    double var = running_var[c];
    if (batch_stats) {
      double sum = 0.0;
      for (std::size_t n = 0; n < L.batch; ++n) {
        const double* p = x.data() + (n * L.channels + c) * L.inner;
        for (std::size_t i = 0; i < L.inner; ++i) sum += p[i];
      }
      mean = sum / count;
      double sq = 0.0;
      for (std::size_t n = 0; n < L.batch; ++n) {
        const double* p = x.data() + (n * L.channels + c) * L.inner;
        for (std::size_t i = 0; i < L.inner; ++i) sq += (p[i] - mean) * (p[i] - mean);
      }
      var = sq / count;
      cache.batch_mean[c] = mean;
      cache.batch_var[c] = var;
    }
    const double inv = 1.0 / std::sqrt(var + eps);
    cache.inv_std[c] = inv;
    const double g = gamma.value[c];
    const double b = beta.value[c];
    for (std::size_t n = 0; n < L.batch; ++n) {
      const std::size_t off = (n * L.channels + c) * L.inner;
      for (std::size_t i = 0; i < L.inner; ++i) {
        const double xh = (x[off + i] - mean) * inv;
        cache.xhat[off + i] = xh;
        y[off + i] = g * xh + b;
      }
    }
  }
  return y;
}

void BatchNorm::update_running(const Cache& cache, std::size_t per_channel_count) {
  if (!cache.batch_stats) return;
  const double m = static_cast<double>(per_channel_count);
  const double unbias = m > 1.0 ? m / (m - 1.0) : 1.0;
  for (std::size_t c = 0; c < running_mean.size(); ++c) {
    running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * cache.batch_mean[c];
    running_var[c] = (1.0 - momentum) * running_var[c] + momentum * cache.batch_var[c] * unbias;
  }
}

Tensor BatchNorm::backward(const Tensor& dy, const Cache& cache, Tensor* dgamma,
                           Tensor* dbeta) const {
  const Layout L = layout_of(dy, gamma.value.size());
  const double count = static_cast<double>(L.batch * L.inner);
  Tensor dx(dy.shape());

#pragma omp parallel for schedule(static)
  for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(L.channels); ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < L.batch; ++n) {
      const std::size_t off = (n * L.channels + c) * L.inner;
      for (std::size_t i = 0; i < L.inner; ++i) {
        sum_dy += dy[off + i];
        sum_dy_xhat += dy[off + i] * cache.xhat[off + i];
      }
    }
    if (dgamma) (*dgamma)[c] += sum_dy_xhat;
    if (dbeta) (*dbeta)[c] += sum_dy;
    const double g = gamma.value[c] * cache.inv_std[c];
    for (std::size_t n = 0; n < L.batch; ++n) {
      const std::size_t off = (n * L.channels + c) * L.inner;
      for (std::size_t i = 0; i < L.inner; ++i) {
        if (cache.batch_stats) {
          dx[off + i] = g * (dy[off + i] - sum_dy / count -
                             cache.xhat[off + i] * sum_dy_xhat / count);
        } else {
          dx[off + i] = g * dy[off + i];
        }
      }
    }
  }
  return dx;
}

Linear::Linear(const std::string& name, std::size_t in_features, std::size_t out_features,
               double init_std, Rng& rng)
    : weight(name + ".weight", Tensor({out_features, in_features})) {
  for (double& v : weight.value.values()) v = init_std * rng.normal();
}

Tensor Linear::forward(const Tensor& x) const {
  const std::size_t n = x.dim(0);
  const std::size_t in = weight.value.dim(1);
  const std::size_t out = weight.value.dim(0);
  if (x.rank() != 2 || x.dim(1) != in) {
    throw InvalidInput("linear: expected (N, " + std::to_string(in) + "), got " +
                       shape_string(x.shape()));
  }
  Tensor y({n, out});
#pragma omp parallel for schedule(static)
  for (std::int64_t ri = 0; ri < static_cast<std::int64_t>(n); ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += x.at(r, i) * weight.value.at(o, i);
      y.at(r, o) = acc;
    }
  }
  return y;
}

Tensor Linear::backward(const Tensor& x, const Tensor& dy, Tensor* dw) const {
  const std::size_t n = x.dim(0);
  const std::size_t in = weight.value.dim(1);
  const std::size_t out = weight.value.dim(0);
  Tensor dx({n, in});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t o = 0; o < out; ++o) {
      const double g = dy.at(r, o);
      if (g == 0.0) continue;
      for (std::size_t i = 0; i < in; ++i) dx.at(r, i) += g * weight.value.at(o, i);
    }
  if (dw) {
#pragma omp parallel for schedule(static)
    for (std::int64_t oi = 0; oi < static_cast<std::int64_t>(out); ++oi) {
      const auto o = static_cast<std::size_t>(oi);
      for (std::size_t r = 0; r < n; ++r) {
        const double g = dy.at(r, o);
        for (std::size_t i = 0; i < in; ++i) dw->at(o, i) += g * x.at(r, i);
      }
    }
  }
  return dx;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

}  // namespace sreid
