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

#include "sreid/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sreid/errors.hpp"

namespace sreid {

PoolingMode parse_pooling_mode(std::string_view name) {
  if (name == "gap") return PoolingMode::kGap;
  if (name == "gmp") return PoolingMode::kGmp;
  if (name == "ppool") return PoolingMode::kPPool;
  throw ConfigError("unknown pooling mode '" + std::string(name) +
                    "' (expected gap | gmp | ppool)");
}

std::string_view to_string(PoolingMode mode) {
  switch (mode) {
    case PoolingMode::kGap: return "gap";
    case PoolingMode::kGmp: return "gmp";
    case PoolingMode::kPPool: return "ppool";
  }
  return "?";
}

void PPoolingLayer::validate() const {
  if (!(eps > 0.0)) throw ConfigError("ppool: eps must be > 0");
  if (!(l_min >= 1.0)) throw ConfigError("ppool: l_min must be >= 1");
  if (!(l_min <= l_max)) throw ConfigError("ppool: l_min must be <= l_max");
  if (!(l >= l_min && l <= l_max)) {
    throw ConfigError("ppool: l = " + std::to_string(l) + " outside [" +
                      std::to_string(l_min) + ", " + std::to_string(l_max) + "]");
  }
}

void PPoolingLayer::clamp() { l = std::clamp(l, l_min, l_max); }

namespace detail {

void check_nonnegative(std::span<const double> values) {
  for (double v : values) {
    if (!(v >= 0.0)) {
      throw ContractViolation(
          "pooling: negative or NaN activation " + std::to_string(v) +
          " (rectifier missing upstream)");
    }
  }
}

namespace {

// Log-space accumulation with the largest log-activation factored out:
//   sum a^p = e^(p m) * sum exp(p (ln a - m)).
struct LogSums {
  double log_max = 0.0;
  double s_hi = 0.0;  // sum exp(l (ln a - m))
  double s_lo = 0.0;  // sum exp((l - 1) (ln a - m))
};

LogSums log_sums(std::span<const double> values, double l, double eps) {
  LogSums s;
  s.log_max = -std::numeric_limits<double>::infinity();
  for (double v : values) s.log_max = std::max(s.log_max, std::log(std::max(v, eps)));
  for (double v : values) {
    const double u = std::log(std::max(v, eps)) - s.log_max;
    s.s_hi += std::exp(l * u);
    s.s_lo += std::exp((l - 1.0) * u);
  }
  return s;
}

double floored_mean(std::span<const double> values, double eps) {
  double sum = 0.0;
  for (double v : values) sum += std::max(v, eps);
  return sum / static_cast<double>(values.size());
}

}  // namespace

double lehmer_mean(std::span<const double> values, double l, double eps) {
  if (l == 1.0) return floored_mean(values, eps);
  const LogSums s = log_sums(values, l, eps);
  return std::exp(s.log_max) * s.s_hi / s.s_lo;
}

double lehmer_grad_l(std::span<const double> values, double l, double eps) {
  const LogSums s = log_sums(values, l, eps);
  double hi = 0.0;
  double lo = 0.0;
  for (double v : values) {
    const double ln_a = std::log(std::max(v, eps));
    const double u = ln_a - s.log_max;
    hi += std::exp(l * u) * ln_a;
    lo += std::exp((l - 1.0) * u) * ln_a;
  }
  const double f = lehmer_mean(values, l, eps);
  return f * (hi / s.s_hi - lo / s.s_lo);
}

double lehmer_grad_input(std::span<const double> values, double l, double eps,
                         std::span<double> grad) {
  const double f = lehmer_mean(values, l, eps);
  if (l == 1.0) {
    const double g = 1.0 / static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      grad[i] = values[i] < eps ? 0.0 : g;
    }
    return f;
  }
  const LogSums s = log_sums(values, l, eps);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < eps) {
      grad[i] = 0.0;
      continue;
    }
    // w = a^(l-1) / sum a^(l-1);  dF/da = l w - (l - 1) F w / a
    const double u = std::log(values[i]) - s.log_max;
    const double w = std::exp((l - 1.0) * u) / s.s_lo;
    grad[i] = l * w - (l - 1.0) * f * w / values[i];
  }
  return f;
}

}  // namespace detail

namespace {

void check_map(const Tensor& A, const char* op) {
  if (A.rank() != 3) {
    throw InvalidInput(std::string(op) + ": expected a (C, H, W) feature map, got " +
                       shape_string(A.shape()));
  }
  if (A.empty()) throw InvalidInput(std::string(op) + ": empty spatial extent");
}

std::span<const double> plane(const Tensor& A, std::size_t k) {
  const std::size_t hw = A.dim(1) * A.dim(2);
  return A.values().subspan(k * hw, hw);
}

}  // namespace

PooledVector gap(const Tensor& A) {
  check_map(A, "gap");
  PooledVector out(A.dim(0));
  for (std::size_t k = 0; k < out.size(); ++k) {
    double sum = 0.0;
    for (double v : plane(A, k)) sum += v;
    out[k] = sum / static_cast<double>(plane(A, k).size());
  }
  return out;
}

PooledVector gmp(const Tensor& A) {
  check_map(A, "gmp");
  PooledVector out(A.dim(0));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto p = plane(A, k);
    out[k] = *std::max_element(p.begin(), p.end());
  }
  return out;
}

PooledVector ppool_forward(const Tensor& A, const PPoolingLayer& layer) {
  check_map(A, "ppool_forward");
  detail::check_nonnegative(A.values());
  PooledVector out(A.dim(0));
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = detail::lehmer_mean(plane(A, k), layer.l, layer.eps);
  }
  return out;
}

PooledVector ppool_grad_l(const Tensor& A, const PPoolingLayer& layer) {
  check_map(A, "ppool_grad_l");
  detail::check_nonnegative(A.values());
  PooledVector out(A.dim(0));
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = detail::lehmer_grad_l(plane(A, k), layer.l, layer.eps);
  }
  return out;
}

Tensor ppool_grad_input(const Tensor& A, const PPoolingLayer& layer) {
  check_map(A, "ppool_grad_input");
  detail::check_nonnegative(A.values());
  Tensor grad(A.shape());
  const std::size_t hw = A.dim(1) * A.dim(2);
  for (std::size_t k = 0; k < A.dim(0); ++k) {
    detail::lehmer_grad_input(plane(A, k), layer.l, layer.eps,
                              grad.values().subspan(k * hw, hw));
  }
  return grad;
}

}  // namespace sreid
