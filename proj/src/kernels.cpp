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

#include "sreid/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sreid/errors.hpp"

namespace sreid::kernels {

ConvShape ConvShape::of(const Tensor& x, const Tensor& w, std::size_t stride) {
  if (x.rank() != 4 || w.rank() != 4 || w.dim(2) != 3 || w.dim(3) != 3) {
    throw InvalidInput("conv3x3: bad operand shapes " + shape_string(x.shape()) +
                       " * " + shape_string(w.shape()));
  }
  if (x.dim(1) != w.dim(1)) {
    throw InvalidInput("conv3x3: input has " + std::to_string(x.dim(1)) +
                       " channels, weight expects " + std::to_string(w.dim(1)));
  }
  if (stride == 0) throw InvalidInput("conv3x3: stride 0");
  return ConvShape{x.dim(0), x.dim(1), w.dim(0), x.dim(2), x.dim(3), stride};
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

// Output index range [lo, hi) whose tap offset k lands inside [0, in).
struct Span {
  std::int64_t lo, hi;
};

Span valid_outputs(std::int64_t k, std::int64_t in, std::int64_t out,
                   std::int64_t stride) {
  // o * stride + k - 1 in [0, in)
  const std::int64_t lo = k >= 1 ? 0 : (1 - k + stride - 1) / stride;
  const std::int64_t last = in - k;  // o * stride <= in - k
  const std::int64_t hi = last < 0 ? 0 : std::min(out, last / stride + 1);
  return {lo, std::max(lo, hi)};
}

}  // namespace

Tensor conv3x3_forward(const Tensor& x, const Tensor& w, std::size_t stride) {
  const ConvShape s = ConvShape::of(x, w, stride);
  const auto oh = static_cast<std::int64_t>(s.out_h());
  const auto ow = static_cast<std::int64_t>(s.out_w());
  const auto ih = static_cast<std::int64_t>(s.in_h);
  const auto iw = static_cast<std::int64_t>(s.in_w);
  const auto st = static_cast<std::int64_t>(stride);
  Tensor y({s.batch, s.out_channels, s.out_h(), s.out_w()});

  const auto jobs = static_cast<std::int64_t>(s.batch * s.out_channels);
#pragma omp parallel for schedule(static)
  for (std::int64_t job = 0; job < jobs; ++job) {
    const std::size_t n = static_cast<std::size_t>(job) / s.out_channels;
    const std::size_t oc = static_cast<std::size_t>(job) % s.out_channels;
    double* out = y.data() + (n * s.out_channels + oc) * oh * ow;
    for (std::size_t ic = 0; ic < s.in_channels; ++ic) {
      const double* in = x.data() + (n * s.in_channels + ic) * ih * iw;
      const double* k = w.data() + (oc * s.in_channels + ic) * 9;
      for (std::int64_t kh = 0; kh < 3; ++kh) {
        const Span rows = valid_outputs(kh, ih, oh, st);
        for (std::int64_t kw = 0; kw < 3; ++kw) {
          const Span cols = valid_outputs(kw, iw, ow, st);
          const double wv = k[kh * 3 + kw];
          for (std::int64_t r = rows.lo; r < rows.hi; ++r) {
            const double* src = in + (r * st + kh - 1) * iw + (kw - 1);
            double* dst = out + r * ow;
            if (st == 1) {
              for (std::int64_t c = cols.lo; c < cols.hi; ++c) dst[c] += wv * src[c];
            } else {
              for (std::int64_t c = cols.lo; c < cols.hi; ++c) dst[c] += wv * src[c * st];
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor conv3x3_backward_input(const Tensor& dy, const Tensor& w,
                              const ConvShape& s) {
  const auto oh = static_cast<std::int64_t>(s.out_h());
  const auto ow = static_cast<std::int64_t>(s.out_w());
  const auto ih = static_cast<std::int64_t>(s.in_h);
  const auto iw = static_cast<std::int64_t>(s.in_w);
  const auto st = static_cast<std::int64_t>(s.stride);
  Tensor dx({s.batch, s.in_channels, s.in_h, s.in_w});

  const auto jobs = static_cast<std::int64_t>(s.batch * s.in_channels);
#pragma omp parallel for schedule(static)
  for (std::int64_t job = 0; job < jobs; ++job) {
    const std::size_t n = static_cast<std::size_t>(job) / s.in_channels;
    const std::size_t ic = static_cast<std::size_t>(job) % s.in_channels;
    double* out = dx.data() + (n * s.in_channels + ic) * ih * iw;
    for (std::size_t oc = 0; oc < s.out_channels; ++oc) {
      const double* g = dy.data() + (n * s.out_channels + oc) * oh * ow;
      const double* k = w.data() + (oc * s.in_channels + ic) * 9;
      for (std::int64_t kh = 0; kh < 3; ++kh) {
        const Span rows = valid_outputs(kh, ih, oh, st);
        for (std::int64_t kw = 0; kw < 3; ++kw) {
          const Span cols = valid_outputs(kw, iw, ow, st);
          const double wv = k[kh * 3 + kw];
          for (std::int64_t r = rows.lo; r < rows.hi; ++r) {
            double* dst = out + (r * st + kh - 1) * iw + (kw - 1);
            const double* src = g + r * ow;
            for (std::int64_t c = cols.lo; c < cols.hi; ++c) dst[c * st] += wv * src[c];
          }
        }
      }
    }
  }
  return dx;
}

void conv3x3_backward_weight(const Tensor& x, const Tensor& dy, std::size_t stride,
                             Tensor& dw) {
  const ConvShape s = ConvShape::of(x, dw, stride);
  const auto oh = static_cast<std::int64_t>(s.out_h());
  const auto ow = static_cast<std::int64_t>(s.out_w());
  const auto ih = static_cast<std::int64_t>(s.in_h);
  const auto iw = static_cast<std::int64_t>(s.in_w);
  const auto st = static_cast<std::int64_t>(stride);

  const auto jobs = static_cast<std::int64_t>(s.out_channels * s.in_channels);
#pragma omp parallel for schedule(static)
  for (std::int64_t job = 0; job < jobs; ++job) {
    const std::size_t oc = static_cast<std::size_t>(job) / s.in_channels;
    const std::size_t ic = static_cast<std::size_t>(job) % s.in_channels;
    double* k = dw.data() + (oc * s.in_channels + ic) * 9;
    for (std::int64_t kh = 0; kh < 3; ++kh) {
      const Span rows = valid_outputs(kh, ih, oh, st);
      for (std::int64_t kw = 0; kw < 3; ++kw) {
        const Span cols = valid_outputs(kw, iw, ow, st);
        double acc = 0.0;
        for (std::size_t n = 0; n < s.batch; ++n) {
          const double* in = x.data() + (n * s.in_channels + ic) * ih * iw;
          const double* g = dy.data() + (n * s.out_channels + oc) * oh * ow;
          for (std::int64_t r = rows.lo; r < rows.hi; ++r) {
            const double* src = in + (r * st + kh - 1) * iw + (kw - 1);
            const double* gr = g + r * ow;
            for (std::int64_t c = cols.lo; c < cols.hi; ++c) acc += gr[c] * src[c * st];
          }
        }
        k[kh * 3 + kw] += acc;
      }
    }
  }
}

namespace {

void check_pool_input(const Tensor& A) {
  if (A.rank() != 4) {
    throw InvalidInput("pool: expected (N, C, H, W), got " + shape_string(A.shape()));
  }
  if (A.empty()) throw InvalidInput("pool: empty spatial extent");
}

double pool_plane(PoolingMode mode, std::span<const double> p, const PPoolingLayer& layer) {
  switch (mode) {
    case PoolingMode::kGap: {
      double sum = 0.0;
      for (double v : p) sum += v;
      return sum / static_cast<double>(p.size());
    }
    case PoolingMode::kGmp:
      return *std::max_element(p.begin(), p.end());
    case PoolingMode::kPPool:
      return detail::lehmer_mean(p, layer.l, layer.eps);
  }
  return 0.0;
}

// Gradient of one plane; returns dF/dl (P-pooling) scaled by g.
double pool_plane_backward(PoolingMode mode, std::span<const double> p,
                           const PPoolingLayer& layer, double g, std::span<double> out) {
  switch (mode) {
    case PoolingMode::kGap: {
      const double v = g / static_cast<double>(p.size());
      std::fill(out.begin(), out.end(), v);
      return 0.0;
    }
    case PoolingMode::kGmp: {
      std::fill(out.begin(), out.end(), 0.0);
      out[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())] = g;
      return 0.0;
    }
    case PoolingMode::kPPool: {
      detail::lehmer_grad_input(p, layer.l, layer.eps, out);
      for (double& v : out) v *= g;
      return g * detail::lehmer_grad_l(p, layer.l, layer.eps);
    }
  }
  return 0.0;
}

}  // namespace

Tensor pool_forward(PoolingMode mode, const Tensor& A, const PPoolingLayer& layer) {
  check_pool_input(A);
  if (mode == PoolingMode::kPPool) detail::check_nonnegative(A.values());
  const std::size_t planes = A.dim(0) * A.dim(1);
  const std::size_t hw = A.dim(2) * A.dim(3);
  Tensor out({A.dim(0), A.dim(1)});
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(planes); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx] = pool_plane(mode, A.values().subspan(idx * hw, hw), layer);
  }
  return out;
}

PoolGrad pool_backward(PoolingMode mode, const Tensor& A, const PPoolingLayer& layer,
                       const Tensor& g) {
  check_pool_input(A);
  if (mode == PoolingMode::kPPool) detail::check_nonnegative(A.values());
  const std::size_t planes = A.dim(0) * A.dim(1);
  const std::size_t hw = A.dim(2) * A.dim(3);
  PoolGrad grad{Tensor(A.shape()), 0.0};
  std::vector<double> dl(planes, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(planes); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    dl[idx] = pool_plane_backward(mode, A.values().subspan(idx * hw, hw), layer, g[idx],
                                  grad.input.values().subspan(idx * hw, hw));
  }
  for (double v : dl) grad.l += v;  // fixed order
  return grad;
}

namespace serial {

Tensor conv3x3_forward(const Tensor& x, const Tensor& w, std::size_t stride) {
  const ConvShape s = ConvShape::of(x, w, stride);
  Tensor y({s.batch, s.out_channels, s.out_h(), s.out_w()});
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t oc = 0; oc < s.out_channels; ++oc)
      for (std::size_t r = 0; r < s.out_h(); ++r)
        for (std::size_t c = 0; c < s.out_w(); ++c) {
          double acc = 0.0;
          for (std::size_t ic = 0; ic < s.in_channels; ++ic)
            for (std::size_t kh = 0; kh < 3; ++kh)
              for (std::size_t kw = 0; kw < 3; ++kw) {
                const auto i = static_cast<std::int64_t>(r * stride + kh) - 1;
                const auto j = static_cast<std::int64_t>(c * stride + kw) - 1;
                if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(s.in_h) ||
                    j >= static_cast<std::int64_t>(s.in_w))
                  continue;
                acc += w.at(oc, ic, kh, kw) *
                       x.at(n, ic, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
              }
          y.at(n, oc, r, c) = acc;
        }
  return y;
}

Tensor conv3x3_backward_input(const Tensor& dy, const Tensor& w, const ConvShape& s) {
  Tensor dx({s.batch, s.in_channels, s.in_h, s.in_w});
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t oc = 0; oc < s.out_channels; ++oc)
      for (std::size_t r = 0; r < s.out_h(); ++r)
        for (std::size_t c = 0; c < s.out_w(); ++c)
          for (std::size_t ic = 0; ic < s.in_channels; ++ic)
            for (std::size_t kh = 0; kh < 3; ++kh)
              for (std::size_t kw = 0; kw < 3; ++kw) {
                const auto i = static_cast<std::int64_t>(r * s.stride + kh) - 1;
                const auto j = static_cast<std::int64_t>(c * s.stride + kw) - 1;
                if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(s.in_h) ||
                    j >= static_cast<std::int64_t>(s.in_w))
                  continue;
                dx.at(n, ic, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +=
                    w.at(oc, ic, kh, kw) * dy.at(n, oc, r, c);
              }
  return dx;
}

void conv3x3_backward_weight(const Tensor& x, const Tensor& dy, std::size_t stride,
                             Tensor& dw) {
  const ConvShape s = ConvShape::of(x, dw, stride);
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t oc = 0; oc < s.out_channels; ++oc)
      for (std::size_t r = 0; r < s.out_h(); ++r)
        for (std::size_t c = 0; c < s.out_w(); ++c)
          for (std::size_t ic = 0; ic < s.in_channels; ++ic)
            for (std::size_t kh = 0; kh < 3; ++kh)
              for (std::size_t kw = 0; kw < 3; ++kw) {
                const auto i = static_cast<std::int64_t>(r * stride + kh) - 1;
                const auto j = static_cast<std::int64_t>(c * stride + kw) - 1;
                if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(s.in_h) ||
                    j >= static_cast<std::int64_t>(s.in_w))
                  continue;
                dw.at(oc, ic, kh, kw) +=
                    dy.at(n, oc, r, c) *
                    x.at(n, ic, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
              }
}

Tensor pool_forward(PoolingMode mode, const Tensor& A, const PPoolingLayer& layer) {
  check_pool_input(A);
  if (mode == PoolingMode::kPPool) detail::check_nonnegative(A.values());
  const std::size_t hw = A.dim(2) * A.dim(3);
  Tensor out({A.dim(0), A.dim(1)});
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = pool_plane(mode, A.values().subspan(i * hw, hw), layer);
  }
  return out;
}

PoolGrad pool_backward(PoolingMode mode, const Tensor& A, const PPoolingLayer& layer,
                       const Tensor& g) {
  check_pool_input(A);
  if (mode == PoolingMode::kPPool) detail::check_nonnegative(A.values());
  const std::size_t hw = A.dim(2) * A.dim(3);
  PoolGrad grad{Tensor(A.shape()), 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    grad.l += pool_plane_backward(mode, A.values().subspan(i * hw, hw), layer, g[i],
                                  grad.input.values().subspan(i * hw, hw));
  }
  return grad;
}

}  // namespace serial

}  // namespace sreid::kernels
