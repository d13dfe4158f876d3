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

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sreid/errors.hpp"
#include "sreid/kernels.hpp"
#include "sreid/pooling.hpp"

using namespace sreid;

namespace {

Tensor channel(std::vector<double> v, std::size_t h, std::size_t w) {
  return Tensor({1, h, w}, std::move(v));
}

}  // namespace

TEST_CASE("gap and gmp") {
  CHECK(gap(channel({1, 2, 3, 4}, 2, 2))[0] == 2.5);
  CHECK(gap(channel({0, 0, 0, 0}, 2, 2))[0] == 0.0);
  CHECK(gap(channel({5}, 1, 1))[0] == 5.0);
  CHECK(gmp(channel({1, 2, 3, 4}, 2, 2))[0] == 4.0);
  CHECK(gmp(channel({2.5, 2.5}, 1, 2))[0] == 2.5);
  CHECK(gmp(channel({0, 7, 7, 0}, 2, 2))[0] == 7.0);
}

TEST_CASE("ppool forward values") {
  PPoolingLayer layer;
  layer.l = 2;
  CHECK(ppool_forward(channel({1, 2, 3}, 1, 3), layer)[0] == doctest::Approx(14.0 / 6).epsilon(1e-14));
  layer.l = 16;
  const double v = ppool_forward(channel({1, 2, 3}, 1, 3), layer)[0];
  CHECK(v <= 3.0);
  CHECK(v > 2.95);
}

TEST_CASE("ppool at l = 1 equals gap on floored inputs") {
  Rng rng(3);
  PPoolingLayer layer;
  layer.l = 1;
  for (int i = 0; i < 50; ++i) {
    const Tensor A = testing::random_tensor({3, 4, 5}, rng, layer.eps, 10.0);
    CHECK(ppool_forward(A, layer) == gap(A));
  }
}

TEST_CASE("ppool gradients against the long-double oracle") {
  PPoolingLayer layer;
  const long double eps = layer.eps;
  struct Case {
    std::vector<double> a;
    double l;
  };
  for (const Case& c : {Case{{1, 2, 3}, 2.0}, Case{{0.5, 4.0}, 3.0}}) {
    layer.l = c.l;
    const Tensor A = channel(c.a, 1, c.a.size());
    const oracle::Vec a(c.a.begin(), c.a.end());
    const long double ref_l = oracle::central_difference(
        [&](const oracle::Vec& p) { return oracle::lehmer(a, p[0], eps); }, {c.l}, 1e-4L)[0];
    CHECK(std::fabs((ppool_grad_l(A, layer)[0] - ref_l) / ref_l) < 1e-5L);

    const oracle::Vec ref_in = oracle::central_difference(
        [&](const oracle::Vec& p) { return oracle::lehmer(p, c.l, eps); }, a, 1e-4L);
    const Tensor g = ppool_grad_input(A, layer);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::fabs((g[i] - ref_in[i]) / ref_in[i]) < 1e-5L);
    }
  }
}

TEST_CASE("ppool gradient special cases") {
  PPoolingLayer layer;
  layer.l = 4;
  CHECK(ppool_grad_l(channel({2, 2, 2, 2}, 2, 2), layer)[0] == doctest::Approx(0.0).epsilon(1e-12));
  layer.l = 1;
  const Tensor g = ppool_grad_input(channel({1, 5, 2, 7, 3, 9}, 2, 3), layer);
  for (double v : g.values()) CHECK(v == doctest::Approx(1.0 / 6).epsilon(1e-14));
  layer.l = 3;
  const Tensor h = ppool_grad_input(channel({0.0, 1e-9, 2.0, 3.0}, 2, 2), layer);
  CHECK(h[0] == 0.0);
  CHECK(h[1] == 0.0);
  CHECK(h[2] != 0.0);
}

TEST_CASE("ppool sandwich between gap and gmp") {
  Rng rng(11);
  PPoolingLayer layer;
  for (int i = 0; i < 500; ++i) {
    layer.l = rng.uniform(1.0, 20.0);
    const Tensor A = testing::random_tensor({2, 3, 3}, rng, layer.eps, 10.0);
    const auto p = ppool_forward(A, layer);
    const auto lo = gap(A);
    const auto hi = gmp(A);
    for (std::size_t k = 0; k < p.size(); ++k) {
      CHECK(p[k] >= lo[k] * (1 - 1e-12));
      CHECK(p[k] <= hi[k] * (1 + 1e-12));
    }
  }
}

// At l = 20 the pooled value need not be within 2% of the max: three values
// {1, 0.95, 0.95} give (1 + 2*0.95^20) / (1 + 2*0.95^19) = 0.9785.
TEST_CASE("ppool at the upper clamp can sit more than 2% below gmp") {
  Tensor A({1, 1, 3});
  A[0] = 1.0;
  A[1] = 0.95;
  A[2] = 0.95;
  PPoolingLayer layer;
  layer.l = 20.0;
  const double p = ppool_forward(A, layer)[0];
  const auto ref = oracle::lehmer({1.0L, 0.95L, 0.95L}, 20.0L, 1e-6L);
  CHECK(p == doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
  CHECK(1.0 - p > 0.02);
  CHECK(1.0 - p < 0.022);
}

TEST_CASE("ppool layer contract") {
  PPoolingLayer layer;
  layer.l = 25;
  layer.clamp();
  CHECK(layer.l == 20.0);
  layer.l = 0.5;
  layer.clamp();
  CHECK(layer.l == 1.0);
  PPoolingLayer bad;
  bad.eps = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = PPoolingLayer{};
  bad.l_min = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS(ppool_forward(channel({1, -1}, 1, 2), PPoolingLayer{}));
}

TEST_CASE("parallel pooling kernels match the serial reference") {
  Rng rng(5);
  PPoolingLayer layer;
  layer.l = 4.5;
  const Tensor A = testing::random_tensor({3, 5, 6, 4}, rng, 0.0, 3.0);
  const Tensor g = testing::random_tensor({3, 5}, rng);
  for (PoolingMode mode : {PoolingMode::kGap, PoolingMode::kGmp, PoolingMode::kPPool}) {
    CHECK(kernels::pool_forward(mode, A, layer) == kernels::serial::pool_forward(mode, A, layer));
    const auto a = kernels::pool_backward(mode, A, layer, g);
    const auto b = kernels::serial::pool_backward(mode, A, layer, g);
    CHECK(a.input == b.input);
    CHECK(a.l == doctest::Approx(b.l).epsilon(1e-12));
  }
}

TEST_CASE("parallel conv kernels match the serial reference") {
  Rng rng(6);
  const Tensor x = testing::random_tensor({2, 3, 7, 5}, rng);
  const Tensor w = testing::random_tensor({4, 3, 3, 3}, rng);
  for (std::size_t stride : {1u, 2u}) {
    const Tensor y = kernels::conv3x3_forward(x, w, stride);
    CHECK(y == kernels::serial::conv3x3_forward(x, w, stride));
    const Tensor dy = testing::random_tensor(y.shape(), rng);
    const auto shape = kernels::ConvShape::of(x, w, stride);
    const Tensor dx1 = kernels::conv3x3_backward_input(dy, w, shape);
    const Tensor dx2 = kernels::serial::conv3x3_backward_input(dy, w, shape);
    for (std::size_t i = 0; i < dx1.size(); ++i) CHECK(dx1[i] == doctest::Approx(dx2[i]).epsilon(1e-12));
    Tensor dw1(w.shape()), dw2(w.shape());
    kernels::conv3x3_backward_weight(x, dy, stride, dw1);
    kernels::serial::conv3x3_backward_weight(x, dy, stride, dw2);
    for (std::size_t i = 0; i < dw1.size(); ++i) CHECK(dw1[i] == doctest::Approx(dw2[i]).epsilon(1e-12));
  }
}
