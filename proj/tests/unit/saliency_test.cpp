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

#include <algorithm>
#include <cmath>

#include "contrived_net.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "sreid/errors.hpp"
#include "sreid/saliency.hpp"

using namespace sreid;
using testing::random_tensor;

TEST_CASE("cosine score") {
  const std::vector<double> a{1, 0}, b{1, 1}, c{0, 3}, d{0.3, -1.7, 2.2};
  CHECK(cosine_score(d, d) == 1.0);
  CHECK(cosine_score(a, c) == 0.0);
  CHECK(cosine_score(a, b) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(cosine_score(a, std::vector<double>{0, 0}), InvalidInput);
}

TEST_CASE("cosine score gradient against finite differences") {
  const std::vector<double> q{0.4, -1.2, 0.7}, g{1.1, 0.2, -0.5};
  const auto grad = cosine_score_grad(q, g);
  const auto ref = oracle::central_difference(
      [&](const oracle::Vec& p) {
        long double qq = 0, gg = 0, qg = 0;
        for (std::size_t i = 0; i < 3; ++i) {
          qq += p[i] * p[i];
          gg += g[i] * static_cast<long double>(g[i]);
          qg += p[i] * g[i];
        }
        return qg / std::sqrt(qq * gg);
      },
      testing::to_vec(q), 1e-5L);
  for (std::size_t i = 0; i < 3; ++i) CHECK(grad[i] == doctest::Approx(static_cast<double>(ref[i])).epsilon(1e-8));
}

TEST_CASE("cg-ram ignores what the score cannot see") {
  testing::RegionNet net(3, 6, 8, 5, 4, [](std::size_t, std::size_t j) { return j < 4; }, 1);
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor q = random_tensor({3, 6, 8}, rng, 0.0, 1.0);
    const Tensor g = random_tensor({3, 6, 8}, rng, 0.0, 1.0);
    const CgRamResult r = cg_ram(net, q, g);
    CHECK(r.map.min() >= 0.0);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 4; j < 8; ++j) CHECK(r.map.values.at(i, j) == 0.0);
  }
}

TEST_CASE("grad-cam on a quadrant-reading classifier") {
  // Grad-CAM weighs whole channels, so the tapped features are made
  // spatially selective: channel 0 responds only in the top-left quadrant,
  // channel 1 everywhere. The classifier reads the quadrant, which carries
  // gradient for channel 0 and channel 1 alike.
  testing::RegionNet net(2, 8, 8, 3, 3, [](std::size_t i, std::size_t j) { return i < 4 && j < 4; }, 3);
  Rng rng(4);
  Tensor img = random_tensor({2, 8, 8}, rng, 0.0, 1.0);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      if (i >= 4 || j >= 4) img.at(0, i, j) = 0.0;
      img.at(1, i, j) = 0.0;
    }
  const SalientMap m = grad_cam(net, img, 1);
  CHECK(m.values.shape() == std::vector<std::size_t>{8, 8});
  CHECK(m.min() >= 0.0);
  double quadrant = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) quadrant += m.values.at(i, j);
  CHECK(quadrant >= 0.9 * m.mass());
  CHECK_THROWS_AS(grad_cam(net, img, 7), InvalidInput);
}

TEST_CASE("cg-ram through a model tap") {
  ModelConfig cfg = testing::tiny_model_config();
  const Model model(cfg);
  Rng rng(5);
  const Tensor q = random_tensor({3, 16, 8}, rng);
  const Tensor g = random_tensor({3, 16, 8}, rng);
  const auto before = testing::snapshot(model);
  for (const char* tap : {"stem.stage2", "aib.final", "esb.final"}) {
    ModelTap net(model, model.resolve_tap(tap), Readout::kRetrieval, NormMode::kEval);
    const CgRamResult self = cg_ram(net, q, q);
    CHECK(self.score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(self.map.min() >= 0.0);
    const CgRamResult pair = cg_ram(net, q, g);
    CHECK(pair.map.min() >= 0.0);
    CHECK(pair.score < 1.0);
  }
  CHECK(testing::snapshot(model) == before);
}

TEST_CASE("bilinear resize") {
  Rng rng(6);
  const Tensor m = random_tensor({3, 5}, rng);
  CHECK(resize_bilinear(m, 3, 5) == m);
  const Tensor c = resize_bilinear(Tensor({2, 3}, 0.7), 7, 4);
  for (double v : c.values()) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
  const Tensor x = resize_bilinear(Tensor({2, 2}, {0, 1, 1, 0}), 3, 3);
  CHECK(x.at(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  SalientMap s{m, std::nullopt};
  CHECK(resize_map(s, 6, 10).resized->shape() == std::vector<std::size_t>{6, 10});
}

TEST_CASE("overlay") {
  Rng rng(7);
  const Tensor img = random_tensor({3, 4, 5}, rng, 0.0, 1.0);
  const Tensor zero = overlay(img, Tensor({4, 5}));
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(zero[i] == 0.5 * img[i]);

  Tensor hot({4, 5});
  hot.at(2, 3) = 0.2;
  const Tensor o = overlay(img, hot);
  CHECK(o.at(0, 2, 3) == 0.5 * img.at(0, 2, 3) + 0.5);
  CHECK(o.at(2, 2, 3) == 0.5 * img.at(2, 2, 3) + 0.5);

  const Tensor m = random_tensor({4, 5}, rng, 0.0, 2.0);
  Tensor scaled = m;
  for (double& v : scaled.values()) v *= 4.0;
  CHECK(overlay(img, m) == overlay(img, scaled));
  for (double& v : scaled.values()) v *= 0.37;
  const Tensor a = overlay(img, m);
  const Tensor b = overlay(img, scaled);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}
