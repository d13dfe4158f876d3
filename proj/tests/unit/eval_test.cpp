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
#include "sreid/eval.hpp"

using namespace sreid;

TEST_CASE("single query with the positive first") {
  const Tensor q({1, 2}, {1, 0});
  const Tensor g({3, 2}, {1, 0.1, 0, 1, -1, 0});
  const EvalResult r = cmc_map(q, std::vector<int>{1}, std::vector<int>{1}, g,
                               std::vector<int>{1, 2, 3}, std::vector<int>{2, 2, 2}, 3);
  CHECK(r.mAP == 1.0);
  CHECK(r.rank(1) == 1.0);
}

TEST_CASE("two positives at ranks 1 and 3") {
  const Tensor q({1, 2}, {1, 0});
  // Similarities 1.0 > 0.8 > 0.6 > 0.0; positives at gallery 0 and 2.
  const Tensor g({4, 2}, {1, 0, 0.8, 0.6, 0.6, 0.8, 0, 1});
  const EvalResult r = cmc_map(q, std::vector<int>{5}, std::vector<int>{1}, g,
                               std::vector<int>{5, 6, 5, 7}, std::vector<int>{2, 2, 2, 2}, 4);
  CHECK(r.mAP == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("queries without a valid positive are dropped") {
  const Tensor q({2, 2}, {1, 0, 0, 1});
  const Tensor g({2, 2}, {1, 0, 0, 1});
  const EvalResult r = cmc_map(q, std::vector<int>{1, 2}, std::vector<int>{1, 1}, g,
                               std::vector<int>{1, 2}, std::vector<int>{1, 2}, 2);
  CHECK(r.dropped_queries == 1);
  CHECK(std::isnan(r.per_query_ap[0]));
  CHECK(r.per_query_ap[1] == 1.0);
  CHECK(r.mAP == 1.0);
}

TEST_CASE("cmc and mAP equal the brute-force oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nq = 1 + rng.below(8);
    const std::size_t ng = 5 + rng.below(16);
    const Tensor q = testing::random_tensor({nq, 4}, rng);
    const Tensor g = testing::random_tensor({ng, 4}, rng);
    std::vector<int> qp(nq), qc(nq), gp(ng), gc(ng);
    for (auto& v : qp) v = static_cast<int>(rng.below(4));
    for (auto& v : qc) v = static_cast<int>(rng.below(3));
    for (auto& v : gp) v = static_cast<int>(rng.below(4));
    for (auto& v : gc) v = static_cast<int>(rng.below(3));
    const EvalResult r = cmc_map(q, qp, qc, g, gp, gc, ng);
    const auto o = oracle::retrieval(testing::rows(q), qp, qc, testing::rows(g), gp, gc, ng);
    CHECK(r.dropped_queries == o.dropped);
    for (std::size_t k = 0; k < ng; ++k) CHECK(r.cmc[k] == static_cast<double>(o.cmc[k]));
    for (std::size_t i = 0; i < nq; ++i) {
      CHECK(std::isnan(r.per_query_ap[i]) == !o.ap[i].has_value());
      if (o.ap[i]) CHECK(std::fabs(r.per_query_ap[i] - *o.ap[i]) < 1e-12L);
    }
  }
}

TEST_CASE("input guards") {
  const Tensor q({1, 2}, {1, 0});
  CHECK_THROWS_AS(cmc_map(q, std::vector<int>{1}, std::vector<int>{1}, Tensor(),
                          std::vector<int>{}, std::vector<int>{}, 1),
                  InvalidInput);
  CHECK_THROWS_AS(cmc_map(q, std::vector<int>{1}, std::vector<int>{1}, Tensor({1, 2}),
                          std::vector<int>{1}, std::vector<int>{2}, 1),
                  InvalidInput);
}

TEST_CASE("feature extraction") {
  const Model m(testing::tiny_model_config());
  Rng rng(3);
  AugmentConfig aug;
  aug.height = 16;
  aug.width = 8;
  const Tensor img = testing::random_tensor({3, 16, 8}, rng, 0.0, 1.0);
  const std::vector<Tensor> imgs{img, testing::random_tensor({3, 16, 8}, rng, 0.0, 1.0), img};
  const Tensor f = extract_features(m, imgs, aug, 2);
  CHECK(f.dim(0) == 3);
  CHECK(f.all_finite());
  CHECK(std::equal(f.row(0).begin(), f.row(0).end(), f.row(2).begin()));
}
