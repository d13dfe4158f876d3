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

#ifndef SREID_TESTS_HELPERS_HPP_
#define SREID_TESTS_HELPERS_HPP_

#include <vector>

#include "sreid/model.hpp"
#include "sreid/oracles.hpp"
#include "sreid/rng.hpp"
#include "sreid/tensor.hpp"

namespace sreid::testing {

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Small enough that a forward/backward takes milliseconds.
inline ModelConfig tiny_model_config(std::size_t identities = 4, std::uint64_t seed = 1) {
  ModelConfig m;
  m.backbone.stage_channels = {4, 6, 8, 8};
  m.backbone.input_height = 16;
  m.backbone.input_width = 8;
  m.num_identities = identities;
  m.seed = seed;
  return m;
}

inline std::vector<int> pk_labels(int identities, int instances) {
  std::vector<int> labels;
  for (int p = 0; p < identities; ++p)
    for (int k = 0; k < instances; ++k) labels.push_back(p);
  return labels;
}

// Every parameter value and buffer, in state() order.
inline std::vector<Tensor> snapshot(const Model& model) {
  std::vector<Tensor> out;
  for (const auto& [name, t] : model.state()) out.push_back(*t);
  return out;
}

inline oracle::Vec to_vec(std::span<const double> v) { return {v.begin(), v.end()}; }

inline std::vector<oracle::Vec> rows(const Tensor& x) {
  std::vector<oracle::Vec> out;
  for (std::size_t r = 0; r < x.dim(0); ++r) out.push_back(to_vec(x.row(r)));
  return out;
}

}  // namespace sreid::testing

#endif  // SREID_TESTS_HELPERS_HPP_
