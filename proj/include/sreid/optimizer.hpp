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

#ifndef SREID_OPTIMIZER_HPP_
#define SREID_OPTIMIZER_HPP_

#include <vector>

#include "sreid/layers.hpp"

namespace sreid {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// L2 penalty added to the gradient of parameters with weight_decay set.
  double weight_decay = 5e-4;
};

/// Adam with coupled L2 weight decay.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg);

  void step(double lr);
  std::size_t steps() const { return t_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t t_ = 0;
};

}  // namespace sreid

#endif  // SREID_OPTIMIZER_HPP_
