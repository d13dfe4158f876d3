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

#ifndef SREID_LOSSES_HPP_
#define SREID_LOSSES_HPP_

#include <span>

#include "sreid/tensor.hpp"

namespace sreid {

/// The four terms of the two-branch objective and their unweighted sum.
struct LossBundle {
  double esb_id = 0.0;
  double esb_triplet = 0.0;
  double aib_id = 0.0;
  double aib_triplet = 0.0;
  double total = 0.0;

  static LossBundle of(double esb_id, double esb_triplet, double aib_id, double aib_triplet);
  bool finite() const;
};

struct TripletConfig {
  double margin = 0.3;
  void validate() const;
};

/// A loss value and its gradient with respect to the loss input.
struct LossGrad {
  double value = 0.0;
  Tensor grad;
};

/// Mean softmax cross-entropy of (N, C) logits.
LossGrad id_loss_grad(const Tensor& logits, std::span<const int> labels);
double id_loss(const Tensor& logits, std::span<const int> labels);

/// Batch-hard triplet loss on Euclidean distances of (N, D) embeddings:
/// mean over anchors of max(0, margin + max_pos d - min_neg d).
/// Requires every label at least twice and at least two distinct labels.
LossGrad batch_hard_triplet_grad(const Tensor& embeddings, std::span<const int> labels,
                                 const TripletConfig& cfg);
double batch_hard_triplet(const Tensor& embeddings, std::span<const int> labels,
                          const TripletConfig& cfg);

/// Throws ContractViolation unless the labels satisfy the identity-balanced
/// sampler contract (>= 2 distinct labels, each occurring >= 2 times).
void check_sampler_contract(std::span<const int> labels);

}  // namespace sreid

#endif  // SREID_LOSSES_HPP_
