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

#ifndef SREID_SALIENCY_HPP_
#define SREID_SALIENCY_HPP_

#include <optional>
#include <span>
#include <vector>

#include "sreid/model.hpp"
#include "sreid/tensor.hpp"

namespace sreid {

/// Nonnegative spatial importance map at layer resolution, optionally with
/// its bilinear resize to image resolution.
struct SalientMap {
  Tensor values;                 // (h, w)
  std::optional<Tensor> resized;  // (H, W)

  double mass() const;
  double min() const;
};

/// Cosine of the angle between two descriptors; both must be nonzero.
double cosine_score(std::span<const double> f_q, std::span<const double> f_g);
/// dS/df_q of cosine_score.
std::vector<double> cosine_score_grad(std::span<const double> f_q,
                                      std::span<const double> f_g);

/// Anything that maps an image batch to descriptors and logits through a
/// tapped activation and can pull gradients back to that activation.
/// Implementations keep the state of the most recent forward(); callers
/// hold exclusive access between forward() and the backward call.
class TappedNetwork {
 public:
  struct Output {
    Tensor tapped;       // (N, C, h, w)
    Tensor descriptors;  // (N, D)
    Tensor logits;       // (N, num_classes)
  };

  virtual ~TappedNetwork() = default;
  virtual Output forward(const Tensor& images) = 0;
  /// Gradient of sum_n <g[n], descriptors[n]> with respect to the tapped maps.
  virtual Tensor descriptor_backward(const Tensor& g) = 0;
  /// Gradient of sum_n <g[n], logits[n]> with respect to the tapped maps.
  virtual Tensor logit_backward(const Tensor& g) = 0;
};

/// Which embedding a ModelTap exposes as "the descriptor".
enum class Readout {
  kRetrieval,     // [normalize(AIB neck) | normalize(ESB neck)], single view
  kEsbEmbedding,  // ESB pre-bottleneck embedding (training-time pairing)
};

/// TappedNetwork view of a Model. Never modifies the model; each backward
/// counts as one backward pass on the model's counter.
class ModelTap : public TappedNetwork {
 public:
  ModelTap(const Model& model, TapId tap, Readout readout, NormMode mode);

  Output forward(const Tensor& images) override;
  Tensor descriptor_backward(const Tensor& g) override;
  Tensor logit_backward(const Tensor& g) override;

  /// The pass recorded by the last forward().
  const Pass& pass() const { return *pass_; }

 private:
  const Model& model_;
  TapId tap_;
  Readout readout_;
  NormMode mode_;
  std::optional<Pass> pass_;
};

/// Ranking activation map of one image: M_ij = ReLU(sum_k phi^k_ij A^k_ij), inputs (C, h, w).
Tensor weighted_activation_map(const Tensor& tapped, const Tensor& phi);

struct CgRamResult {
  double score = 0.0;  // cosine confidence of the pair
  SalientMap map;      // query-side map at tap resolution
};

/// Confidence-gradient ranking activation map of the query image for a
/// query/gallery pair. Needs no identity labels.
CgRamResult cg_ram(TappedNetwork& net, const Tensor& query_image,
                   const Tensor& gallery_image);

/// Grad-CAM baseline: channel weights are the spatially averaged gradients
/// of the target logit.
SalientMap grad_cam(TappedNetwork& net, const Tensor& image, int target_identity);
/// Grad-CAM for a batch with one backward pass of sum_n logit[n, target[n]].
std::vector<SalientMap> grad_cam_batch(TappedNetwork& net, const Tensor& images,
                                       std::span<const int> targets);

/// Bilinear resize (half-pixel centers, edge clamped) of `map.values`.
/// The result is stored in `resized` of the returned copy.
SalientMap resize_map(const SalientMap& map, std::size_t height, std::size_t width);
Tensor resize_bilinear(const Tensor& plane, std::size_t height, std::size_t width);

/// Heat overlay: map normalized by its max, colored black-red-yellow-white,
/// alpha-blended at 0.5 onto a (3, H, W) image with values in [0, 1].
Tensor overlay(const Tensor& image, const Tensor& resized_map);

}  // namespace sreid

#endif  // SREID_SALIENCY_HPP_
