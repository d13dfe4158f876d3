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

#ifndef SREID_BESM_HPP_
#define SREID_BESM_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sreid/model.hpp"
#include "sreid/rng.hpp"
#include "sreid/saliency.hpp"
#include "sreid/tensor.hpp"

namespace sreid {

/// Where the erasing maps of a training step come from.
enum class BesmMode {
  kCgram,    // batch confidence-score gradients
  kGradcam,  // classification gradients of the ground-truth identity
  kRandom,   // random rectangle erasing, no maps
  kOff,      // ESB trains on clean images
};
BesmMode parse_besm_mode(std::string_view name);
std::string_view to_string(BesmMode mode);

struct RandomErasingParams {
  double p = 0.5;
  double area_min = 0.02;
  double area_max = 0.4;
  double aspect_min = 0.3;  // aspect drawn log-uniformly in [aspect_min, 1/aspect_min]
  double value = 0.0;

  void validate() const;
};

struct BesmConfig {
  double R = 0.1;
  double P = 0.3;
  std::string layer = "esb.final";
  BesmMode mode = BesmMode::kCgram;
  /// Compute maps even when no image of the batch is triggered.
  bool maps_every_step = true;
  RandomErasingParams random;

  void validate() const;
};

/// Easiest-positive pairing of a batch and its aggregate score.
struct BatchPairing {
  std::vector<std::size_t> positive;  // p(i)
  std::vector<double> score;          // S_i
  std::vector<double> weight;         // e^{S_i}, held constant
  double batch_score = 0.0;           // sum_i e^{S_i} S_i
};

/// For each i, the same-label j != i with the smallest cosine distance;
/// ties go to the smaller index.
std::vector<std::size_t> easiest_positive(const Tensor& embeddings,
                                          std::span<const int> labels);
/// sum_i e^{S_i} S_i.
double batch_score(std::span<const double> scores);
BatchPairing pair_batch(const Tensor& embeddings, std::span<const int> labels);
/// dS_batch / d embeddings with the e^{S_i} weights detached.
Tensor batch_score_grad(const Tensor& embeddings, const BatchPairing& pairing);

/// Per-image maps of S_batch at `tap`, from an existing pass that ran the
/// ESB. One counted backward pass; parameters are untouched.
std::vector<SalientMap> batch_salient_maps(const Model& model, const Pass& pass, TapId tap,
                                           std::span<const int> labels);
/// Convenience form: runs the forward itself.
std::vector<SalientMap> batch_salient_maps(const Model& model, const Tensor& images,
                                           std::span<const int> labels,
                                           const BesmConfig& cfg, NormMode mode);
/// Grad-CAM maps for the erasing ablation: one backward of the summed
/// ground-truth logits of the ESB classifier.
std::vector<SalientMap> gradcam_batch_maps(const Model& model, const Pass& pass, TapId tap,
                                           std::span<const int> labels);

struct EraseResult {
  Tensor images;
  std::vector<bool> triggered;
  /// Erased pixel positions per image, row-major indices, ascending.
  std::vector<std::vector<std::size_t>> masks;

  std::size_t triggered_count() const;
};

/// ceil(R * H * W) with products that land within 1e-9 of an integer
/// rounded to it, so that e.g. 0.1 * 30 counts 3 pixels rather than 4.
/// Throws ConfigError when the count would cover the whole image.
std::size_t erase_count(double ratio, std::size_t height, std::size_t width);

/// One Bernoulli(P) draw per image.
std::vector<bool> draw_triggers(std::size_t count, double probability, Rng& rng);

/// Positions of the `n` largest values, ties broken by row-major order.
std::vector<std::size_t> top_positions(const Tensor& plane, std::size_t n);

/// Zeroes the top ceil(R*H*W) map positions (all channels) of every
/// triggered image. Maps are resized to the image size when needed.
EraseResult erase_salient(const Tensor& images, std::span<const SalientMap> maps,
                          const std::vector<bool>& triggered, double ratio);
/// Draws the per-image triggers from `rng`, then erases.
EraseResult erase(const Tensor& images, std::span<const SalientMap> maps,
                  const BesmConfig& cfg, Rng& rng);

/// Random rectangle erasing baseline.
EraseResult random_erasing(const Tensor& images, Rng& rng, const RandomErasingParams& params);

}  // namespace sreid

#endif  // SREID_BESM_HPP_
