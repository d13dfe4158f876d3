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

#ifndef SREID_DATA_HPP_
#define SREID_DATA_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sreid/image.hpp"
#include "sreid/rng.hpp"
#include "sreid/tensor.hpp"

namespace sreid {

enum class Split { kTrain, kQuery, kGallery };
std::string_view to_string(Split split);

struct ReidSample {
  std::filesystem::path path;
  int pid = 0;
  int cam = 0;
  Split split = Split::kTrain;
};

/// Parses "<pid>_c<cam>_<rest>.<png|jpg|jpeg>"; nullopt when malformed.
std::optional<ReidSample> parse_sample_name(const std::filesystem::path& path, Split split);

struct Dataset {
  std::filesystem::path root;
  std::vector<ReidSample> train;
  std::vector<ReidSample> query;
  std::vector<ReidSample> gallery;
  std::vector<std::string> warnings;  // one per excluded file
};

/// Reads root/{train,query,gallery}. Files are visited in name order.
/// Malformed names are excluded with a warning; a missing or empty split
/// throws DataError.
Dataset ingest_directory(const std::filesystem::path& root);

/// Procedural pedestrian-like sprites. Each identity has body colors, a
/// torso pattern and one accessory; `dominance` trades body-color contrast
/// for a larger, more saturated accessory, which then becomes the salient
/// cue. Cameras differ in background, brightness and blur.
struct SynthSpec {
  int train_identities = 20;
  int eval_identities = 10;
  int images_per_identity = 8;
  int queries_per_identity = 2;  // eval identities only; the rest go to the gallery
  int cameras = 4;
  std::size_t height = 64;
  std::size_t width = 32;
  double dominance = 0.5;          // in [0, 1]
  double accessory_dropout = 0.0;  // chance an image hides the accessory
  double brightness_jitter = 0.15;
  int max_blur = 1;    // box-blur radius upper bound per camera
  int shift_jitter = 2;  // pixels
  double noise = 0.02;
  std::uint64_t seed = 7;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthSpec from_json(const nlohmann::json& j);
};

struct SynthSummary {
  std::size_t train = 0;
  std::size_t query = 0;
  std::size_t gallery = 0;
};

/// Writes train/, query/, gallery/ and manifest.json (the spec and a CRC-32
/// per file) under `out_dir`. Throws ConfigError when infeasible.
SynthSummary generate_synthetic(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Renders one sprite; exposed for tests.
Image render_sprite(const SynthSpec& spec, int pid, int image_index, int cam);

struct SamplerConfig {
  std::size_t J = 16;
  std::size_t K = 4;
  void validate() const;
};

struct Batch {
  std::vector<std::size_t> indices;  // into the sample list
  std::vector<int> labels;           // contiguous training labels
};

/// Identity-balanced sampler. Each epoch every identity's images are
/// shuffled and cut into groups of K (identities with fewer than K images
/// are topped up by drawing with replacement); batches take one group from
/// each of J distinct identities until fewer than J identities have groups
/// left.
class PkSampler {
 public:
  PkSampler(std::vector<int> labels, SamplerConfig cfg, std::uint64_t seed);

  std::vector<Batch> epoch(std::size_t index) const;
  std::size_t num_identities() const { return by_label_.size(); }

 private:
  std::vector<int> labels_;
  SamplerConfig cfg_;
  std::uint64_t seed_;
  std::vector<std::vector<std::size_t>> by_label_;
};

/// Maps sorted distinct pids to 0..n-1.
std::vector<int> contiguous_labels(const std::vector<ReidSample>& samples,
                                   std::size_t* num_identities = nullptr);

enum class AugmentMode { kTrain, kTest };

struct AugmentConfig {
  std::size_t height = 384;
  std::size_t width = 128;
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> std{0.229, 0.224, 0.225};
  double flip_probability = 0.5;

  static AugmentConfig person() { return {}; }
  static AugmentConfig vehicle() {
    AugmentConfig c;
    c.height = 256;
    c.width = 256;
    return c;
  }
  void validate() const;
};

/// Resize, random horizontal flip (train only), channel normalization.
/// Input is (3, H, W) in [0, 1]. Train mode always consumes one draw.
Tensor augment(const Tensor& image01, Rng& rng, AugmentMode mode, const AugmentConfig& cfg);
Tensor augment(const Image& image, Rng& rng, AugmentMode mode, const AugmentConfig& cfg);
/// Inverse of the normalization, for rendering.
Tensor denormalize(const Tensor& chw, const AugmentConfig& cfg);

/// Decoded images of a split resized to the model input, values in [0, 1].
std::vector<Tensor> load_images(const std::vector<ReidSample>& samples, std::size_t height,
                                std::size_t width);

/// Test-mode batch of the given images.
Tensor make_test_batch(const std::vector<Tensor>& images, std::span<const std::size_t> indices,
                       const AugmentConfig& cfg);
/// Train-mode batch; flips draw from `rng` in index order.
Tensor make_train_batch(const std::vector<Tensor>& images, std::span<const std::size_t> indices,
                        const AugmentConfig& cfg, Rng& rng);

}  // namespace sreid

#endif  // SREID_DATA_HPP_
