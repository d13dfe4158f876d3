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

#ifndef SREID_MODEL_HPP_
#define SREID_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sreid/layers.hpp"
#include "sreid/pooling.hpp"
#include "sreid/tensor.hpp"

namespace sreid {

enum class Branch { kAib, kEsb };
std::string_view to_string(Branch branch);

/// Small convolutional backbone. Every stage is `convs_per_stage` units of
/// conv3x3 -> batch norm -> ReLU; the first conv of a stage downsamples by 2,
/// except in the last stage, which uses `last_stage_stride`.
struct BackboneConfig {
  std::vector<std::size_t> stage_channels{32, 64, 128, 256};
  std::size_t stem_stages = 2;
  std::size_t convs_per_stage = 1;
  std::size_t input_height = 384;
  std::size_t input_width = 128;
  std::size_t last_stage_stride = 1;

  void validate() const;
  std::size_t stage_stride(std::size_t stage) const;
  /// Spatial size (h, w) of the output of `stage`.
  std::pair<std::size_t, std::size_t> stage_extent(std::size_t stage) const;
};

struct BranchHead {
  PoolingMode pooling = PoolingMode::kGap;
  bool bn_neck = true;
};

struct ModelConfig {
  BackboneConfig backbone;
  BranchHead aib{PoolingMode::kGap};
  BranchHead esb{PoolingMode::kPPool};
  PPoolingLayer ppool;  // initial exponent and clamp range for P-pooling heads
  std::size_t num_identities = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A named layer output that can be captured and differentiated against.
/// Names are "stem.stage<i>", "aib.stage<i>", "esb.stage<i>" (1-based over
/// the whole backbone) plus the aliases "aib.final" and "esb.final".
struct TapId {
  enum class Scope { kStem, kAib, kEsb };
  Scope scope = Scope::kEsb;
  std::size_t stage = 0;  // 0-based index over the whole backbone
  friend bool operator==(const TapId&, const TapId&) = default;
};

/// Normalization statistics used by a forward pass.
enum class NormMode {
  kEval,   // running statistics; samples are independent
  kBatch,  // batch statistics (training)
};

struct UnitTrace {
  Tensor input;
  Tensor output;  // post-ReLU
  BatchNorm::Cache bn;
};

struct StageTrace {
  std::vector<UnitTrace> units;
  const Tensor& output() const { return units.back().output; }
};

struct HeadTrace {
  Tensor feature_map;  // pooling input = output of the last branch stage
  Tensor pooled;       // (N, D) pre-bottleneck embedding, triplet-loss input
  Tensor neck;         // (N, D) post-bottleneck embedding, retrieval descriptor
  Tensor logits;       // (N, num_identities)
  BatchNorm::Cache neck_cache;
};

struct BranchTrace {
  std::vector<StageTrace> stages;
  HeadTrace head;
};

/// Everything recorded by one forward of an image batch through the shared
/// stem and one or both branches. Backward passes consume it.
struct Pass {
  NormMode mode = NormMode::kEval;
  std::vector<StageTrace> stem;
  std::optional<BranchTrace> aib;
  std::optional<BranchTrace> esb;

  const Tensor& stem_output() const { return stem.back().output(); }
  const BranchTrace& branch(Branch b) const;
  const HeadTrace& head(Branch b) const { return branch(b).head; }
  std::size_t batch() const { return stem_output().dim(0); }
};

/// Upstream gradients arriving at a branch head. Empty tensors mean zero.
struct HeadGrad {
  Tensor pooled;
  Tensor neck;
  Tensor logits;
  bool empty() const { return pooled.empty() && neck.empty() && logits.empty(); }
};

struct PassGrad {
  const Pass* pass = nullptr;
  HeadGrad aib;
  HeadGrad esb;
};

/// Two-branch re-identification network: a shared stem followed by the
/// all-information branch (AIB) and the erasing branch (ESB), each with its
/// own exclusive stages, pooling, batch-norm bottleneck and classifier.
class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::size_t embedding_dim() const { return config_.backbone.stage_channels.back(); }
  std::size_t num_identities() const { return config_.num_identities; }
  /// Number of trainable scalars.
  std::size_t parameter_count() const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  /// Every stem parameter (shared by both branches).
  std::vector<const Parameter*> stem_parameters() const;
  /// Parameters owned exclusively by one branch.
  std::vector<const Parameter*> branch_parameters(Branch b) const;
  /// Learnable parameters plus batch-norm running statistics, in a fixed
  /// order with unique names. Checkpoints serialize exactly this list.
  std::vector<std::pair<std::string, Tensor*>> state();
  std::vector<std::pair<std::string, const Tensor*>> state() const;

  std::vector<std::string> tap_names() const;
  TapId resolve_tap(std::string_view name) const;
  std::string tap_name(TapId tap) const;
  const Tensor& tapped(const Pass& pass, TapId tap) const;

  /// Inference-style forward; never touches running statistics.
  Pass forward(const Tensor& images, NormMode mode, bool with_aib, bool with_esb) const;
  /// Runs one more branch on the stem output already stored in `pass`.
  void add_branch(Pass& pass, Branch b) const;
  /// Training forward: batch statistics, running statistics updated.
  Pass forward_train(const Tensor& images, bool with_aib, bool with_esb);
  void add_branch_train(Pass& pass, Branch b);

  /// Resumes a forward from a tapped activation, returning the trace of the
  /// named branch from the stage after the tap through its head.
  BranchTrace forward_from_tap(TapId tap, const Tensor& activation, Branch b,
                               NormMode mode) const;

  void zero_grad();
  /// One counted backward pass accumulating parameter gradients for every
  /// (pass, head gradients) item. Stem gradients from all items add up.
  void backward(std::span<const PassGrad> items);
  /// One counted backward pass from head gradients down to a tapped
  /// activation. Parameter gradients are left untouched.
  Tensor backward_to_tap(const Pass& pass, TapId tap, const HeadGrad& aib,
                         const HeadGrad& esb) const;

  std::size_t backward_passes() const { return backward_passes_; }
  void reset_backward_counter() { backward_passes_ = 0; }

  bool has_ppool(Branch b) const;
  /// Pooling layer with the current learned exponent.
  PPoolingLayer ppool(Branch b) const;
  /// Clamp every P-pooling exponent into its range.
  void clamp_pooling();

 private:
  struct Unit {
    Conv3x3 conv;
    BatchNorm bn;
  };
  using Stage = std::vector<Unit>;
  struct Head {
    PoolingMode pooling = PoolingMode::kGap;
    PPoolingLayer ppool;
    Parameter exponent;  // shape (1), present for P-pooling heads
    BatchNorm neck;
    Linear classifier;
  };
  struct BranchNet {
    std::vector<Stage> stages;
    Head head;
  };

  const BranchNet& net(Branch b) const { return b == Branch::kAib ? aib_ : esb_; }
  BranchNet& net(Branch b) { return b == Branch::kAib ? aib_ : esb_; }
  PPoolingLayer current_ppool(const Head& head) const;

  Stage make_stage(const std::string& prefix, std::size_t stage, Rng& rng) const;
  Head make_head(const std::string& prefix, const BranchHead& cfg, Rng& rng) const;

  StageTrace run_stage(const Stage& stage, const Tensor& x, NormMode mode) const;
  HeadTrace run_head(const Head& head, const Tensor& fmap, NormMode mode) const;
  BranchTrace run_branch(const BranchNet& b, const Tensor& x, NormMode mode,
                         std::size_t first_stage) const;
  void update_running(Stage& stage, const StageTrace& trace);
  void update_running(BranchNet& b, const BranchTrace& trace);

  // When `accumulate` is set these add into the parameters' grad tensors;
  // that path is only reached from the non-const backward().
  Tensor backward_stage(const Stage& stage, const StageTrace& trace, const Tensor& dy,
                        bool accumulate) const;
  Tensor backward_head(const Head& head, const HeadTrace& trace, const HeadGrad& g,
                       bool accumulate) const;
  /// Backward through a branch down to the output of stage `stop_stage`.
  Tensor backward_branch(const BranchNet& b, const BranchTrace& trace, const HeadGrad& g,
                         std::size_t stop_stage, bool accumulate) const;
  Tensor backward_stem(const Pass& pass, Tensor d_stem_out, std::size_t stop_stage,
                       bool accumulate) const;

  ModelConfig config_;
  std::vector<Stage> stem_;
  BranchNet aib_;
  BranchNet esb_;
  mutable std::size_t backward_passes_ = 0;
};

/// Retrieval descriptor of a batch: per-branch post-bottleneck embeddings,
/// each averaged over the image and its horizontal mirror, L2-normalized,
/// then concatenated [AIB | ESB]. Returns (N, 2D).
Tensor infer_descriptors(const Model& model, const Tensor& images);
/// Descriptor of a single (3, H, W) image.
std::vector<double> infer_descriptor(const Model& model, const Tensor& image);

/// Row-wise L2 normalization of (N, D).
Tensor l2_normalize_rows(const Tensor& x);
/// Vector-Jacobian product of row-wise L2 normalization.
Tensor l2_normalize_rows_backward(const Tensor& x, const Tensor& dy);

}  // namespace sreid

#endif  // SREID_MODEL_HPP_
