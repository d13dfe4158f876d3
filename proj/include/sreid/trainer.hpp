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

#ifndef SREID_TRAINER_HPP_
#define SREID_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sreid/besm.hpp"
#include "sreid/data.hpp"
#include "sreid/eval.hpp"
#include "sreid/losses.hpp"
#include "sreid/model.hpp"
#include "sreid/optimizer.hpp"

namespace sreid {

struct TrainConfig {
  std::size_t epochs = 120;
  double base_lr = 3.5e-4;
  std::size_t warmup_epochs = 10;
  std::vector<std::size_t> decay_epochs{40, 70};
  double decay_factor = 0.1;
  double weight_decay = 5e-4;
  std::string optimizer = "adam";
  TripletConfig triplet;
  BesmConfig besm;
  SamplerConfig sampler;
  std::uint64_t seed = 7;
  std::size_t checkpoint_every = 10;  // 0 disables periodic checkpoints
  bool probe = true;

  void validate() const;
};

/// Warmup epochs and decay points scaled from the 120-epoch reference
/// schedule (10 / 40 / 70) to `epochs`.
void scale_schedule(TrainConfig& cfg);

/// Learning rate at a fractional epoch: linear from 0 over the warmup, then
/// base_lr divided by (1/decay_factor)^n after n decay points have passed.
double lr_at(double epoch, const TrainConfig& cfg);
double lr_at_step(std::size_t step, std::size_t steps_per_epoch, const TrainConfig& cfg);

struct StepResult {
  LossBundle losses;
  std::size_t backward_passes = 0;
  std::size_t erased_images = 0;
};

struct ProbeRecord {
  std::size_t epoch = 0;
  double loss_on_erased = 0.0;
  double loss_on_clean = 0.0;
};

/// Mean of loss_on_erased - loss_on_clean over the first and the last
/// quarter of the epochs (at least one epoch each).
struct ProbeTrend {
  std::size_t epochs = 0;
  double first_quarter = 0.0;
  double last_quarter = 0.0;
  double rise() const { return last_quarter - first_quarter; }
};
ProbeTrend probe_trend(std::span<const ProbeRecord> records);
std::vector<ProbeRecord> read_probe_csv(const std::filesystem::path& path);

/// The four loss terms, AIB terms from `aib_pass` and ESB terms from
/// `esb_pass`. Head gradients are filled when the pointers are non-null.
LossBundle two_branch_loss(const Pass& aib_pass, const Pass& esb_pass, std::span<const int> labels,
                           const TripletConfig& triplet, HeadGrad* aib_grad, HeadGrad* esb_grad);

/// Loss of the batch before and after erasing the top-R salient pixels of
/// every image. Both passes use batch statistics; the model is not changed.
ProbeRecord erasure_sensitivity_probe(const Model& model, const Tensor& images,
                                      std::span<const int> labels, const TrainConfig& cfg);

/// Owns the optimizer and runs single training steps on a model.
class Trainer {
 public:
  Trainer(Model& model, TrainConfig cfg);

  /// Clean forward (stem + AIB + ESB), erasing maps, erased forward through
  /// stem + ESB, four-term loss, one parameter backward, one optimizer step.
  /// `rng` drives the erase triggers. Throws NumericError on a non-finite
  /// loss.
  StepResult train_step(const Tensor& images, std::span<const int> labels, double lr, Rng& rng);

  const TrainConfig& config() const { return cfg_; }
  Model& model() { return model_; }

 private:
  Model& model_;
  TrainConfig cfg_;
  Adam optimizer_;
  TapId tap_;
};

/// Images and labels of the training split plus optional evaluation splits.
struct TrainData {
  std::vector<Tensor> images;  // (3, H, W) in [0, 1], model input size
  std::vector<int> labels;     // contiguous
  std::size_t num_identities = 0;
  AugmentConfig augment;

  std::vector<ReidSample> query;
  std::vector<Tensor> query_images;
  std::vector<ReidSample> gallery;
  std::vector<Tensor> gallery_images;
  bool has_eval() const { return !query.empty() && !gallery.empty(); }
};

struct FitResult {
  std::vector<LossBundle> step_losses;
  std::vector<ProbeRecord> probes;
  std::optional<EvalResult> eval;
  std::size_t steps = 0;
  std::size_t max_backward_per_step = 0;
  std::size_t min_backward_per_step = 0;
};

struct FitOptions {
  /// Run directory; empty keeps everything in memory.
  std::filesystem::path run_dir;
  /// Echoed into run_dir/config.json and every checkpoint.
  nlohmann::json config_echo;
  std::size_t rank_max = 50;
  std::function<void(std::size_t epoch, const LossBundle& last)> on_epoch;
};

/// Full training run. Writes metrics.csv, probe.csv, checkpoints/ and
/// eval.json under the run directory when one is given.
FitResult fit(Model& model, const TrainData& data, const TrainConfig& cfg,
              const FitOptions& options);

}  // namespace sreid

#endif  // SREID_TRAINER_HPP_
