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
#include <fstream>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "helpers.hpp"
#include "sreid/checkpoint.hpp"
#include "sreid/errors.hpp"
#include "sreid/trainer.hpp"

using namespace sreid;
using testing::random_tensor;

TEST_CASE("learning-rate schedule under the default config") {
  const TrainConfig cfg;
  CHECK(lr_at(0, cfg) == 0.0);
  CHECK(lr_at(5, cfg) == 3.5e-4 / 2);
  CHECK(lr_at(10, cfg) == 3.5e-4);
  CHECK(lr_at(39, cfg) == 3.5e-4);
  CHECK(lr_at(40, cfg) == 3.5e-5);
  CHECK(lr_at(69.9, cfg) == 3.5e-5);
  CHECK(lr_at(70, cfg) == 3.5e-6);
  CHECK(lr_at(119, cfg) == 3.5e-6);
  CHECK(lr_at_step(0, 12, cfg) == 0.0);
  CHECK(lr_at_step(120, 12, cfg) == 3.5e-4);
}

TEST_CASE("proportional schedule") {
  TrainConfig cfg;
  cfg.epochs = 40;
  scale_schedule(cfg);
  CHECK(cfg.warmup_epochs == 3);
  CHECK(cfg.decay_epochs == std::vector<std::size_t>{13, 23});
  cfg.epochs = 120;
  scale_schedule(cfg);
  CHECK(cfg.warmup_epochs == 10);
  CHECK(cfg.decay_epochs == std::vector<std::size_t>{40, 70});
  cfg.epochs = 2;
  scale_schedule(cfg);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("training step") {
  const auto labels = testing::pk_labels(2, 2);
  Rng data_rng(1);
  const Tensor x = random_tensor({4, 3, 16, 8}, data_rng);
  for (BesmMode mode : {BesmMode::kCgram, BesmMode::kGradcam, BesmMode::kRandom, BesmMode::kOff}) {
    Model m(testing::tiny_model_config(2));
    TrainConfig cfg;
    cfg.besm.mode = mode;
    cfg.besm.P = 1.0;
    Trainer trainer(m, cfg);
    const auto before = testing::snapshot(m);
    Rng rng(2);
    const StepResult r = trainer.train_step(x, labels, 1e-3, rng);
    INFO(to_string(mode));
    CHECK(r.losses.finite());
    CHECK(testing::snapshot(m) != before);
    const bool maps = mode == BesmMode::kCgram || mode == BesmMode::kGradcam;
    CHECK(r.backward_passes == (maps ? 2u : 1u));
    CHECK(r.erased_images == (mode == BesmMode::kOff ? 0u : (maps ? 4u : r.erased_images)));
  }
}

TEST_CASE("besm off trains both branches on the same clean images") {
  // With erasing off and no triggers, every loss term sees the clean batch:
  // the ESB terms equal those of an ESB-only clean forward.
  const auto labels = testing::pk_labels(2, 2);
  Rng data_rng(3);
  const Tensor x = random_tensor({4, 3, 16, 8}, data_rng);
  Model m(testing::tiny_model_config(2));
  const Model reference(testing::tiny_model_config(2));
  TrainConfig cfg;
  cfg.besm.mode = BesmMode::kOff;
  Trainer trainer(m, cfg);
  Rng rng(4);
  const StepResult r = trainer.train_step(x, labels, 0.0, rng);
  const Pass clean = reference.forward(x, NormMode::kBatch, true, true);
  const LossBundle expect = two_branch_loss(clean, clean, labels, cfg.triplet, nullptr, nullptr);
  CHECK(r.losses.esb_id == expect.esb_id);
  CHECK(r.losses.esb_triplet == expect.esb_triplet);
  CHECK(r.losses.aib_id == expect.aib_id);
}

TEST_CASE("non-finite loss aborts") {
  Model m(testing::tiny_model_config(2));
  for (Parameter* p : m.parameters()) {
    if (p->name == "aib.classifier.weight") p->value[0] = std::nan("");
  }
  Trainer trainer(m, TrainConfig{});
  Rng rng(5);
  const Tensor x = random_tensor({4, 3, 16, 8}, rng);
  CHECK_THROWS_AS(trainer.train_step(x, testing::pk_labels(2, 2), 1e-3, rng), NumericError);
}

TEST_CASE("probe leaves the model untouched") {
  const Model m(testing::tiny_model_config(2));
  Rng rng(6);
  const Tensor x = random_tensor({4, 3, 16, 8}, rng);
  const auto labels = testing::pk_labels(2, 2);
  const auto before = testing::snapshot(m);
  TrainConfig cfg;
  const ProbeRecord p = erasure_sensitivity_probe(m, x, labels, cfg);
  CHECK(testing::snapshot(m) == before);
  CHECK(p.loss_on_erased != p.loss_on_clean);
  cfg.besm.R = 0.0;
  const ProbeRecord z = erasure_sensitivity_probe(m, x, labels, cfg);
  CHECK(z.loss_on_erased == z.loss_on_clean);
}

TEST_CASE("probe trend") {
  std::vector<ProbeRecord> r;
  for (std::size_t e = 0; e < 8; ++e) r.push_back({e, 1.0 + 0.1 * static_cast<double>(e), 1.0});
  const ProbeTrend t = probe_trend(r);
  CHECK(t.first_quarter == doctest::Approx(0.05));
  CHECK(t.last_quarter == doctest::Approx(0.65));
  CHECK(t.rise() > 0);
}

namespace {

TrainData small_data(const std::filesystem::path& root) {
  generate_synthetic(testing::small_spec(), root);
  const Dataset d = ingest_directory(root);
  TrainData td;
  td.augment.height = 16;
  td.augment.width = 8;
  td.images = load_images(d.train, 16, 8);
  td.labels = contiguous_labels(d.train, &td.num_identities);
  td.query = d.query;
  td.gallery = d.gallery;
  td.query_images = load_images(d.query, 16, 8);
  td.gallery_images = load_images(d.gallery, 16, 8);
  return td;
}

TrainConfig small_train_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  scale_schedule(cfg);
  cfg.base_lr = 1e-3;
  cfg.sampler = {3, 2};
  cfg.checkpoint_every = 2;
  return cfg;
}

}  // namespace

TEST_CASE("fit is reproducible and round-trips through checkpoints") {
  testing::TempDir dir("fit");
  const TrainData data = small_data(dir.path() / "data");
  const TrainConfig cfg = small_train_config();
  ModelConfig mc = testing::tiny_model_config(data.num_identities, 3);

  Model a(mc), b(mc);
  FitOptions opt;
  opt.run_dir = dir.path() / "run";
  opt.config_echo = {{"note", "test"}};
  const FitResult ra = fit(a, data, cfg, opt);
  const FitResult rb = fit(b, data, cfg, {});
  REQUIRE(ra.step_losses.size() == rb.step_losses.size());
  CHECK(ra.step_losses.back().total == rb.step_losses.back().total);
  CHECK(ra.eval->mAP == rb.eval->mAP);
  CHECK(ra.min_backward_per_step == 2);
  CHECK(ra.max_backward_per_step == 2);

  for (const char* f : {"config.json", "metrics.csv", "probe.csv", "eval.json",
                        "checkpoints/epoch_0002.ckpt", "checkpoints/final.ckpt",
                        "checkpoints/best.ckpt"}) {
    CHECK(std::filesystem::exists(opt.run_dir / f));
  }
  const auto probes = read_probe_csv(opt.run_dir / "probe.csv");
  CHECK(probes.size() == cfg.epochs);
  std::ifstream metrics(opt.run_dir / "metrics.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(metrics, line);) ++lines;
  CHECK(lines == ra.steps + 1);

  Model c(mc);
  restore(c, load_checkpoint(opt.run_dir / "checkpoints/final.ckpt"));
  CHECK(testing::snapshot(c) == testing::snapshot(a));
  const EvalResult re = evaluate(c, data.query, data.query_images, data.gallery,
                                 data.gallery_images, data.augment, 50);
  CHECK(re.mAP == ra.eval->mAP);
  CHECK(re.cmc == ra.eval->cmc);
}

TEST_CASE("fit rejects bad configs") {
  testing::TempDir dir("fit_bad");
  const TrainData data = small_data(dir.path());
  Model m(testing::tiny_model_config(data.num_identities));
  TrainConfig cfg = small_train_config();
  cfg.sampler = {16, 4};
  CHECK_THROWS_AS(fit(m, data, cfg, {}), DataError);
  cfg = small_train_config();
  cfg.besm.layer = "nowhere";
  CHECK_THROWS_AS(fit(m, data, cfg, {}), ConfigError);
  cfg = small_train_config();
  cfg.optimizer = "sgd";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
