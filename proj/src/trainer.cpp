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

#include "sreid/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sreid/checkpoint.hpp"
#include "sreid/errors.hpp"

namespace sreid {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs must be positive");
  if (warmup_epochs >= epochs) throw ConfigError("train.warmup_epochs must be < train.epochs");
  for (std::size_t i = 1; i < decay_epochs.size(); ++i) {
    if (decay_epochs[i] <= decay_epochs[i - 1]) {
      throw ConfigError("train.decay_epochs must be strictly increasing");
    }
  }
  if (!(base_lr > 0.0)) throw ConfigError("train.base_lr must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw ConfigError("train.decay_factor must be in (0, 1]");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be >= 0");
  if (optimizer != "adam") throw ConfigError("train.optimizer: only 'adam' is available");
  triplet.validate();
  besm.validate();
  sampler.validate();
}

void scale_schedule(TrainConfig& cfg) {
  auto at = [&](double reference) {
    return static_cast<std::size_t>(std::lround(reference / 120.0 * static_cast<double>(cfg.epochs)));
  };
  cfg.warmup_epochs = cfg.epochs > 1 ? std::max<std::size_t>(1, at(10)) : 0;
  cfg.decay_epochs = {at(40), at(70)};
  // Very short runs round both points together; keep them distinct.
  cfg.decay_epochs[1] = std::max(cfg.decay_epochs[1], cfg.decay_epochs[0] + 1);
}

double lr_at(double epoch, const TrainConfig& cfg) {
  if (epoch < 0.0) throw InvalidInput("lr_at: negative epoch");
  const auto warm = static_cast<double>(cfg.warmup_epochs);
  if (epoch < warm) return cfg.base_lr * epoch / warm;
  int passed = 0;
  for (std::size_t d : cfg.decay_epochs) {
    if (epoch >= static_cast<double>(d)) ++passed;
  }
  // Dividing by the integral factor keeps 3.5e-4 -> 3.5e-5 -> 3.5e-6 exact in
  // binary floating point; multiplying by 0.1 would not.
  return cfg.base_lr / std::pow(1.0 / cfg.decay_factor, passed);
}

double lr_at_step(std::size_t step, std::size_t steps_per_epoch, const TrainConfig& cfg) {
  if (steps_per_epoch == 0) throw InvalidInput("lr_at_step: zero steps per epoch");
  return lr_at(static_cast<double>(step) / static_cast<double>(steps_per_epoch), cfg);
}

LossBundle two_branch_loss(const Pass& aib_pass, const Pass& esb_pass, std::span<const int> labels,
                           const TripletConfig& triplet, HeadGrad* aib_grad, HeadGrad* esb_grad) {
  const HeadTrace& a = aib_pass.head(Branch::kAib);
  const HeadTrace& e = esb_pass.head(Branch::kEsb);
  LossGrad a_id = id_loss_grad(a.logits, labels);
  LossGrad a_tr = batch_hard_triplet_grad(a.pooled, labels, triplet);
  LossGrad e_id = id_loss_grad(e.logits, labels);
  LossGrad e_tr = batch_hard_triplet_grad(e.pooled, labels, triplet);
  if (aib_grad) {
    aib_grad->logits = std::move(a_id.grad);
    aib_grad->pooled = std::move(a_tr.grad);
  }
  if (esb_grad) {
    esb_grad->logits = std::move(e_id.grad);
    esb_grad->pooled = std::move(e_tr.grad);
  }
  return LossBundle::of(e_id.value, e_tr.value, a_id.value, a_tr.value);
}

ProbeRecord erasure_sensitivity_probe(const Model& model, const Tensor& images,
                                      std::span<const int> labels, const TrainConfig& cfg) {
  ProbeRecord rec;
  const Pass clean = model.forward(images, NormMode::kBatch, true, true);
  rec.loss_on_clean =
      two_branch_loss(clean, clean, labels, cfg.triplet, nullptr, nullptr).total;
  const std::size_t h = images.dim(2);
  const std::size_t w = images.dim(3);
  if (erase_count(cfg.besm.R, h, w) == 0) {
    rec.loss_on_erased = rec.loss_on_clean;
    return rec;
  }
  const TapId tap = model.resolve_tap(cfg.besm.layer);
  const std::vector<SalientMap> maps = batch_salient_maps(model, clean, tap, labels);
  const std::vector<bool> all(labels.size(), true);
  const EraseResult erased = erase_salient(images, maps, all, cfg.besm.R);
  const Pass after = model.forward(erased.images, NormMode::kBatch, true, true);
  rec.loss_on_erased =
      two_branch_loss(after, after, labels, cfg.triplet, nullptr, nullptr).total;
  return rec;
}

Trainer::Trainer(Model& model, TrainConfig cfg)
    : model_(model),
      cfg_(std::move(cfg)),
      optimizer_(model.parameters(), AdamConfig{0.9, 0.999, 1e-8, cfg_.weight_decay}),
      tap_(model.resolve_tap(cfg_.besm.layer)) {
  cfg_.validate();
}

namespace {

std::string describe(const LossBundle& l) {
  std::ostringstream os;
  os << "L_total=" << l.total << " esb_id=" << l.esb_id << " esb_triplet=" << l.esb_triplet
     << " aib_id=" << l.aib_id << " aib_triplet=" << l.aib_triplet;
  return os.str();
}

}  // namespace

StepResult Trainer::train_step(const Tensor& images, std::span<const int> labels, double lr,
                               Rng& rng) {
  check_sampler_contract(labels);
  const std::size_t before = model_.backward_passes();
  const BesmMode mode = cfg_.besm.mode;
  StepResult result;

  Pass clean;
  std::optional<Pass> erased_pass;
  if (mode == BesmMode::kOff) {
    clean = model_.forward_train(images, true, true);
  } else {
    clean = model_.forward_train(images, true, false);
    EraseResult erased;
    if (mode == BesmMode::kRandom) {
      erased = random_erasing(images, rng, cfg_.besm.random);
    } else {
      const std::vector<bool> triggers = draw_triggers(labels.size(), cfg_.besm.P, rng);
      const bool any = std::find(triggers.begin(), triggers.end(), true) != triggers.end();
      if (cfg_.besm.maps_every_step || any) {
        // Batch statistics without touching the running ones: the ESB's
        // running statistics follow the erased images it trains on.
        model_.add_branch(clean, Branch::kEsb);
        const std::vector<SalientMap> maps =
            mode == BesmMode::kCgram ? batch_salient_maps(model_, clean, tap_, labels)
                                     : gradcam_batch_maps(model_, clean, tap_, labels);
        clean.esb.reset();
        erased = erase_salient(images, maps, triggers, cfg_.besm.R);
      } else {
        erased = EraseResult{images, triggers, std::vector<std::vector<std::size_t>>(labels.size())};
      }
    }
    result.erased_images = erased.triggered_count();
    erased_pass = model_.forward_train(erased.images, false, true);
  }

  HeadGrad aib_grad;
  HeadGrad esb_grad;
  const Pass& esb_source = erased_pass ? *erased_pass : clean;
  result.losses = two_branch_loss(clean, esb_source, labels, cfg_.triplet, &aib_grad, &esb_grad);
  if (!result.losses.finite()) {
    throw NumericError("non-finite loss: " + describe(result.losses));
  }

  model_.zero_grad();
  if (erased_pass) {
    const PassGrad items[] = {{&clean, std::move(aib_grad), {}},
                              {&*erased_pass, {}, std::move(esb_grad)}};
    model_.backward(items);
  } else {
    const PassGrad items[] = {{&clean, std::move(aib_grad), std::move(esb_grad)}};
    model_.backward(items);
  }
  optimizer_.step(lr);
  model_.clamp_pooling();
  result.backward_passes = model_.backward_passes() - before;
  return result;
}

namespace {

std::string checkpoint_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%04zu.ckpt", epoch);
  return buf;
}

}  // namespace

FitResult fit(Model& model, const TrainData& data, const TrainConfig& cfg,
              const FitOptions& options) {
  cfg.validate();
  if (data.images.size() != data.labels.size() || data.images.empty()) {
    throw DataError("training split is empty or inconsistent");
  }
  const PkSampler sampler(data.labels, cfg.sampler, cfg.seed);
  Trainer trainer(model, cfg);

  const bool to_disk = !options.run_dir.empty();
  std::ofstream metrics;
  std::ofstream probe_csv;
  if (to_disk) {
    fs::create_directories(options.run_dir / "checkpoints");
    std::ofstream(options.run_dir / "config.json") << options.config_echo.dump(2) << '\n';
    metrics.open(options.run_dir / "metrics.csv");
    metrics << "step,epoch,lr,L_total,L_esb_id,L_esb_triplet,L_aib_id,L_aib_triplet,"
               "backward_passes,erased_images\n";
    metrics.precision(17);
    probe_csv.open(options.run_dir / "probe.csv");
    probe_csv << "epoch,loss_on_erased,loss_on_clean\n";
    probe_csv.precision(17);
  }

  // The probe batch is drawn once from its own stream and never augmented.
  Tensor probe_images;
  std::vector<int> probe_labels;
  if (cfg.probe) {
    const PkSampler probe_sampler(data.labels, cfg.sampler,
                                  Rng::stream(cfg.seed, "probe").next_u64());
    const Batch b = probe_sampler.epoch(0).at(0);
    probe_images = make_test_batch(data.images, b.indices, data.augment);
    probe_labels = b.labels;
  }

  auto meta = [&](std::size_t epoch, std::size_t step) {
    return nlohmann::json{{"config", options.config_echo},
                          {"epoch", epoch},
                          {"num_identities", model.num_identities()},
                          {"rng", {{"seed", cfg.seed}, {"next_step", step}}}};
  };

  FitResult result;
  result.min_backward_per_step = std::numeric_limits<std::size_t>::max();
  double best_probe = std::numeric_limits<double>::infinity();
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<Batch> batches = sampler.epoch(epoch);
    if (batches.empty()) throw DataError("sampler produced no batch");
    LossBundle last;
    for (std::size_t b = 0; b < batches.size(); ++b, ++step) {
      Rng aug_rng = Rng::stream(cfg.seed, "augment", step);
      Rng besm_rng = Rng::stream(cfg.seed, "besm", step);
      const Tensor images = make_train_batch(data.images, batches[b].indices, data.augment, aug_rng);
      const double lr = lr_at(static_cast<double>(epoch) +
                                  static_cast<double>(b) / static_cast<double>(batches.size()),
                              cfg);
      StepResult r;
      try {
        r = trainer.train_step(images, batches[b].labels, lr, besm_rng);
      } catch (const NumericError& e) {
        if (to_disk) {
          std::ofstream(options.run_dir / "diagnostic.json")
              << nlohmann::json{{"step", step}, {"epoch", epoch}, {"lr", lr},
                                {"error", e.what()}}.dump(2)
              << '\n';
        }
        throw;
      }
      last = r.losses;
      result.step_losses.push_back(r.losses);
      result.max_backward_per_step = std::max(result.max_backward_per_step, r.backward_passes);
      result.min_backward_per_step = std::min(result.min_backward_per_step, r.backward_passes);
      if (to_disk) {
        metrics << step << ',' << epoch << ',' << lr << ',' << r.losses.total << ','
                << r.losses.esb_id << ',' << r.losses.esb_triplet << ',' << r.losses.aib_id << ','
                << r.losses.aib_triplet << ',' << r.backward_passes << ',' << r.erased_images
                << '\n';
      }
    }
    if (cfg.probe) {
      ProbeRecord rec = erasure_sensitivity_probe(model, probe_images, probe_labels, cfg);
      rec.epoch = epoch;
      result.probes.push_back(rec);
      if (to_disk) {
        probe_csv << rec.epoch << ',' << rec.loss_on_erased << ',' << rec.loss_on_clean << '\n';
        if (rec.loss_on_erased < best_probe) {
          best_probe = rec.loss_on_erased;
          save_checkpoint(options.run_dir / "checkpoints" / "best.ckpt", model, meta(epoch + 1, step));
        }
      }
    }
    if (to_disk && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
      save_checkpoint(options.run_dir / "checkpoints" / checkpoint_name(epoch + 1), model,
                      meta(epoch + 1, step));
    }
    if (options.on_epoch) options.on_epoch(epoch, last);
  }
  result.steps = step;
  if (to_disk) {
    save_checkpoint(options.run_dir / "checkpoints" / "final.ckpt", model, meta(cfg.epochs, step));
  }
  if (data.has_eval()) {
    result.eval = evaluate(model, data.query, data.query_images, data.gallery, data.gallery_images,
                           data.augment, options.rank_max);
    if (to_disk) write_eval(*result.eval, options.run_dir);
  }
  return result;
}

ProbeTrend probe_trend(std::span<const ProbeRecord> records) {
  ProbeTrend t;
  t.epochs = records.size();
  if (records.empty()) return t;
  const std::size_t q = std::max<std::size_t>(1, records.size() / 4);
  for (std::size_t i = 0; i < q; ++i) {
    const ProbeRecord& a = records[i];
    const ProbeRecord& b = records[records.size() - q + i];
    t.first_quarter += a.loss_on_erased - a.loss_on_clean;
    t.last_quarter += b.loss_on_erased - b.loss_on_clean;
  }
  t.first_quarter /= static_cast<double>(q);
  t.last_quarter /= static_cast<double>(q);
  return t;
}

std::vector<ProbeRecord> read_probe_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "epoch,loss_on_erased,loss_on_clean") {
    throw DataError(path.string() + ": unexpected header");
  }
  std::vector<ProbeRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    ProbeRecord r;
    char c1 = 0, c2 = 0;
    if (!(row >> r.epoch >> c1 >> r.loss_on_erased >> c2 >> r.loss_on_clean) || c1 != ',' ||
        c2 != ',') {
      throw DataError(path.string() + ": malformed row '" + line + "'");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace sreid
