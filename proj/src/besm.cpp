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

#include "sreid/besm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sreid/errors.hpp"
#include "sreid/losses.hpp"

namespace sreid {

BesmMode parse_besm_mode(std::string_view name) {
  if (name == "cgram") return BesmMode::kCgram;
  if (name == "gradcam") return BesmMode::kGradcam;
  if (name == "random") return BesmMode::kRandom;
  if (name == "off") return BesmMode::kOff;
  throw ConfigError("unknown besm.mode '" + std::string(name) +
                    "' (expected cgram, gradcam, random or off)");
}

std::string_view to_string(BesmMode mode) {
  switch (mode) {
    case BesmMode::kCgram: return "cgram";
    case BesmMode::kGradcam: return "gradcam";
    case BesmMode::kRandom: return "random";
    case BesmMode::kOff: return "off";
  }
  return "?";
}

void RandomErasingParams::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("random erasing p must be in [0, 1]");
  if (!(area_min > 0.0 && area_min <= area_max && area_max < 1.0)) {
    throw ConfigError("random erasing area bounds must satisfy 0 < min <= max < 1");
  }
  if (!(aspect_min > 0.0 && aspect_min <= 1.0)) {
    throw ConfigError("random erasing aspect_min must be in (0, 1]");
  }
}

void BesmConfig::validate() const {
  if (!(R >= 0.0 && R < 1.0)) throw ConfigError("besm.R must be in [0, 1)");
  if (!(P >= 0.0 && P <= 1.0)) throw ConfigError("besm.P must be in [0, 1]");
  random.validate();
}

std::vector<std::size_t> easiest_positive(const Tensor& emb, std::span<const int> labels) {
  if (emb.rank() != 2 || emb.dim(0) != labels.size()) {
    throw InvalidInput("easiest_positive: embeddings " + shape_string(emb.shape()) + " vs " +
                       std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = labels.size();
  std::vector<std::size_t> best(n, n);
  std::vector<double> best_dist(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || labels[j] != labels[i]) continue;
      const double dist = 1.0 - cosine_score(emb.row(i), emb.row(j));
      if (best[i] == n || dist < best_dist[i]) {
        best[i] = j;
        best_dist[i] = dist;
      }
    }
    if (best[i] == n) {
      throw ContractViolation("label " + std::to_string(labels[i]) +
                              " has a single instance in the batch");
    }
  }
  return best;
}

double batch_score(std::span<const double> scores) {
  double total = 0.0;
  for (double s : scores) total += std::exp(s) * s;
  return total;
}

BatchPairing pair_batch(const Tensor& emb, std::span<const int> labels) {
  BatchPairing out;
  out.positive = easiest_positive(emb, labels);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double s = cosine_score(emb.row(i), emb.row(out.positive[i]));
    out.score.push_back(s);
    out.weight.push_back(std::exp(s));
  }
  out.batch_score = batch_score(out.score);
  return out;
}

Tensor batch_score_grad(const Tensor& emb, const BatchPairing& pairing) {
  Tensor g(emb.shape());
  for (std::size_t i = 0; i < pairing.positive.size(); ++i) {
    const std::size_t p = pairing.positive[i];
    const double w = pairing.weight[i];
    // S_i is symmetric in its two arguments.
    const std::vector<double> di = cosine_score_grad(emb.row(i), emb.row(p));
    const std::vector<double> dp = cosine_score_grad(emb.row(p), emb.row(i));
    auto gi = g.row(i);
    auto gp = g.row(p);
    for (std::size_t k = 0; k < di.size(); ++k) {
      gi[k] += w * di[k];
      gp[k] += w * dp[k];
    }
  }
  return g;
}

namespace {

std::vector<SalientMap> maps_from_grad(const Tensor& tapped, const Tensor& phi) {
  std::vector<SalientMap> maps(tapped.dim(0));
  for (std::size_t n = 0; n < maps.size(); ++n) {
    maps[n].values = weighted_activation_map(tapped.slice(n), phi.slice(n));
  }
  return maps;
}

void require_esb(const Pass& pass, TapId tap) {
  if (!pass.esb) throw InvalidInput("salient maps need a pass through the ESB");
  if (tap.scope == TapId::Scope::kAib) {
    throw TapError("erasing maps must be taken in the stem or the ESB");
  }
}

}  // namespace

std::vector<SalientMap> batch_salient_maps(const Model& model, const Pass& pass, TapId tap,
                                           std::span<const int> labels) {
  require_esb(pass, tap);
  const Tensor& emb = pass.head(Branch::kEsb).pooled;
  const BatchPairing pairing = pair_batch(emb, labels);
  HeadGrad esb;
  esb.pooled = batch_score_grad(emb, pairing);
  const Tensor phi = model.backward_to_tap(pass, tap, HeadGrad{}, esb);
  return maps_from_grad(model.tapped(pass, tap), phi);
}

std::vector<SalientMap> batch_salient_maps(const Model& model, const Tensor& images,
                                           std::span<const int> labels,
                                           const BesmConfig& cfg, NormMode mode) {
  const TapId tap = model.resolve_tap(cfg.layer);
  const Pass pass = model.forward(images, mode, false, true);
  return batch_salient_maps(model, pass, tap, labels);
}

std::vector<SalientMap> gradcam_batch_maps(const Model& model, const Pass& pass, TapId tap,
                                           std::span<const int> labels) {
  require_esb(pass, tap);
  const Tensor& logits = pass.head(Branch::kEsb).logits;
  if (labels.size() != logits.dim(0)) {
    throw InvalidInput("grad_cam: label count does not match the batch");
  }
  HeadGrad esb;
  esb.logits = Tensor(logits.shape());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= logits.dim(1)) {
      throw InvalidInput("grad_cam: identity " + std::to_string(labels[n]) +
                         " outside classifier range");
    }
    esb.logits.at(n, static_cast<std::size_t>(labels[n])) = 1.0;
  }
  const Tensor grad = model.backward_to_tap(pass, tap, HeadGrad{}, esb);
  const Tensor& tapped = model.tapped(pass, tap);
  std::vector<SalientMap> maps(labels.size());
  const std::size_t c = tapped.dim(1);
  const std::size_t h = tapped.dim(2);
  const std::size_t w = tapped.dim(3);
  for (std::size_t n = 0; n < maps.size(); ++n) {
    Tensor m({h, w});
    for (std::size_t k = 0; k < c; ++k) {
      double weight = 0.0;
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) weight += grad.at(n, k, i, j);
      weight /= static_cast<double>(h * w);
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) m.at(i, j) += weight * tapped.at(n, k, i, j);
    }
    for (double& v : m.values()) v = std::max(v, 0.0);
    maps[n].values = std::move(m);
  }
  return maps;
}

std::size_t EraseResult::triggered_count() const {
  return static_cast<std::size_t>(std::count(triggered.begin(), triggered.end(), true));
}

std::size_t erase_count(double ratio, std::size_t height, std::size_t width) {
  const std::size_t total = height * width;
  const double exact = ratio * static_cast<double>(total);
  const double nearest = std::round(exact);
  const double n = std::abs(exact - nearest) < 1e-9 ? nearest : std::ceil(exact);
  if (n >= static_cast<double>(total)) {
    throw ConfigError("erase ratio " + std::to_string(ratio) + " covers all " +
                      std::to_string(total) + " pixels");
  }
  return static_cast<std::size_t>(n);
}

std::vector<bool> draw_triggers(std::size_t count, double probability, Rng& rng) {
  std::vector<bool> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = rng.bernoulli(probability);
  return out;
}

std::vector<std::size_t> top_positions(const Tensor& plane, std::size_t n) {
  std::vector<std::size_t> order(plane.size());
  std::iota(order.begin(), order.end(), 0);
  n = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return plane[a] > plane[b] || (plane[a] == plane[b] && a < b);
                    });
  order.resize(n);
  std::sort(order.begin(), order.end());
  return order;
}

EraseResult erase_salient(const Tensor& images, std::span<const SalientMap> maps,
                          const std::vector<bool>& triggered, double ratio) {
  if (images.rank() != 4 || maps.size() != images.dim(0) || triggered.size() != maps.size()) {
    throw InvalidInput("erase: images " + shape_string(images.shape()) + " vs " +
                       std::to_string(maps.size()) + " maps");
  }
  const std::size_t channels = images.dim(1);
  const std::size_t h = images.dim(2);
  const std::size_t w = images.dim(3);
  const std::size_t n = erase_count(ratio, h, w);

  EraseResult out{images, triggered, {}};
  out.masks.resize(maps.size());
  for (std::size_t b = 0; b < maps.size(); ++b) {
    if (!triggered[b] || n == 0) continue;
    const SalientMap& m = maps[b];
    Tensor resized;
    if (m.resized && m.resized->dim(0) == h && m.resized->dim(1) == w) {
      resized = *m.resized;
    } else {
      resized = *resize_map(m, h, w).resized;
    }
    out.masks[b] = top_positions(resized, n);
    for (std::size_t pos : out.masks[b]) {
      for (std::size_t c = 0; c < channels; ++c) out.images.at(b, c, pos / w, pos % w) = 0.0;
    }
  }
  return out;
}

EraseResult erase(const Tensor& images, std::span<const SalientMap> maps,
                  const BesmConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::vector<bool> triggers = draw_triggers(maps.size(), cfg.P, rng);
  return erase_salient(images, maps, triggers, cfg.R);
}

EraseResult random_erasing(const Tensor& images, Rng& rng, const RandomErasingParams& params) {
  params.validate();
  if (images.rank() != 4) throw InvalidInput("random_erasing: expected (N, C, H, W)");
  const std::size_t count = images.dim(0);
  const std::size_t channels = images.dim(1);
  const std::size_t h = images.dim(2);
  const std::size_t w = images.dim(3);
  const double area = static_cast<double>(h * w);

  EraseResult out{images, std::vector<bool>(count, false), {}};
  out.masks.resize(count);
  for (std::size_t b = 0; b < count; ++b) {
    if (!rng.bernoulli(params.p)) continue;
    // Rectangles that do not fit are redrawn, as in the usual formulation.
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double target = rng.uniform(params.area_min, params.area_max) * area;
      const double log_r = rng.uniform(std::log(params.aspect_min), -std::log(params.aspect_min));
      const double aspect = std::exp(log_r);
      const auto rh = static_cast<std::size_t>(std::lround(std::sqrt(target * aspect)));
      const auto rw = static_cast<std::size_t>(std::lround(std::sqrt(target / aspect)));
      if (rh == 0 || rw == 0 || rh >= h || rw >= w) continue;
      const std::size_t top = rng.below(h - rh + 1);
      const std::size_t left = rng.below(w - rw + 1);
      for (std::size_t i = top; i < top + rh; ++i)
        for (std::size_t j = left; j < left + rw; ++j) {
          out.masks[b].push_back(i * w + j);
          for (std::size_t c = 0; c < channels; ++c) out.images.at(b, c, i, j) = params.value;
        }
      out.triggered[b] = true;
      break;
    }
  }
  return out;
}

}  // namespace sreid
