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

#include "sreid/saliency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "sreid/errors.hpp"

namespace sreid {

double SalientMap::mass() const {
  double sum = 0.0;
  for (double v : values.values()) sum += v;
  return sum;
}

double SalientMap::min() const {
  return *std::min_element(values.values().begin(), values.values().end());
}

namespace {

double norm(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

}  // namespace

double cosine_score(std::span<const double> f_q, std::span<const double> f_g) {
  if (f_q.size() != f_g.size()) {
    throw InvalidInput("cosine_score: length mismatch " + std::to_string(f_q.size()) +
                       " vs " + std::to_string(f_g.size()));
  }
  double qq = 0.0, gg = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < f_q.size(); ++i) {
    qq += f_q[i] * f_q[i];
    gg += f_g[i] * f_g[i];
    dot += f_q[i] * f_g[i];
  }
  if (!(qq > 0.0) || !(gg > 0.0)) throw InvalidInput("cosine_score: zero-norm descriptor");
  // sqrt(qq * qq) == qq, so a descriptor scores exactly 1 against itself.
  return std::clamp(dot / std::sqrt(qq * gg), -1.0, 1.0);
}

std::vector<double> cosine_score_grad(std::span<const double> f_q,
                                      std::span<const double> f_g) {
  const double nq = norm(f_q);
  const double ng = norm(f_g);
  if (!(nq > 0.0) || !(ng > 0.0)) throw InvalidInput("cosine_score: zero-norm descriptor");
  double dot = 0.0;
  for (std::size_t i = 0; i < f_q.size(); ++i) dot += f_q[i] * f_g[i];
  const double s = dot / (nq * ng);
  std::vector<double> g(f_q.size());
  for (std::size_t i = 0; i < f_q.size(); ++i) {
    g[i] = f_g[i] / (nq * ng) - s * f_q[i] / (nq * nq);
  }
  return g;
}

ModelTap::ModelTap(const Model& model, TapId tap, Readout readout, NormMode mode)
    : model_(model), tap_(tap), readout_(readout), mode_(mode) {}

TappedNetwork::Output ModelTap::forward(const Tensor& images) {
  const bool need_aib = readout_ == Readout::kRetrieval || tap_.scope == TapId::Scope::kAib;
  pass_ = model_.forward(images, mode_, need_aib, true);
  Output out;
  out.tapped = model_.tapped(*pass_, tap_);
  out.logits = pass_->head(Branch::kEsb).logits;
  if (readout_ == Readout::kEsbEmbedding) {
    out.descriptors = pass_->head(Branch::kEsb).pooled;
  } else {
    const Tensor a = l2_normalize_rows(pass_->head(Branch::kAib).neck);
    const Tensor e = l2_normalize_rows(pass_->head(Branch::kEsb).neck);
    const std::size_t n = a.dim(0);
    const std::size_t d = a.dim(1);
    out.descriptors = Tensor({n, 2 * d});
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < d; ++i) {
        out.descriptors.at(r, i) = a.at(r, i);
        out.descriptors.at(r, d + i) = e.at(r, i);
      }
  }
  return out;
}

Tensor ModelTap::descriptor_backward(const Tensor& g) {
  if (!pass_) throw InvalidInput("ModelTap: backward before forward");
  HeadGrad aib;
  HeadGrad esb;
  if (readout_ == Readout::kEsbEmbedding) {
    esb.pooled = g;
  } else {
    const std::size_t n = g.dim(0);
    const std::size_t d = g.dim(1) / 2;
    Tensor ga({n, d});
    Tensor ge({n, d});
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < d; ++i) {
        ga.at(r, i) = g.at(r, i);
        ge.at(r, i) = g.at(r, d + i);
      }
    aib.neck = l2_normalize_rows_backward(pass_->head(Branch::kAib).neck, ga);
    esb.neck = l2_normalize_rows_backward(pass_->head(Branch::kEsb).neck, ge);
  }
  return model_.backward_to_tap(*pass_, tap_, aib, esb);
}

Tensor ModelTap::logit_backward(const Tensor& g) {
  if (!pass_) throw InvalidInput("ModelTap: backward before forward");
  HeadGrad esb;
  esb.logits = g;
  return model_.backward_to_tap(*pass_, tap_, HeadGrad{}, esb);
}

Tensor weighted_activation_map(const Tensor& tapped, const Tensor& phi) {
  if (tapped.rank() != 3 || !tapped.same_shape(phi)) {
    throw InvalidInput("salient map: activation " + shape_string(tapped.shape()) +
                       " vs gradient " + shape_string(phi.shape()));
  }
  const std::size_t c = tapped.dim(0);
  const std::size_t h = tapped.dim(1);
  const std::size_t w = tapped.dim(2);
  Tensor m({h, w});
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) m.at(i, j) += phi.at(k, i, j) * tapped.at(k, i, j);
  for (double& v : m.values()) v = std::max(v, 0.0);
  return m;
}

CgRamResult cg_ram(TappedNetwork& net, const Tensor& query_image,
                   const Tensor& gallery_image) {
  const std::array<Tensor, 2> pair{query_image, gallery_image};
  const TappedNetwork::Output out = net.forward(Tensor::stack(pair));
  const auto f_q = out.descriptors.row(0);
  const auto f_g = out.descriptors.row(1);
  CgRamResult result;
  result.score = cosine_score(f_q, f_g);

  // Only the query row carries gradient: phi is taken at the query's map.
  Tensor g(out.descriptors.shape());
  const std::vector<double> dq = cosine_score_grad(f_q, f_g);
  std::copy(dq.begin(), dq.end(), g.row(0).begin());
  const Tensor phi = net.descriptor_backward(g);
  result.map.values = weighted_activation_map(out.tapped.slice(0), phi.slice(0));
  return result;
}

namespace {

Tensor pooled_weight_map(const Tensor& tapped, const Tensor& grad) {
  const std::size_t c = tapped.dim(0);
  const std::size_t h = tapped.dim(1);
  const std::size_t w = tapped.dim(2);
  Tensor m({h, w});
  for (std::size_t k = 0; k < c; ++k) {
    double weight = 0.0;
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) weight += grad.at(k, i, j);
    weight /= static_cast<double>(h * w);
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) m.at(i, j) += weight * tapped.at(k, i, j);
  }
  for (double& v : m.values()) v = std::max(v, 0.0);
  return m;
}

}  // namespace

std::vector<SalientMap> grad_cam_batch(TappedNetwork& net, const Tensor& images,
                                       std::span<const int> targets) {
  const TappedNetwork::Output out = net.forward(images);
  if (targets.size() != out.logits.dim(0)) {
    throw InvalidInput("grad_cam: " + std::to_string(targets.size()) + " targets for " +
                       std::to_string(out.logits.dim(0)) + " images");
  }
  Tensor g(out.logits.shape());
  for (std::size_t n = 0; n < targets.size(); ++n) {
    if (targets[n] < 0 || static_cast<std::size_t>(targets[n]) >= out.logits.dim(1)) {
      throw InvalidInput("grad_cam: identity " + std::to_string(targets[n]) +
                         " outside classifier range [0, " +
                         std::to_string(out.logits.dim(1)) + ")");
    }
    g.at(n, static_cast<std::size_t>(targets[n])) = 1.0;
  }
  const Tensor grad = net.logit_backward(g);
  std::vector<SalientMap> maps(targets.size());
  for (std::size_t n = 0; n < targets.size(); ++n) {
    maps[n].values = pooled_weight_map(out.tapped.slice(n), grad.slice(n));
  }
  return maps;
}

SalientMap grad_cam(TappedNetwork& net, const Tensor& image, int target_identity) {
  const Tensor batch = Tensor::stack(std::span<const Tensor>(&image, 1));
  const int targets[] = {target_identity};
  return std::move(grad_cam_batch(net, batch, targets)[0]);
}

Tensor resize_bilinear(const Tensor& plane, std::size_t height, std::size_t width) {
  if (plane.rank() != 2 || plane.empty()) throw InvalidInput("resize: empty map");
  if (height == 0 || width == 0) throw InvalidInput("resize: zero target size");
  const std::size_t h = plane.dim(0);
  const std::size_t w = plane.dim(1);
  const double sy = static_cast<double>(h) / static_cast<double>(height);
  const double sx = static_cast<double>(w) / static_cast<double>(width);

  auto source = [](std::size_t o, double scale, std::size_t n) {
    const double src = std::max((static_cast<double>(o) + 0.5) * scale - 0.5, 0.0);
    const auto lo = std::min(static_cast<std::size_t>(src), n - 1);
    const std::size_t hi = std::min(lo + 1, n - 1);
    return std::tuple{lo, hi, src - static_cast<double>(lo)};
  };

  Tensor out({height, width});
  for (std::size_t i = 0; i < height; ++i) {
    const auto [y0, y1, fy] = source(i, sy, h);
    for (std::size_t j = 0; j < width; ++j) {
      const auto [x0, x1, fx] = source(j, sx, w);
      const double top = (1.0 - fx) * plane.at(y0, x0) + fx * plane.at(y0, x1);
      const double bottom = (1.0 - fx) * plane.at(y1, x0) + fx * plane.at(y1, x1);
      out.at(i, j) = (1.0 - fy) * top + fy * bottom;
    }
  }
  return out;
}

SalientMap resize_map(const SalientMap& map, std::size_t height, std::size_t width) {
  SalientMap out = map;
  Tensor r = resize_bilinear(map.values, height, width);
  for (double& v : r.values()) v = std::max(v, 0.0);
  out.resized = std::move(r);
  return out;
}

Tensor overlay(const Tensor& image, const Tensor& resized_map) {
  if (image.rank() != 3 || image.dim(0) != 3 || resized_map.rank() != 2 ||
      image.dim(1) != resized_map.dim(0) || image.dim(2) != resized_map.dim(1)) {
    throw InvalidInput("overlay: image " + shape_string(image.shape()) + " vs map " +
                       shape_string(resized_map.shape()));
  }
  const double peak =
      *std::max_element(resized_map.values().begin(), resized_map.values().end());
  const std::size_t h = resized_map.dim(0);
  const std::size_t w = resized_map.dim(1);
  Tensor out(image.shape());
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const double v = peak > 0.0 ? std::clamp(resized_map.at(i, j) / peak, 0.0, 1.0) : 0.0;
      const std::array<double, 3> heat{std::clamp(3.0 * v, 0.0, 1.0),
                                       std::clamp(3.0 * v - 1.0, 0.0, 1.0),
                                       std::clamp(3.0 * v - 2.0, 0.0, 1.0)};
      for (std::size_t c = 0; c < 3; ++c) {
        out.at(c, i, j) = 0.5 * image.at(c, i, j) + 0.5 * heat[c];
      }
    }
  return out;
}

}  // namespace sreid
