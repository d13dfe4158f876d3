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

#include "sreid/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sreid/errors.hpp"

namespace sreid {

LossBundle LossBundle::of(double esb_id, double esb_triplet, double aib_id,
                          double aib_triplet) {
  return LossBundle{esb_id, esb_triplet, aib_id, aib_triplet,
                    esb_id + esb_triplet + aib_id + aib_triplet};
}

bool LossBundle::finite() const {
  return std::isfinite(esb_id) && std::isfinite(esb_triplet) && std::isfinite(aib_id) &&
         std::isfinite(aib_triplet) && std::isfinite(total);
}

void TripletConfig::validate() const {
  if (!(margin > 0.0)) throw ConfigError("triplet margin must be > 0");
}

LossGrad id_loss_grad(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size() || labels.empty()) {
    throw InvalidInput("id_loss: logits " + shape_string(logits.shape()) + " vs " +
                       std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = logits.dim(0);
  const std::size_t c = logits.dim(1);
  LossGrad out{0.0, Tensor(logits.shape())};
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= c) {
      throw InvalidInput("id_loss: label " + std::to_string(labels[r]) +
                         " outside classifier range [0, " + std::to_string(c) + ")");
    }
    const auto row = logits.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    out.value += log_z - row[static_cast<std::size_t>(labels[r])];
    for (std::size_t k = 0; k < c; ++k) {
      const double p = std::exp(row[k] - log_z);
      out.grad.at(r, k) =
          (p - (static_cast<int>(k) == labels[r] ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  out.value /= static_cast<double>(n);
  return out;
}

double id_loss(const Tensor& logits, std::span<const int> labels) {
  return id_loss_grad(logits, labels).value;
}

void check_sampler_contract(std::span<const int> labels) {
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() < 2) {
    throw ContractViolation("batch holds " + std::to_string(counts.size()) +
                            " distinct label(s); the sampler must provide at least 2");
  }
  for (const auto& [label, count] : counts) {
    if (count < 2) {
      throw ContractViolation("label " + std::to_string(label) +
                              " has a single instance in the batch");
    }
  }
}

namespace {

// Floor inside the square root keeps d differentiable at coincident points.
constexpr double kDistFloor = 1e-12;

}  // namespace

LossGrad batch_hard_triplet_grad(const Tensor& emb, std::span<const int> labels,
                                 const TripletConfig& cfg) {
  cfg.validate();
  if (emb.rank() != 2 || emb.dim(0) != labels.size()) {
    throw InvalidInput("triplet: embeddings " + shape_string(emb.shape()) + " vs " +
                       std::to_string(labels.size()) + " labels");
  }
  check_sampler_contract(labels);
  const std::size_t n = emb.dim(0);
  const std::size_t d = emb.dim(1);

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = emb.at(i, k) - emb.at(j, k);
        sq += diff * diff;
      }
      dist[i * n + j] = dist[j * n + i] = std::sqrt(std::max(sq, kDistFloor));
    }

  LossGrad out{0.0, Tensor(emb.shape())};
  auto add_pair_grad = [&](std::size_t i, std::size_t j, double scale) {
    // d|xi - xj| / dxi = (xi - xj) / |xi - xj|
    const double dij = dist[i * n + j];
    for (std::size_t k = 0; k < d; ++k) {
      const double g = scale * (emb.at(i, k) - emb.at(j, k)) / dij;
      out.grad.at(i, k) += g;
      out.grad.at(j, k) -= g;
    }
  };

  for (std::size_t a = 0; a < n; ++a) {
    std::size_t pos = n;
    std::size_t neg = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      if (labels[j] == labels[a]) {
        if (pos == n || dist[a * n + j] > dist[a * n + pos]) pos = j;
      } else {
        if (neg == n || dist[a * n + j] < dist[a * n + neg]) neg = j;
      }
    }
    const double hinge = cfg.margin + dist[a * n + pos] - dist[a * n + neg];
    if (hinge <= 0.0) continue;
    out.value += hinge;
    const double scale = 1.0 / static_cast<double>(n);
    add_pair_grad(a, pos, scale);
    add_pair_grad(a, neg, -scale);
  }
  out.value /= static_cast<double>(n);
  return out;
}

double batch_hard_triplet(const Tensor& emb, std::span<const int> labels,
                          const TripletConfig& cfg) {
  return batch_hard_triplet_grad(emb, labels, cfg).value;
}

}  // namespace sreid
