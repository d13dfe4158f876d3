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

#include "sreid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "sreid/errors.hpp"

namespace sreid {

nlohmann::json EvalResult::to_json() const {
  return {{"cmc", cmc}, {"mAP", mAP}, {"dropped_queries", dropped_queries},
          {"num_queries", per_query_ap.size()}};
}

Tensor extract_features(const Model& model, const std::vector<Tensor>& images,
                        const AugmentConfig& cfg, std::size_t batch_size) {
  if (images.empty()) return Tensor();
  std::vector<Tensor> chunks;
  for (std::size_t start = 0; start < images.size(); start += batch_size) {
    const std::size_t end = std::min(images.size(), start + batch_size);
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    chunks.push_back(infer_descriptors(model, make_test_batch(images, idx, cfg)));
  }
  const std::size_t d = chunks.front().dim(1);
  Tensor out({images.size(), d});
  std::size_t row = 0;
  for (const Tensor& c : chunks) {
    std::copy_n(c.data(), c.size(), out.data() + row * d);
    row += c.dim(0);
  }
  if (!out.all_finite()) throw NumericError("non-finite descriptor during feature extraction");
  return out;
}

namespace {

std::vector<double> unit_rows(const Tensor& x) {
  const std::size_t n = x.dim(0);
  const std::size_t d = x.dim(1);
  std::vector<double> out(x.values().begin(), x.values().end());
  for (std::size_t r = 0; r < n; ++r) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += out[r * d + k] * out[r * d + k];
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0)) throw InvalidInput("cmc_map: zero-norm descriptor in row " + std::to_string(r));
    for (std::size_t k = 0; k < d; ++k) out[r * d + k] /= norm;
  }
  return out;
}

}  // namespace

EvalResult cmc_map(const Tensor& q_desc, std::span<const int> q_pids, std::span<const int> q_cams,
                   const Tensor& g_desc, std::span<const int> g_pids, std::span<const int> g_cams,
                   std::size_t rank_max) {
  if (g_desc.empty() || g_desc.rank() != 2 || g_desc.dim(0) == 0) {
    throw InvalidInput("cmc_map: empty gallery");
  }
  if (q_desc.rank() != 2 || q_desc.dim(1) != g_desc.dim(1) || q_pids.size() != q_desc.dim(0) ||
      q_cams.size() != q_pids.size() || g_pids.size() != g_desc.dim(0) ||
      g_cams.size() != g_pids.size()) {
    throw InvalidInput("cmc_map: inconsistent descriptor / label sizes");
  }
  if (rank_max == 0) throw InvalidInput("cmc_map: rank_max must be positive");
  const std::size_t nq = q_desc.dim(0);
  const std::size_t ng = g_desc.dim(0);
  const std::size_t d = g_desc.dim(1);
  const std::vector<double> q = unit_rows(q_desc);
  const std::vector<double> g = unit_rows(g_desc);

  EvalResult result;
  result.cmc.assign(rank_max, 0.0);
  result.per_query_ap.assign(nq, std::numeric_limits<double>::quiet_NaN());
  std::size_t counted = 0;
  double ap_sum = 0.0;
  std::vector<double> sim(ng);
  std::vector<std::size_t> order(ng);
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < ng; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += q[i * d + k] * g[j * d + k];
      sim[j] = dot;
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });

    std::size_t rank = 0;
    std::size_t hits = 0;
    std::size_t first_hit = 0;
    double precision_sum = 0.0;
    for (std::size_t j : order) {
      const bool same_pid = g_pids[j] == q_pids[i];
      if (same_pid && g_cams[j] == q_cams[i]) continue;
      ++rank;
      if (same_pid) {
        ++hits;
        if (hits == 1) first_hit = rank;
        precision_sum += static_cast<double>(hits) / static_cast<double>(rank);
      }
    }
    if (hits == 0) {
      ++result.dropped_queries;
      continue;
    }
    ++counted;
    const double ap = precision_sum / static_cast<double>(hits);
    result.per_query_ap[i] = ap;
    ap_sum += ap;
    for (std::size_t k = first_hit; k <= rank_max; ++k) result.cmc[k - 1] += 1.0;
  }
  if (counted > 0) {
    for (double& c : result.cmc) c /= static_cast<double>(counted);
    result.mAP = ap_sum / static_cast<double>(counted);
  }
  return result;
}

void write_eval(const EvalResult& result, const std::filesystem::path& dir,
                const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (stem + ".json")) << result.to_json().dump(2) << '\n';
  std::ofstream csv(dir / (stem + "_ap.csv"));
  csv << "query,ap\n";
  csv.precision(17);
  for (std::size_t i = 0; i < result.per_query_ap.size(); ++i) {
    const double ap = result.per_query_ap[i];
    csv << i << ',';
    if (std::isnan(ap)) {
      csv << "dropped";
    } else {
      csv << ap;
    }
    csv << '\n';
  }
}

EvalResult evaluate(const Model& model, const std::vector<ReidSample>& query,
                    const std::vector<Tensor>& query_images,
                    const std::vector<ReidSample>& gallery,
                    const std::vector<Tensor>& gallery_images, const AugmentConfig& cfg,
                    std::size_t rank_max) {
  const Tensor qf = extract_features(model, query_images, cfg);
  const Tensor gf = extract_features(model, gallery_images, cfg);
  std::vector<int> qp, qc, gp, gc;
  for (const auto& s : query) {
    qp.push_back(s.pid);
    qc.push_back(s.cam);
  }
  for (const auto& s : gallery) {
    gp.push_back(s.pid);
    gc.push_back(s.cam);
  }
  return cmc_map(qf, qp, qc, gf, gp, gc, std::min(rank_max, gallery.size()));
}

}  // namespace sreid
