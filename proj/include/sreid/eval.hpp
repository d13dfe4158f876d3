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

#ifndef SREID_EVAL_HPP_
#define SREID_EVAL_HPP_

#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "sreid/data.hpp"
#include "sreid/model.hpp"
#include "sreid/tensor.hpp"

namespace sreid {

struct EvalResult {
  std::vector<double> cmc;           // cmc[k-1] = rank-k accuracy
  double mAP = 0.0;
  std::vector<double> per_query_ap;  // NaN for dropped queries
  std::size_t dropped_queries = 0;   // no valid positive after exclusion

  double rank(std::size_t k) const { return cmc.at(k - 1); }
  nlohmann::json to_json() const;
};

/// Flip-averaged retrieval descriptors, computed in chunks of `batch_size`.
Tensor extract_features(const Model& model, const std::vector<Tensor>& images,
                        const AugmentConfig& cfg, std::size_t batch_size = 32);

/// Cross-camera retrieval metrics. Gallery entries sharing both identity and
/// camera with the query are discarded; the rest are ranked by descending
/// cosine similarity, ties by gallery index.
EvalResult cmc_map(const Tensor& q_desc, std::span<const int> q_pids, std::span<const int> q_cams,
                   const Tensor& g_desc, std::span<const int> g_pids, std::span<const int> g_cams,
                   std::size_t rank_max = 50);

/// Writes `<stem>.json` (cmc, mAP, dropped count) and `<stem>_ap.csv`.
void write_eval(const EvalResult& result, const std::filesystem::path& dir,
                const std::string& stem = "eval");

/// Extracts features for the query and gallery splits and evaluates.
EvalResult evaluate(const Model& model, const std::vector<ReidSample>& query,
                    const std::vector<Tensor>& query_images,
                    const std::vector<ReidSample>& gallery,
                    const std::vector<Tensor>& gallery_images, const AugmentConfig& cfg,
                    std::size_t rank_max = 50);

}  // namespace sreid

#endif  // SREID_EVAL_HPP_
