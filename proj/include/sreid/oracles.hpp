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

#ifndef SREID_ORACLES_HPP_
#define SREID_ORACLES_HPP_

// Brute-force reference computations. Deliberately slow and self-contained:
// this header and its sources use only the standard library, so they share
// nothing with the code they are used to check.

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sreid::oracle {

using Vec = std::vector<long double>;

struct Report {
  std::string case_id;
  long double reference = 0;
  long double value = 0;
  long double abs_error = 0;
  long double rel_error = 0;
};

/// Fills the error fields; the relative error uses max(|reference|, floor)
/// as its denominator.
Report compare(std::string case_id, long double reference, long double value,
               long double floor = 1e-12L);

/// Batch-hard triplet loss by enumerating every (anchor, positive, negative)
/// triple and keeping the worst hinge per anchor.
long double triplet(const std::vector<Vec>& embeddings, const std::vector<int>& labels,
                    long double margin);

/// Average precision of a relevance list in rank order, integrating
/// precision over recall increments. nullopt when nothing is relevant.
std::optional<long double> average_precision(const std::vector<bool>& relevant);

struct RetrievalOracle {
  std::vector<long double> cmc;  // rank-k accuracy, k = 1..rank_max
  long double mAP = 0;
  std::vector<std::optional<long double>> ap;  // per query
  /// Rank (1-based, after exclusion) of the first correct match per query;
  /// 0 when dropped.
  std::vector<std::size_t> first_hit;
  std::size_t dropped = 0;
};

/// Cosine ranking with ties to the lower gallery index, same-identity
/// same-camera entries removed, by selection sort.
RetrievalOracle retrieval(const std::vector<Vec>& query, const std::vector<int>& q_pids,
                          const std::vector<int>& q_cams, const std::vector<Vec>& gallery,
                          const std::vector<int>& g_pids, const std::vector<int>& g_cams,
                          std::size_t rank_max);

/// Central-difference gradient of `fn` at `point`; `steps[i]` is the step
/// for coordinate i.
Vec central_difference(const std::function<long double(const Vec&)>& fn, const Vec& point,
                       const Vec& steps);
Vec central_difference(const std::function<long double(const Vec&)>& fn, const Vec& point,
                       long double step);

/// sum a^l / sum a^(l-1) over values floored at eps, by direct powers.
long double lehmer(const Vec& values, long double l, long double eps);

/// Row-major positions of the n largest values, ties to the lower position,
/// by repeated linear scans. Returned in ascending position order.
std::vector<std::size_t> top_positions(const std::vector<double>& values, std::size_t n);

}  // namespace sreid::oracle

#endif  // SREID_ORACLES_HPP_
