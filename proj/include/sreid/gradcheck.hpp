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

#ifndef SREID_GRADCHECK_HPP_
#define SREID_GRADCHECK_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace sreid {

struct GradcheckOptions {
  std::size_t cases = 500;
  std::uint64_t seed = 7;
  /// Fixed exponent for every case; drawn from [l_lo, l_hi] when unset.
  std::optional<double> l;
  double l_lo = 1.0;
  double l_hi = 8.0;
  double a_lo = 1e-6;
  double a_hi = 10.0;
  double step = 1e-4;  // relative to the coordinate for inputs, absolute for l
  double tolerance = 1e-5;
};

struct GradcheckCase {
  std::string id;
  std::size_t channels = 0, height = 0, width = 0;
  double l = 0.0;
  double rel_err_l = 0.0;
  double rel_err_input = 0.0;
  double rel_err_value = 0.0;  // forward against the oracle Lehmer mean
  bool equals_gap = false;     // bit-identical to GAP (checked only at l = 1)
};

struct GradcheckReport {
  GradcheckOptions options;
  std::vector<GradcheckCase> cases;
  double max_rel_err_l = 0.0;
  double max_rel_err_input = 0.0;
  double max_rel_err_value = 0.0;
  bool gap_identity_checked = false;
  bool gap_identity_holds = true;

  bool passed() const;
  nlohmann::json to_json() const;
  void print(std::ostream& os) const;
};

/// Checks the P-pooling forward and both backward rules against central
/// differences of an independent long-double Lehmer mean on random inputs
/// with values log-uniform in [a_lo, a_hi]. Errors are max |impl - ref| over
/// a gradient divided by the largest |ref| of that gradient, floored at
/// 1e-8 max F for dF/dl and 1e-8 for dF/dA (whose entries sum to 1).
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace sreid

#endif  // SREID_GRADCHECK_HPP_
