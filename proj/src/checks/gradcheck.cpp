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

#include "sreid/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "sreid/oracles.hpp"
#include "sreid/pooling.hpp"
#include "sreid/rng.hpp"

namespace sreid {

namespace {

constexpr long double kScaleFloor = 1e-8L;

// A gradient that is exactly zero (a constant channel) would make any
// rounding residual look infinitely large, so the scale has a floor.
double vector_rel_err(const std::vector<long double>& ref, const std::vector<double>& got,
                      long double floor) {
  long double scale = floor, err = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    scale = std::max(scale, std::fabs(ref[i]));
    err = std::max(err, std::fabs(static_cast<long double>(got[i]) - ref[i]));
  }
  return static_cast<double>(err / std::max(scale, 1e-300L));
}

}  // namespace

bool GradcheckReport::passed() const {
  return max_rel_err_l < options.tolerance && max_rel_err_input < options.tolerance &&
         max_rel_err_value < options.tolerance && gap_identity_holds;
}

nlohmann::json GradcheckReport::to_json() const {
  nlohmann::json j{{"cases", cases.size()},
                   {"seed", options.seed},
                   {"tolerance", options.tolerance},
                   {"max_rel_err_l", max_rel_err_l},
                   {"max_rel_err_input", max_rel_err_input},
                   {"max_rel_err_value", max_rel_err_value},
                   {"passed", passed()}};
  if (gap_identity_checked) j["equals_gap_at_l1"] = gap_identity_holds;
  return j;
}

void GradcheckReport::print(std::ostream& os) const {
  const auto flags = os.flags();
  os << std::scientific << std::setprecision(3);
  os << "ppool gradcheck: " << cases.size() << " cases, seed " << options.seed << '\n';
  os << "  max rel err dF/dl  " << max_rel_err_l << '\n';
  os << "  max rel err dF/dA  " << max_rel_err_input << '\n';
  os << "  max rel err F      " << max_rel_err_value << '\n';
  if (gap_identity_checked) {
    os << "  l = 1 equals GAP exactly: " << (gap_identity_holds ? "yes" : "no") << '\n';
  }
  os << (passed() ? "PASS" : "FAIL") << " (tolerance " << options.tolerance << ")\n";
  os.flags(flags);
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  GradcheckReport report;
  report.options = options;
  Rng rng = Rng::stream(options.seed, "gradcheck");
  const double log_lo = std::log(options.a_lo);
  const double log_hi = std::log(options.a_hi);
  PPoolingLayer layer;
  layer.l_max = std::max(layer.l_max, options.l.value_or(options.l_hi));

  for (std::size_t c = 0; c < options.cases; ++c) {
    GradcheckCase k;
    k.id = "case" + std::to_string(c);
    k.channels = 1 + rng.below(3);
    k.height = 1 + rng.below(5);
    k.width = 1 + rng.below(5);
    k.l = options.l ? *options.l : rng.uniform(options.l_lo, options.l_hi);
    layer.l = k.l;
    Tensor A({k.channels, k.height, k.width});
    for (double& v : A.values()) v = std::exp(rng.uniform(log_lo, log_hi));

    const PooledVector value = ppool_forward(A, layer);
    const PooledVector grad_l = ppool_grad_l(A, layer);
    const Tensor grad_in = ppool_grad_input(A, layer);
    const std::size_t plane = k.height * k.width;

    std::vector<long double> ref_value, ref_l, ref_in;
    std::vector<double> got_in(grad_in.values().begin(), grad_in.values().end());
    for (std::size_t ch = 0; ch < k.channels; ++ch) {
      oracle::Vec a(A.data() + ch * plane, A.data() + (ch + 1) * plane);
      const long double eps = layer.eps;
      ref_value.push_back(oracle::lehmer(a, k.l, eps));
      ref_l.push_back(oracle::central_difference(
          [&](const oracle::Vec& p) { return oracle::lehmer(a, p[0], eps); },
          oracle::Vec{static_cast<long double>(k.l)}, options.step)[0]);
      oracle::Vec steps(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) steps[i] = options.step * a[i];
      const oracle::Vec g = oracle::central_difference(
          [&](const oracle::Vec& p) { return oracle::lehmer(p, k.l, eps); }, a, steps);
      ref_in.insert(ref_in.end(), g.begin(), g.end());
    }
    long double f_max = 0;
    for (long double v : ref_value) f_max = std::max(f_max, v);
    k.rel_err_value = vector_rel_err(ref_value, value, 0);
    k.rel_err_l = vector_rel_err(ref_l, grad_l, kScaleFloor * f_max);
    k.rel_err_input = vector_rel_err(ref_in, got_in, kScaleFloor);
    if (k.l == 1.0) {
      report.gap_identity_checked = true;
      k.equals_gap = ppool_forward(A, layer) == gap(A);
      report.gap_identity_holds = report.gap_identity_holds && k.equals_gap;
    }
    report.max_rel_err_l = std::max(report.max_rel_err_l, k.rel_err_l);
    report.max_rel_err_input = std::max(report.max_rel_err_input, k.rel_err_input);
    report.max_rel_err_value = std::max(report.max_rel_err_value, k.rel_err_value);
    report.cases.push_back(k);
  }
  return report;
}

}  // namespace sreid
