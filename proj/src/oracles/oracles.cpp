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

#include "sreid/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sreid::oracle {

Report compare(std::string case_id, long double reference, long double value,
               long double floor) {
  Report r{std::move(case_id), reference, value, 0, 0};
  r.abs_error = std::fabs(value - reference);
  r.rel_error = r.abs_error / std::max(std::fabs(reference), floor);
  return r;
}

namespace {

long double euclid(const Vec& a, const Vec& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

long double cosine(const Vec& a, const Vec& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

long double triplet(const std::vector<Vec>& e, const std::vector<int>& labels,
                    long double margin) {
  const std::size_t n = e.size();
  long double total = 0;
  for (std::size_t a = 0; a < n; ++a) {
    long double worst = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (std::size_t q = 0; q < n; ++q) {
        if (labels[q] == labels[a]) continue;
        worst = std::max(worst, margin + euclid(e[a], e[p]) - euclid(e[a], e[q]));
      }
    }
    total += worst;
  }
  return total / static_cast<long double>(n);
}

std::optional<long double> average_precision(const std::vector<bool>& relevant) {
  const auto total = static_cast<long double>(std::count(relevant.begin(), relevant.end(), true));
  if (total == 0) return std::nullopt;
  long double ap = 0;
  long double prev_recall = 0;
  long double found = 0;
  for (std::size_t k = 0; k < relevant.size(); ++k) {
    if (relevant[k]) found += 1;
    const long double precision = found / static_cast<long double>(k + 1);
    const long double recall = found / total;
    ap += precision * (recall - prev_recall);
    prev_recall = recall;
  }
  return ap;
}

RetrievalOracle retrieval(const std::vector<Vec>& query, const std::vector<int>& q_pids,
                          const std::vector<int>& q_cams, const std::vector<Vec>& gallery,
                          const std::vector<int>& g_pids, const std::vector<int>& g_cams,
                          std::size_t rank_max) {
  RetrievalOracle out;
  out.cmc.assign(rank_max, 0);
  long double ap_sum = 0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    std::vector<long double> sim(gallery.size());
    for (std::size_t j = 0; j < gallery.size(); ++j) sim[j] = cosine(query[i], gallery[j]);
    std::vector<bool> used(gallery.size(), false);
    std::vector<bool> relevant;
    for (std::size_t step = 0; step < gallery.size(); ++step) {
      std::size_t best = gallery.size();
      for (std::size_t j = 0; j < gallery.size(); ++j) {
        if (!used[j] && (best == gallery.size() || sim[j] > sim[best])) best = j;
      }
      used[best] = true;
      if (g_pids[best] == q_pids[i] && g_cams[best] == q_cams[i]) continue;
      relevant.push_back(g_pids[best] == q_pids[i]);
    }
    const auto ap = average_precision(relevant);
    out.ap.push_back(ap);
    if (!ap) {
      ++out.dropped;
      out.first_hit.push_back(0);
      continue;
    }
    ++counted;
    ap_sum += *ap;
    const auto first = static_cast<std::size_t>(
        std::find(relevant.begin(), relevant.end(), true) - relevant.begin()) + 1;
    out.first_hit.push_back(first);
    for (std::size_t k = 1; k <= rank_max; ++k) {
      if (first <= k) out.cmc[k - 1] += 1;
    }
  }
  if (counted > 0) {
    for (auto& c : out.cmc) c /= static_cast<long double>(counted);
    out.mAP = ap_sum / static_cast<long double>(counted);
  }
  return out;
}

Vec central_difference(const std::function<long double(const Vec&)>& fn, const Vec& point,
                       const Vec& steps) {
  if (steps.size() != point.size()) throw std::invalid_argument("steps/point size mismatch");
  Vec grad(point.size());
  Vec x = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    x[i] = point[i] + steps[i];
    const long double up = fn(x);
    x[i] = point[i] - steps[i];
    const long double down = fn(x);
    x[i] = point[i];
    grad[i] = (up - down) / (2 * steps[i]);
  }
  return grad;
}

Vec central_difference(const std::function<long double(const Vec&)>& fn, const Vec& point,
                       long double step) {
  return central_difference(fn, point, Vec(point.size(), step));
}

long double lehmer(const Vec& values, long double l, long double eps) {
  long double num = 0, den = 0;
  for (long double v : values) {
    const long double a = std::max(v, eps);
    num += std::pow(a, l);
    den += std::pow(a, l - 1);
  }
  return num / den;
}

std::vector<std::size_t> top_positions(const std::vector<double>& values, std::size_t n) {
  std::vector<bool> taken(values.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < n && k < values.size(); ++k) {
    std::size_t best = values.size();
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!taken[j] && (best == values.size() || values[j] > values[best])) best = j;
    }
    taken[best] = true;
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sreid::oracle
