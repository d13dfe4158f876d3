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

#ifndef SREID_TESTS_CONTRIVED_NET_HPP_
#define SREID_TESTS_CONTRIVED_NET_HPP_

#include <vector>

#include "sreid/rng.hpp"
#include "sreid/saliency.hpp"

namespace sreid::testing {

/// Linear network whose tapped map is the input itself. The descriptor and
/// logits read only the tapped positions for which `reads(i, j)` holds:
/// f[d] = sum_{k,i,j in region} W[d,k,i,j] A[k,i,j], and the same for logits.
class RegionNet : public TappedNetwork {
 public:
  template <typename Region>
  RegionNet(std::size_t channels, std::size_t height, std::size_t width, std::size_t dim,
            std::size_t classes, Region reads, std::uint64_t seed)
      : c_(channels), h_(height), w_(width), dim_(dim), classes_(classes) {
    Rng rng(seed);
    const std::size_t plane = c_ * h_ * w_;
    wd_.assign(dim_ * plane, 0.0);
    wl_.assign(classes_ * plane, 0.0);
    for (std::size_t k = 0; k < c_; ++k)
      for (std::size_t i = 0; i < h_; ++i)
        for (std::size_t j = 0; j < w_; ++j) {
          if (!reads(i, j)) continue;
          const std::size_t at = (k * h_ + i) * w_ + j;
          for (std::size_t d = 0; d < dim_; ++d) wd_[d * plane + at] = rng.uniform(-1.0, 1.0);
          for (std::size_t d = 0; d < classes_; ++d) wl_[d * plane + at] = rng.uniform(0.1, 1.0);
        }
  }

  Output forward(const Tensor& images) override {
    Output out;
    out.tapped = images;
    const std::size_t n = images.dim(0);
    out.descriptors = apply(images, wd_, dim_);
    out.logits = apply(images, wl_, classes_);
    n_ = n;
    return out;
  }
  Tensor descriptor_backward(const Tensor& g) override { return pull(g, wd_, dim_); }
  Tensor logit_backward(const Tensor& g) override { return pull(g, wl_, classes_); }

 private:
  Tensor apply(const Tensor& x, const std::vector<double>& w, std::size_t rows) const {
    const std::size_t plane = c_ * h_ * w_;
    Tensor out({x.dim(0), rows});
    for (std::size_t n = 0; n < x.dim(0); ++n)
      for (std::size_t d = 0; d < rows; ++d) {
        double s = 0.0;
        for (std::size_t p = 0; p < plane; ++p) s += w[d * plane + p] * x[n * plane + p];
        out.at(n, d) = s;
      }
    return out;
  }
  Tensor pull(const Tensor& g, const std::vector<double>& w, std::size_t rows) const {
    const std::size_t plane = c_ * h_ * w_;
    Tensor out({n_, c_, h_, w_});
    for (std::size_t n = 0; n < n_; ++n)
      for (std::size_t d = 0; d < rows; ++d)
        for (std::size_t p = 0; p < plane; ++p) out[n * plane + p] += g.at(n, d) * w[d * plane + p];
    return out;
  }

  std::size_t c_, h_, w_, dim_, classes_, n_ = 0;
  std::vector<double> wd_, wl_;
};

}  // namespace sreid::testing

#endif  // SREID_TESTS_CONTRIVED_NET_HPP_
