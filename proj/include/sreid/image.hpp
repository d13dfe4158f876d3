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

#ifndef SREID_IMAGE_HPP_
#define SREID_IMAGE_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sreid/tensor.hpp"

namespace sreid {

/// 8-bit interleaved RGB raster.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> rgb;  // height * width * 3

  Image() = default;
  Image(std::size_t h, std::size_t w) : height(h), width(w), rgb(h * w * 3, 0) {}

  std::uint8_t* pixel(std::size_t i, std::size_t j) { return &rgb[(i * width + j) * 3]; }
  const std::uint8_t* pixel(std::size_t i, std::size_t j) const {
    return &rgb[(i * width + j) * 3];
  }
};

/// PNG or JPEG, chosen by extension. Throws DataError on failure.
Image read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

/// (3, H, W) tensor with values in [0, 1].
Tensor to_tensor(const Image& image);
/// Inverse of to_tensor; values are clamped and rounded.
Image from_tensor(const Tensor& chw);

/// Bilinear resize of every channel of a (C, H, W) tensor.
Tensor resize_chw(const Tensor& chw, std::size_t height, std::size_t width);

}  // namespace sreid

#endif  // SREID_IMAGE_HPP_
