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

#ifndef SREID_CHECKPOINT_HPP_
#define SREID_CHECKPOINT_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sreid/model.hpp"

namespace sreid {

/// On-disk layout, all integers little-endian:
///   "SREIDCKP" | u32 version | u64 header bytes | JSON header |
///   f64 payload in header order | u32 CRC-32 of everything before it.
/// The header holds `meta` (config echo, epoch, RNG state, ...) and the
/// name and shape of every tensor.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const nlohmann::json& meta);
/// Throws DataError on a missing, truncated or corrupted file.
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Copies tensors into the model by name; names and shapes must match.
void restore(Model& model, const Checkpoint& ckpt);

}  // namespace sreid

#endif  // SREID_CHECKPOINT_HPP_
