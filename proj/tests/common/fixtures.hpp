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

#ifndef SREID_TESTS_FIXTURES_HPP_
#define SREID_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <string>

#include "sreid/data.hpp"

namespace sreid::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("sreid_" + tag + "_" + std::to_string(std::hash<std::string>{}(tag)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// A dataset small enough for second-scale training runs.
inline SynthSpec small_spec() {
  SynthSpec s;
  s.train_identities = 6;
  s.eval_identities = 4;
  s.images_per_identity = 5;
  s.queries_per_identity = 1;
  s.height = 32;
  s.width = 16;
  return s;
}

}  // namespace sreid::testing

#endif  // SREID_TESTS_FIXTURES_HPP_
