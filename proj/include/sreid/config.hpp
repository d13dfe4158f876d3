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

#ifndef SREID_CONFIG_HPP_
#define SREID_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sreid/data.hpp"
#include "sreid/model.hpp"
#include "sreid/trainer.hpp"

namespace sreid {

inline constexpr int kSchemaVersion = 1;

/// One recognized configuration key.
struct ConfigKey {
  std::string key;  // dotted
  nlohmann::json default_value;
  std::string help;
  /// "reference" for values taken from the published training recipe,
  /// "desk" for desk-scale substitutions, "choice" for filled-in gaps.
  std::string origin;
};

/// Every key, in display order.
const std::vector<ConfigKey>& config_keys();

/// Versioned key/value run configuration. Files may be nested JSON objects
/// or use dotted keys; both flatten to the same keys. Unknown keys and type
/// mismatches are ConfigErrors.
class RunConfig {
 public:
  RunConfig();

  static RunConfig load(const std::filesystem::path& path);
  /// Applies a (nested or flat) JSON object on top of the current values.
  void merge(const nlohmann::json& j);
  /// Command-line override `--key value`; the text is parsed according to
  /// the key's default type.
  void set(std::string_view key, std::string_view text);

  bool has_key(std::string_view key) const;
  double number(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  std::size_t size(std::string_view key) const;
  bool flag(std::string_view key) const;
  std::string text(std::string_view key) const;
  std::vector<double> numbers(std::string_view key) const;

  /// Fills schedule keys derived from train.schedule and validates every
  /// section. Call after all merges and overrides.
  void resolve();

  /// Nested view including schema_version, as echoed into run directories.
  nlohmann::json effective() const;
  const nlohmann::json& flat() const { return values_; }

 private:
  const nlohmann::json& get(std::string_view key) const;
  void assign(const std::string& key, const nlohmann::json& value);

  nlohmann::json values_;  // flat object: dotted key -> value
};

ModelConfig model_config(const RunConfig& cfg, std::size_t num_identities);
TrainConfig train_config(const RunConfig& cfg);
AugmentConfig augment_config(const RunConfig& cfg);

/// Rebuilds a RunConfig from the effective echo stored in a checkpoint.
RunConfig config_from_echo(const nlohmann::json& echo);

/// `--help` text block: every key with its default and origin tag.
std::string describe_keys();

}  // namespace sreid

#endif  // SREID_CONFIG_HPP_
