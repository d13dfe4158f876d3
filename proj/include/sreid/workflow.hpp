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

#ifndef SREID_WORKFLOW_HPP_
#define SREID_WORKFLOW_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "sreid/config.hpp"
#include "sreid/model.hpp"
#include "sreid/trainer.hpp"

namespace sreid {

/// Ingests `root` and decodes every split at the model input size.
TrainData load_train_data(const std::filesystem::path& root, const AugmentConfig& augment);

struct RunOutcome {
  FitResult fit;
  nlohmann::json effective;  // the resolved configuration
};

/// Resolves `cfg`, loads data.root, builds the model and trains it.
/// `run_dir` may be empty for an in-memory run.
RunOutcome run_training(RunConfig cfg, const std::filesystem::path& run_dir,
                        const FitOptions& extra = {});
/// Same, on data that is already loaded.
RunOutcome run_training(RunConfig cfg, const TrainData& data,
                        const std::filesystem::path& run_dir, const FitOptions& extra = {});

/// A model rebuilt from a checkpoint and the configuration it was trained
/// with.
struct LoadedModel {
  RunConfig config;
  Model model;
  nlohmann::json meta;
};
LoadedModel load_model(const std::filesystem::path& checkpoint);

/// Ablation sweep over one axis: "R" or "JK". Each setting trains a fresh
/// model; returns one row per setting.
struct AblationRow {
  std::string setting;
  double rank1 = 0.0;
  double mAP = 0.0;
};
std::vector<std::string> ablation_axes();
std::vector<AblationRow> ablate(const RunConfig& base, const std::string& axis,
                                const std::filesystem::path& out_dir);

}  // namespace sreid

#endif  // SREID_WORKFLOW_HPP_
