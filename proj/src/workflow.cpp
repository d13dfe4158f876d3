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

#include "sreid/workflow.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "sreid/checkpoint.hpp"
#include "sreid/data.hpp"
#include "sreid/errors.hpp"

namespace sreid {

TrainData load_train_data(const std::filesystem::path& root, const AugmentConfig& augment) {
  if (root.empty()) throw ConfigError("data.root is not set");
  const Dataset d = ingest_directory(root);
  TrainData td;
  td.augment = augment;
  td.images = load_images(d.train, augment.height, augment.width);
  td.labels = contiguous_labels(d.train, &td.num_identities);
  td.query = d.query;
  td.gallery = d.gallery;
  td.query_images = load_images(d.query, augment.height, augment.width);
  td.gallery_images = load_images(d.gallery, augment.height, augment.width);
  return td;
}

RunOutcome run_training(RunConfig cfg, const std::filesystem::path& run_dir,
                        const FitOptions& extra) {
  cfg.resolve();
  const TrainData data = load_train_data(cfg.text("data.root"), augment_config(cfg));
  return run_training(std::move(cfg), data, run_dir, extra);
}

RunOutcome run_training(RunConfig cfg, const TrainData& data,
                        const std::filesystem::path& run_dir, const FitOptions& extra) {
  cfg.resolve();
  RunOutcome out;
  out.effective = cfg.effective();
  Model model(model_config(cfg, data.num_identities));
  FitOptions options = extra;
  options.run_dir = run_dir;
  options.config_echo = out.effective;
  options.rank_max = cfg.size("eval.rank_max");
  out.fit = fit(model, data, train_config(cfg), options);
  return out;
}

LoadedModel load_model(const std::filesystem::path& checkpoint) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  if (!ckpt.meta.contains("config") || !ckpt.meta.contains("num_identities")) {
    throw DataError("checkpoint " + checkpoint.string() + " has no configuration echo");
  }
  RunConfig cfg = config_from_echo(ckpt.meta.at("config"));
  Model model(model_config(cfg, ckpt.meta.at("num_identities").get<std::size_t>()));
  restore(model, ckpt);
  return {std::move(cfg), std::move(model), ckpt.meta};
}

std::vector<std::string> ablation_axes() { return {"R", "JK"}; }

std::vector<AblationRow> ablate(const RunConfig& base, const std::string& axis,
                                const std::filesystem::path& out_dir) {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> settings;
  if (axis == "R") {
    for (const char* r : {"0", "0.05", "0.1", "0.2", "0.4"}) {
      settings.push_back({std::string("R=") + r, {{"besm.R", r}}});
    }
  } else if (axis == "JK") {
    // Batch size stays at 64.
    for (auto [j, k] : {std::pair{"8", "8"}, {"16", "4"}, {"32", "2"}}) {
      settings.push_back({std::string("J=") + j + ",K=" + k, {{"sampler.J", j}, {"sampler.K", k}}});
    }
  } else {
    throw ConfigError("unknown ablation axis '" + axis + "' (expected R or JK)");
  }

  RunConfig resolved = base;
  resolved.resolve();
  const TrainData data = load_train_data(resolved.text("data.root"), augment_config(resolved));
  std::vector<AblationRow> rows;
  for (const auto& [name, overrides] : settings) {
    RunConfig cfg = base;
    for (const auto& [key, value] : overrides) cfg.set(key, value);
    std::string dir_name = name;
    for (char& c : dir_name) {
      if (c == '=' || c == ',') c = '_';
    }
    const std::filesystem::path run_dir = out_dir.empty() ? out_dir : out_dir / dir_name;
    const RunOutcome run = run_training(cfg, data, run_dir);
    if (!run.fit.eval) throw DataError("ablation needs query and gallery splits");
    rows.push_back({name, run.fit.eval->rank(1), run.fit.eval->mAP});
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / ("ablate_" + axis + ".csv"));
    csv.precision(17);
    csv << "setting,rank1,mAP\n";
    for (const auto& r : rows) csv << '"' << r.setting << "\"," << r.rank1 << ',' << r.mAP << '\n';
  }
  return rows;
}

}  // namespace sreid
