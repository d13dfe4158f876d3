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

#include "sreid/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sreid/errors.hpp"

namespace sreid {

using nlohmann::json;

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", 7, "run seed; every random stream derives from it", "choice"},
      {"data.root", "", "dataset root holding train/, query/ and gallery/", "choice"},

      {"input.height", 384, "model input height in pixels", "reference"},
      {"input.width", 128, "model input width in pixels", "reference"},
      {"input.mean", json::array({0.485, 0.456, 0.406}), "per-channel normalization mean",
       "choice"},
      {"input.std", json::array({0.229, 0.224, 0.225}), "per-channel normalization std",
       "choice"},
      {"input.flip_probability", 0.5, "horizontal flip probability during training",
       "reference"},

      {"model.stage_channels", json::array({32, 64, 128, 256}), "channels of each backbone stage",
       "desk"},
      {"model.stem_stages", 2, "leading stages shared by both branches", "desk"},
      {"model.convs_per_stage", 1, "conv-BN-ReLU units per stage", "desk"},
      {"model.last_stage_stride", 1, "stride of the last stage", "reference"},
      {"model.aib_pooling", "gap", "AIB pooling: gap | gmp | ppool", "reference"},
      {"pooling", "ppool", "ESB pooling: gap | gmp | ppool", "reference"},

      {"ppool.l_init", 3.0, "initial P-pooling exponent", "choice"},
      {"ppool.l_min", 1.0, "lower clamp of the exponent", "choice"},
      {"ppool.l_max", 20.0, "upper clamp of the exponent", "choice"},
      {"ppool.eps", 1e-6, "activation floor before powers and logarithms", "choice"},

      {"train.epochs", 120, "training epochs", "reference"},
      {"train.base_lr", 3.5e-4, "learning rate after warmup", "reference"},
      {"train.schedule", "fixed",
       "fixed: use warmup_epochs/decay_epochs as given; proportional: scale 10/40/70 of 120 "
       "to train.epochs",
       "choice"},
      {"train.warmup_epochs", 10, "linear warmup length", "reference"},
      {"train.decay_epochs", json::array({40, 70}), "epochs at which the rate is decayed",
       "reference"},
      {"train.decay_factor", 0.1, "rate multiplier at each decay epoch", "reference"},
      {"train.weight_decay", 5e-4, "L2 weight decay", "reference"},
      {"train.optimizer", "adam", "optimizer (adam)", "reference"},
      {"train.margin", 0.3, "triplet margin", "reference"},
      {"train.checkpoint_every", 10, "epochs between periodic checkpoints (0 = off)", "choice"},
      {"train.probe", true, "run the erasure-sensitivity probe after every epoch", "choice"},

      {"sampler.J", 16, "identities per batch", "reference"},
      {"sampler.K", 4, "instances per identity", "reference"},

      {"besm.mode", "cgram", "erasing maps: cgram | gradcam | random | off", "reference"},
      {"besm.R", 0.1, "fraction of pixels erased in a triggered image", "reference"},
      {"besm.P", 0.3, "per-image erasing probability", "reference"},
      {"besm.layer", "esb.final", "layer whose activations locate the salient area",
       "reference"},
      {"besm.maps_every_step", true, "compute maps even when no image is triggered", "choice"},
      {"besm.random_p", 0.5, "random-erasing baseline: probability", "choice"},
      {"besm.random_area_min", 0.02, "random-erasing baseline: min area fraction", "choice"},
      {"besm.random_area_max", 0.4, "random-erasing baseline: max area fraction", "choice"},
      {"besm.random_aspect_min", 0.3, "random-erasing baseline: min aspect ratio", "choice"},

      {"eval.rank_max", 50, "longest CMC rank reported", "choice"},
  };
  return keys;
}

namespace {

const ConfigKey* find_key(std::string_view key) {
  for (const auto& k : config_keys()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

bool compatible(const json& def, const json& value) {
  if (def.is_boolean()) return value.is_boolean();
  if (def.is_string()) return value.is_string();
  if (def.is_number_integer() || def.is_number_unsigned()) {
    return value.is_number_integer() || value.is_number_unsigned() ||
           (value.is_number_float() && std::floor(value.get<double>()) == value.get<double>());
  }
  if (def.is_number()) return value.is_number();
  if (def.is_array()) {
    if (!value.is_array()) return false;
    for (const auto& v : value) {
      if (!v.is_number()) return false;
    }
    return true;
  }
  return false;
}

void flatten(const json& j, const std::string& prefix, json& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object() && !find_key(full)) {
      flatten(value, full, out);
    } else {
      out[full] = value;
    }
  }
}

}  // namespace

RunConfig::RunConfig() : values_(json::object()) {
  for (const auto& k : config_keys()) values_[k.key] = k.default_value;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  RunConfig cfg;
  cfg.merge(j);
  return cfg;
}

void RunConfig::merge(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  json flat = json::object();
  flatten(j, "", flat);
  if (flat.contains("schema_version")) {
    const json& v = flat["schema_version"];
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
      throw ConfigError("unsupported schema_version " + v.dump() + " (expected " +
                        std::to_string(kSchemaVersion) + ")");
    }
    flat.erase("schema_version");
  }
  for (const auto& [key, value] : flat.items()) assign(key, value);
}

void RunConfig::assign(const std::string& key, const json& value) {
  const ConfigKey* k = find_key(key);
  if (!k) throw ConfigError("unknown configuration key '" + key + "'");
  if (!compatible(k->default_value, value)) {
    throw ConfigError("configuration key '" + key + "' expects a value like " +
                      k->default_value.dump() + ", got " + value.dump());
  }
  if (k->default_value.is_number_integer() && value.is_number_float()) {
    values_[key] = static_cast<std::int64_t>(value.get<double>());
  } else {
    values_[key] = value;
  }
}

void RunConfig::set(std::string_view key, std::string_view text) {
  const ConfigKey* k = find_key(key);
  if (!k) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  const std::string s(text);
  json value;
  if (k->default_value.is_string()) {
    value = s;
  } else if (k->default_value.is_array() && !s.empty() && s.front() != '[') {
    // Comma-separated shorthand: --train.decay_epochs 13,23
    value = json::array();
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        value.push_back(json::parse(item));
      } catch (const json::exception&) {
        throw ConfigError("cannot parse '" + item + "' for " + k->key);
      }
    }
  } else {
    try {
      value = json::parse(s);
    } catch (const json::exception&) {
      throw ConfigError("cannot parse '" + s + "' for " + k->key);
    }
  }
  assign(k->key, value);
}

bool RunConfig::has_key(std::string_view key) const { return find_key(key) != nullptr; }

const json& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  return *it;
}

double RunConfig::number(std::string_view key) const { return get(key).get<double>(); }
std::int64_t RunConfig::integer(std::string_view key) const { return get(key).get<std::int64_t>(); }
std::size_t RunConfig::size(std::string_view key) const {
  const std::int64_t v = integer(key);
  if (v < 0) throw ConfigError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}
bool RunConfig::flag(std::string_view key) const { return get(key).get<bool>(); }
std::string RunConfig::text(std::string_view key) const { return get(key).get<std::string>(); }
std::vector<double> RunConfig::numbers(std::string_view key) const {
  return get(key).get<std::vector<double>>();
}

void RunConfig::resolve() {
  const std::string schedule = text("train.schedule");
  if (schedule == "proportional") {
    TrainConfig t;
    t.epochs = size("train.epochs");
    scale_schedule(t);
    values_["train.warmup_epochs"] = t.warmup_epochs;
    values_["train.decay_epochs"] = t.decay_epochs;
  } else if (schedule != "fixed") {
    throw ConfigError("train.schedule must be 'fixed' or 'proportional'");
  }
  // Building every section runs its validation.
  model_config(*this, 2).validate();
  train_config(*this).validate();
  augment_config(*this).validate();
}

json RunConfig::effective() const {
  json out = json::object();
  out["schema_version"] = kSchemaVersion;
  for (const auto& k : config_keys()) {
    json* node = &out;
    std::string rest = k.key;
    for (std::size_t dot; (dot = rest.find('.')) != std::string::npos;) {
      node = &(*node)[rest.substr(0, dot)];
      rest = rest.substr(dot + 1);
    }
    (*node)[rest] = values_.at(k.key);
  }
  return out;
}

namespace {

std::vector<std::size_t> sizes_of(const RunConfig& cfg, std::string_view key) {
  std::vector<std::size_t> out;
  for (double v : cfg.numbers(key)) {
    if (!(v >= 0.0) || std::floor(v) != v) {
      throw ConfigError(std::string(key) + " must hold nonnegative integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

ModelConfig model_config(const RunConfig& cfg, std::size_t num_identities) {
  ModelConfig m;
  m.backbone.stage_channels = sizes_of(cfg, "model.stage_channels");
  m.backbone.stem_stages = cfg.size("model.stem_stages");
  m.backbone.convs_per_stage = cfg.size("model.convs_per_stage");
  m.backbone.input_height = cfg.size("input.height");
  m.backbone.input_width = cfg.size("input.width");
  m.backbone.last_stage_stride = cfg.size("model.last_stage_stride");
  m.aib.pooling = parse_pooling_mode(cfg.text("model.aib_pooling"));
  m.esb.pooling = parse_pooling_mode(cfg.text("pooling"));
  m.ppool.l = cfg.number("ppool.l_init");
  m.ppool.l_min = cfg.number("ppool.l_min");
  m.ppool.l_max = cfg.number("ppool.l_max");
  m.ppool.eps = cfg.number("ppool.eps");
  m.num_identities = num_identities;
  m.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  return m;
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.epochs = cfg.size("train.epochs");
  t.base_lr = cfg.number("train.base_lr");
  t.warmup_epochs = cfg.size("train.warmup_epochs");
  t.decay_epochs = sizes_of(cfg, "train.decay_epochs");
  t.decay_factor = cfg.number("train.decay_factor");
  t.weight_decay = cfg.number("train.weight_decay");
  t.optimizer = cfg.text("train.optimizer");
  t.triplet.margin = cfg.number("train.margin");
  t.checkpoint_every = cfg.size("train.checkpoint_every");
  t.probe = cfg.flag("train.probe");
  t.sampler.J = cfg.size("sampler.J");
  t.sampler.K = cfg.size("sampler.K");
  t.besm.mode = parse_besm_mode(cfg.text("besm.mode"));
  t.besm.R = cfg.number("besm.R");
  t.besm.P = cfg.number("besm.P");
  t.besm.layer = cfg.text("besm.layer");
  t.besm.maps_every_step = cfg.flag("besm.maps_every_step");
  t.besm.random.p = cfg.number("besm.random_p");
  t.besm.random.area_min = cfg.number("besm.random_area_min");
  t.besm.random.area_max = cfg.number("besm.random_area_max");
  t.besm.random.aspect_min = cfg.number("besm.random_aspect_min");
  t.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  return t;
}

AugmentConfig augment_config(const RunConfig& cfg) {
  AugmentConfig a;
  a.height = cfg.size("input.height");
  a.width = cfg.size("input.width");
  const std::vector<double> mean = cfg.numbers("input.mean");
  const std::vector<double> std = cfg.numbers("input.std");
  if (mean.size() != 3 || std.size() != 3) {
    throw ConfigError("input.mean and input.std need exactly 3 values");
  }
  for (std::size_t c = 0; c < 3; ++c) {
    a.mean[c] = mean[c];
    a.std[c] = std[c];
  }
  a.flip_probability = cfg.number("input.flip_probability");
  return a;
}

RunConfig config_from_echo(const json& echo) {
  RunConfig cfg;
  cfg.merge(echo);
  return cfg;
}

std::string describe_keys() {
  std::ostringstream os;
  os << "Configuration keys (override with --<key> <value>):\n";
  for (const auto& k : config_keys()) {
    os << "  " << k.key << " = " << k.default_value.dump() << "  [" << k.origin << "]\n"
       << "      " << k.help << '\n';
  }
  return os.str();
}

}  // namespace sreid
