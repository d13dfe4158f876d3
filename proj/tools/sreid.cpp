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

// Command-line entry point: synth, train, eval, explain, gradcheck,
// probe-report and ablate.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sreid/config.hpp"
#include "sreid/data.hpp"
#include "sreid/errors.hpp"
#include "sreid/eval.hpp"
#include "sreid/gradcheck.hpp"
#include "sreid/image.hpp"
#include "sreid/saliency.hpp"
#include "sreid/trainer.hpp"
#include "sreid/workflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw sreid::ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw sreid::ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path) << j.dump(2) << '\n';
}

// Splits leftover arguments into the optional config file (the one bare
// token) and "--key value" / "--key=value" overrides, applied in order on
// top of the file.
sreid::RunConfig config_from_args(const std::vector<std::string>& extras) {
  std::string file;
  std::vector<std::pair<std::string, std::string>> overrides;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0) {
      if (!file.empty()) throw sreid::ConfigError("unexpected argument '" + tok + "'");
      file = tok;
      continue;
    }
    std::string key = tok.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= extras.size()) throw sreid::ConfigError("missing value for --" + key);
      value = extras[++i];
    }
    overrides.emplace_back(std::move(key), std::move(value));
  }
  sreid::RunConfig cfg = file.empty() ? sreid::RunConfig() : sreid::RunConfig::load(file);
  for (const auto& [key, value] : overrides) cfg.set(key, value);
  return cfg;
}

int cmd_synth(const std::string& spec_file, const fs::path& out_dir) {
  sreid::SynthSpec spec;
  if (!spec_file.empty()) {
    try {
      spec = sreid::SynthSpec::from_json(read_json(spec_file));
    } catch (const json::exception& e) {
      throw sreid::ConfigError(spec_file + ": " + e.what());
    }
  }
  const sreid::SynthSummary s = sreid::generate_synthetic(spec, out_dir);
  std::cout << "wrote " << s.train << " train, " << s.query << " query, " << s.gallery
            << " gallery images to " << out_dir.string() << '\n';
  return 0;
}

int cmd_train(const sreid::RunConfig& cfg, const fs::path& run_dir) {
  sreid::FitOptions options;
  options.on_epoch = [](std::size_t epoch, const sreid::LossBundle& last) {
    std::cout << "epoch " << epoch + 1 << " loss " << last.total << '\n' << std::flush;
  };
  const sreid::RunOutcome run = sreid::run_training(cfg, run_dir, options);
  if (run.fit.eval) {
    std::cout << "rank1 " << run.fit.eval->rank(1) << " mAP " << run.fit.eval->mAP << '\n';
  }
  std::cout << "run directory: " << run_dir.string() << '\n';
  return 0;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& data_root, std::size_t rank_max,
             const fs::path& out_dir) {
  sreid::LoadedModel loaded = sreid::load_model(checkpoint);
  const sreid::AugmentConfig aug = sreid::augment_config(loaded.config);
  const sreid::Dataset d = sreid::ingest_directory(data_root);
  const auto qi = sreid::load_images(d.query, aug.height, aug.width);
  const auto gi = sreid::load_images(d.gallery, aug.height, aug.width);
  const sreid::EvalResult r =
      sreid::evaluate(loaded.model, d.query, qi, d.gallery, gi, aug, rank_max);
  sreid::write_eval(r, out_dir, "eval");
  std::cout << "rank1 " << r.rank(1) << " mAP " << r.mAP << " (" << r.cmc.size()
            << " ranks, " << r.dropped_queries << " dropped queries)\n";
  return 0;
}

int cmd_explain(const fs::path& checkpoint, const fs::path& query, const fs::path& gallery,
                const fs::path& out_dir, const std::string& layer) {
  sreid::LoadedModel loaded = sreid::load_model(checkpoint);
  const sreid::AugmentConfig aug = sreid::augment_config(loaded.config);
  sreid::Rng unused(0);
  const sreid::Tensor q =
      sreid::augment(sreid::read_image(query), unused, sreid::AugmentMode::kTest, aug);
  const sreid::Tensor g =
      sreid::augment(sreid::read_image(gallery), unused, sreid::AugmentMode::kTest, aug);
  const sreid::TapId tap = loaded.model.resolve_tap(layer);
  sreid::ModelTap net(loaded.model, tap, sreid::Readout::kRetrieval, sreid::NormMode::kEval);
  const sreid::CgRamResult r = sreid::cg_ram(net, q, g);
  const sreid::SalientMap big = sreid::resize_map(r.map, aug.height, aug.width);

  fs::create_directories(out_dir);
  const sreid::Tensor base = sreid::resize_chw(sreid::to_tensor(sreid::read_image(query)),
                                               aug.height, aug.width);
  sreid::write_png(out_dir / "overlay.png", sreid::from_tensor(sreid::overlay(base, *big.resized)));
  std::ofstream map(out_dir / "map.txt");
  map << std::setprecision(17);
  const std::size_t h = r.map.values.dim(0);
  const std::size_t w = r.map.values.dim(1);
  map << "# " << h << ' ' << w << '\n';
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) map << (j ? " " : "") << r.map.values.at(i, j);
    map << '\n';
  }
  write_json(out_dir / "score.json", {{"score", r.score},
                                      {"layer", loaded.model.tap_name(tap)},
                                      {"query", query.string()},
                                      {"gallery", gallery.string()},
                                      {"map_shape", {h, w}}});
  std::cout << std::setprecision(17) << "score " << r.score << '\n';
  return 0;
}

int cmd_gradcheck(const sreid::GradcheckOptions& options, const fs::path& out) {
  const sreid::GradcheckReport report = sreid::run_gradcheck(options);
  report.print(std::cout);
  if (!out.empty()) write_json(out, report.to_json());
  return report.passed() ? 0 : kExitNumeric;
}

int cmd_probe_report(const fs::path& run_dir) {
  const auto records = sreid::read_probe_csv(run_dir / "probe.csv");
  const sreid::ProbeTrend t = sreid::probe_trend(records);
  std::cout << std::setprecision(6) << "epochs " << t.epochs << "\n"
            << "first-quarter mean (erased - clean) " << t.first_quarter << "\n"
            << "last-quarter mean (erased - clean)  " << t.last_quarter << "\n"
            << "rise " << t.rise() << '\n';
  write_json(run_dir / "probe_report.json", {{"epochs", t.epochs},
                                             {"first_quarter", t.first_quarter},
                                             {"last_quarter", t.last_quarter},
                                             {"rise", t.rise()}});
  return 0;
}

int cmd_ablate(const sreid::RunConfig& cfg, const std::string& axis, const fs::path& out_dir) {
  const auto rows = sreid::ablate(cfg, axis, out_dir);
  std::cout << "setting,rank1,mAP\n";
  for (const auto& r : rows) std::cout << r.setting << ',' << r.rank1 << ',' << r.mAP << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Salient-region erasing re-identification toolkit"};
  app.require_subcommand(1);
  app.footer("Run 'sreid train --help' for the configuration keys.");

  std::string spec_file;
  fs::path synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic re-identification dataset");
  synth->add_option("spec", spec_file, "JSON generator spec (defaults when omitted)");
  synth->add_option("--out,-o", synth_out, "output directory")->required();

  fs::path run_dir = "runs/latest";
  auto* train = app.add_subcommand(
      "train", "train a model: sreid train [config.json] [--<key> <value> ...]");
  train->add_option("--run-dir", run_dir, "run directory")->capture_default_str();
  train->allow_extras();
  train->footer(sreid::describe_keys());

  fs::path checkpoint, data_root, eval_out = ".";
  std::size_t rank_max = 50;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on query/gallery splits");
  eval->add_option("checkpoint", checkpoint)->required();
  eval->add_option("dataset", data_root, "dataset root")->required();
  eval->add_option("--rank-max", rank_max, "longest CMC rank")->capture_default_str();
  eval->add_option("--out", eval_out, "directory for eval.json and eval_ap.csv")
      ->capture_default_str();

  fs::path query, gallery, explain_out;
  std::string layer = "esb.final";
  auto* explain = app.add_subcommand("explain", "ranking activation map for a query/gallery pair");
  explain->add_option("checkpoint", checkpoint)->required();
  explain->add_option("query", query)->required();
  explain->add_option("gallery", gallery)->required();
  explain->add_option("out", explain_out)->required();
  explain->add_option("--layer", layer, "tapped layer, e.g. stem.stage2, aib.final, esb.final")
      ->capture_default_str();

  sreid::GradcheckOptions gc;
  double fixed_l = 0.0;
  fs::path gc_out;
  auto* gradcheck = app.add_subcommand("gradcheck", "P-pooling gradients against finite differences");
  auto* l_opt = gradcheck->add_option("--l", fixed_l, "fixed exponent for every case");
  gradcheck->add_option("--seed", gc.seed)->capture_default_str();
  gradcheck->add_option("--cases", gc.cases)->capture_default_str();
  gradcheck->add_option("--json", gc_out, "also write the report as JSON");

  auto* probe = app.add_subcommand("probe-report", "summarize probe.csv of a run directory");
  probe->add_option("run_dir", run_dir)->required();

  std::string axis;
  fs::path ablate_out = "runs/ablate";
  auto* ablate = app.add_subcommand(
      "ablate", "sweep R or JK: sreid ablate [config.json] --axis R|JK [--<key> <value> ...]");
  ablate->add_option("--axis", axis, "R or JK")->required();
  ablate->add_option("--out", ablate_out)->capture_default_str();
  ablate->allow_extras();
  ablate->footer(sreid::describe_keys());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) return cmd_synth(spec_file, synth_out);
    if (*train) return cmd_train(config_from_args(train->remaining()), run_dir);
    if (*eval) return cmd_eval(checkpoint, data_root, rank_max, eval_out);
    if (*explain) return cmd_explain(checkpoint, query, gallery, explain_out, layer);
    if (*gradcheck) {
      if (*l_opt) gc.l = fixed_l;
      return cmd_gradcheck(gc, gc_out);
    }
    if (*probe) return cmd_probe_report(run_dir);
    if (*ablate) {
      return cmd_ablate(config_from_args(ablate->remaining()), axis, ablate_out);
    }
  } catch (const sreid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sreid::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const sreid::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
