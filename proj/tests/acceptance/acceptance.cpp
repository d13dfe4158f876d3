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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance --fast      criteria 1-7, 11, 12 (seconds)
//   acceptance --training  criteria 8-10 (desk-scale training runs)
//   acceptance             everything

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "contrived_net.hpp"
#include "helpers.hpp"
#include "json.hpp"
#include "sreid/besm.hpp"
#include "sreid/config.hpp"
#include "sreid/data.hpp"
#include "sreid/errors.hpp"
#include "sreid/eval.hpp"
#include "sreid/gradcheck.hpp"
#include "sreid/oracles.hpp"
#include "sreid/pooling.hpp"
#include "sreid/saliency.hpp"
#include "sreid/trainer.hpp"
#include "sreid/workflow.hpp"

namespace fs = std::filesystem;
using namespace sreid;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++g_failures;
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << " " << title << ": "
            << o.detail << std::endl;
}

fs::path work_root() {
  const fs::path p = fs::temp_directory_path() / "sreid_acceptance";
  fs::create_directories(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

// Generates a preset dataset once per process.
fs::path preset_data(const std::string& name) {
  const fs::path out = work_root() / ("data_" + name);
  const SynthSpec spec = SynthSpec::from_json(
      read_json(fs::path(SREID_SOURCE_DIR) / "configs" / ("synth_" + name + ".json")));
  if (!fs::exists(out / "manifest.json") ||
      read_json(out / "manifest.json").at("spec") != spec.to_json()) {
    fs::remove_all(out);
    generate_synthetic(spec, out);
  }
  return out;
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg = RunConfig::load(fs::path(SREID_SOURCE_DIR) / "configs" / (name + ".json"));
  cfg.set("data.root", preset_data(name).string());
  return cfg;
}

void as_base(RunConfig& cfg) {
  cfg.set("besm.mode", "off");
  cfg.set("pooling", "gap");
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = Clock::now();
  GradcheckOptions opt;
  opt.cases = 500;
  opt.l_lo = 1.0;
  opt.l_hi = 8.0;
  opt.a_lo = 1e-6;
  opt.a_hi = 10.0;
  const GradcheckReport r = run_gradcheck(opt);
  const double secs = seconds_since(t0);
  const bool pass = r.max_rel_err_l < 1e-5 && r.max_rel_err_input < 1e-5 && secs < 60.0;
  return {pass, "max rel err dF/dl " + fmt("%.2e", r.max_rel_err_l) + ", dF/dA " +
                    fmt("%.2e", r.max_rel_err_input) + " over " + std::to_string(r.cases.size()) +
                    " cases in " + fmt("%.2f", secs) + " s (need < 1e-5, < 60 s)"};
}

Outcome criterion2() {
  Rng rng = Rng::stream(2, "acceptance.limits");
  PPoolingLayer layer;
  std::size_t gap_equal = 0, sandwich = 0;
  const std::size_t cases = 10000;
  double gap20_sum = 0.0, gap20_max = 0.0;
  std::size_t gap20_within = 0, channels = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t h = 1 + rng.below(6), w = 1 + rng.below(6);
    Tensor A({2, h, w});
    for (double& v : A.values()) v = std::exp(rng.uniform(std::log(1e-6), std::log(10.0)));
    const PooledVector avg = gap(A);
    const PooledVector mx = gmp(A);

    layer.l = 1.0;
    gap_equal += ppool_forward(A, layer) == avg;

    layer.l = rng.uniform(1.0, 20.0);
    const PooledVector p = ppool_forward(A, layer);
    bool inside = true;
    for (std::size_t k = 0; k < 2; ++k) {
      // One ulp of slack on each side for rounding of the log-space form.
      inside = inside && p[k] >= std::nextafter(avg[k], 0.0) && p[k] <= std::nextafter(mx[k], 1e300);
    }
    sandwich += inside;

    layer.l = 20.0;
    const PooledVector p20 = ppool_forward(A, layer);
    for (std::size_t k = 0; k < 2; ++k) {
      const double g = std::fabs(p20[k] - mx[k]) / mx[k];
      gap20_sum += g;
      gap20_max = std::max(gap20_max, g);
      gap20_within += g < 0.02;
      ++channels;
    }
  }
  const double gap20_mean = gap20_sum / static_cast<double>(channels);
  const bool pass = gap_equal == cases && sandwich == cases && gap20_mean < 0.02;
  return {pass, "l=1 equals GAP bit-exactly in " + std::to_string(gap_equal) + "/" +
                    std::to_string(cases) + "; gap <= ppool <= gmp in " + std::to_string(sandwich) +
                    "/" + std::to_string(cases) + "; l=20 |ppool-gmp|/gmp mean " +
                    fmt("%.4f", gap20_mean) + " (need < 0.02), max " + fmt("%.4f", gap20_max) +
                    ", " + fmt("%.2f", 100.0 * static_cast<double>(gap20_within) / static_cast<double>(channels)) +
                    "% of channels < 0.02 (per-channel bound is not a theorem)"};
}

Outcome criterion3() {
  const auto t0 = Clock::now();
  Rng rng = Rng::stream(3, "acceptance.cgram");
  double worst_share = 1.0;
  double right_mass = 0.0;
  double far_right_mass = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t h = 4 + rng.below(5), w = 2 * (2 + rng.below(4));
    testing::RegionNet net(3, h, w, 6, 4, [w](std::size_t, std::size_t j) { return j < w / 2; },
                           rng.next_u64());
    const Tensor q = testing::random_tensor({3, h, w}, rng, 0.0, 1.0);
    const Tensor g = testing::random_tensor({3, h, w}, rng, 0.0, 1.0);
    const CgRamResult r = cg_ram(net, q, g);
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) (j < w / 2 ? left : right) += r.map.values.at(i, j);
    right_mass += right;
    if (left + right > 0) worst_share = std::min(worst_share, left / (left + right));

    // At image resolution (4x) only the one-cell interpolation band right of
    // the boundary may pick up mass from the left half.
    const SalientMap big = resize_map(r.map, 4 * h, 4 * w);
    for (std::size_t i = 0; i < 4 * h; ++i)
      for (std::size_t j = 2 * w + 4; j < 4 * w; ++j) far_right_mass += big.resized->at(i, j);
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_share >= 0.99 && right_mass == 0.0 && far_right_mass == 0.0;
  return {pass, "worst left-half share " + fmt("%.6f", worst_share) + ", right-half mass " +
                    fmt("%.1e", right_mass) + " at layer resolution; " + fmt("%.1e", far_right_mass) +
                    " beyond the interpolation band after 4x resize; over 50 pairs in " + fmt("%.2f", secs) + " s"};
}

ModelConfig desk_model_config(std::size_t ids) {
  ModelConfig m;
  m.backbone.stage_channels = {16, 32, 64, 64};
  m.backbone.input_height = 64;
  m.backbone.input_width = 32;
  m.num_identities = ids;
  m.seed = 4;
  return m;
}

Outcome criterion4() {
  const Model model(desk_model_config(20));
  Rng rng = Rng::stream(4, "acceptance.purity");
  const auto before = testing::snapshot(model);
  BesmConfig cfg;
  const TapId tap = model.resolve_tap(cfg.layer);
  std::size_t identical = 0;
  for (int b = 0; b < 20; ++b) {
    const Tensor x = testing::random_tensor({8, 3, 64, 32}, rng, -2.0, 2.0);
    const auto labels = testing::pk_labels(4, 2);
    ModelTap net(model, tap, Readout::kRetrieval, NormMode::kEval);
    (void)cg_ram(net, x.slice(0), x.slice(1));
    (void)batch_salient_maps(model, x, labels, cfg, NormMode::kBatch);
    (void)batch_salient_maps(model, x, labels, cfg, NormMode::kEval);
    identical += testing::snapshot(model) == before;
  }
  return {identical == 20, "parameters and running statistics bit-identical after " +
                               std::to_string(identical) + "/20 batches of cg_ram + batch_salient_maps"};
}

Outcome criterion5() {
  Rng rng = Rng::stream(5, "acceptance.besm");
  std::size_t exact = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t h = 3 + rng.below(14), w = 3 + rng.below(10);
    const std::size_t percent = 1 + rng.below(45);
    const double ratio = static_cast<double>(percent) / 100.0;
    // ceil(percent * H * W / 100) in integers.
    const std::size_t expect = (percent * h * w + 99) / 100;
    Tensor img = testing::random_tensor({1, 3, h, w}, rng, 0.05, 1.0);
    SalientMap map;
    map.values = Tensor({h, w});
    const bool coarse = t % 2 == 0;  // half the maps have many ties
    for (double& v : map.values.values()) v = coarse ? std::floor(rng.uniform(0.0, 5.0)) : rng.uniform();
    const std::vector<SalientMap> maps{map};
    const EraseResult r = erase_salient(img, maps, {true}, ratio);
    std::vector<std::size_t> zeroed;
    for (std::size_t p = 0; p < h * w; ++p) {
      bool all = true;
      for (std::size_t c = 0; c < 3; ++c) all = all && r.images.at(0, c, p / w, p % w) == 0.0;
      if (all) zeroed.push_back(p);
    }
    const std::vector<double> flat(map.values.values().begin(), map.values.values().end());
    const auto oracle_top = oracle::top_positions(flat, expect);
    exact += zeroed.size() == expect && zeroed == oracle_top && r.masks[0] == oracle_top;
  }

  BesmConfig never;
  never.P = 0.0;
  std::size_t untouched = 0;
  for (int b = 0; b < 100; ++b) {
    const Tensor x = testing::random_tensor({10, 3, 8, 6}, rng);
    std::vector<SalientMap> maps(10);
    for (auto& m : maps) m.values = testing::random_tensor({8, 6}, rng, 0.0, 1.0);
    const EraseResult r = erase(x, maps, never, rng);
    for (std::size_t n = 0; n < 10; ++n) untouched += r.images.slice(n) == x.slice(n);
  }

  const auto triggers = draw_triggers(10000, 0.3, rng);
  const double rate = static_cast<double>(std::count(triggers.begin(), triggers.end(), true)) / 1e4;
  const bool pass = exact == 100 && untouched == 1000 && std::fabs(rate - 0.3) <= 0.02;
  return {pass, std::to_string(exact) + "/100 maps erase exactly ceil(R*H*W) oracle top positions; P=0 leaves " +
                    std::to_string(untouched) + "/1000 images bit-identical; trigger rate " +
                    fmt("%.4f", rate) + " at P=0.3 over 10000 draws"};
}

Outcome criterion6() {
  std::string detail;
  bool pass = true;
  for (const bool on : {true, false}) {
    RunConfig cfg = preset_config("desk");
    cfg.set("train.epochs", "1");
    cfg.set("train.probe", "false");
    if (!on) cfg.set("besm.mode", "off");
    const RunOutcome run = run_training(cfg, {});
    const std::size_t want = on ? 2 : 1;
    pass = pass && run.fit.min_backward_per_step == want && run.fit.max_backward_per_step == want;
    detail += std::string(on ? "BESM on" : "BESM off") + ": " +
              std::to_string(run.fit.min_backward_per_step) + ".." +
              std::to_string(run.fit.max_backward_per_step) + " backward passes per step over " +
              std::to_string(run.fit.steps) + " steps" + (on ? "; " : "");
  }
  return {pass, detail};
}

Outcome criterion7() {
  Rng rng = Rng::stream(7, "acceptance.eval");
  std::size_t equal = 0;
  double worst_ap = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t nq = 1 + rng.below(10), ng = 2 + rng.below(29);
    const std::size_t d = 2 + rng.below(6);
    Tensor q = testing::random_tensor({nq, d}, rng);
    Tensor g = testing::random_tensor({ng, d}, rng);
    // Duplicate gallery rows exercise tie-breaking.
    for (std::size_t j = 1; j < ng; j += 4) {
      std::copy(g.row(j - 1).begin(), g.row(j - 1).end(), g.row(j).begin());
    }
    const int ids = 1 + static_cast<int>(rng.below(5)), cams = 1 + static_cast<int>(rng.below(4));
    std::vector<int> qp(nq), qc(nq), gp(ng), gc(ng);
    for (auto& v : qp) v = static_cast<int>(rng.below(ids));
    for (auto& v : qc) v = static_cast<int>(rng.below(cams));
    for (auto& v : gp) v = static_cast<int>(rng.below(ids));
    for (auto& v : gc) v = static_cast<int>(rng.below(cams));
    const EvalResult r = cmc_map(q, qp, qc, g, gp, gc, ng);
    const auto o = oracle::retrieval(testing::rows(q), qp, qc, testing::rows(g), gp, gc, ng);
    bool same = r.dropped_queries == o.dropped;
    for (std::size_t k = 0; k < ng; ++k) same = same && r.cmc[k] == static_cast<double>(o.cmc[k]);
    for (std::size_t i = 0; i < nq; ++i) {
      same = same && std::isnan(r.per_query_ap[i]) == !o.ap[i].has_value();
      if (o.ap[i]) {
        const double e = static_cast<double>(std::fabs(r.per_query_ap[i] - *o.ap[i]));
        worst_ap = std::max(worst_ap, e);
        same = same && e <= 1e-12;
      }
    }
    if (o.dropped < nq) {
      same = same && std::fabs(r.mAP - static_cast<double>(o.mAP)) <= 1e-12;
    }
    equal += same;
  }
  return {equal == 100, std::to_string(equal) +
                            "/100 instances: CMC curve and dropped-query count identical, per-query AP within " +
                            fmt("%.1e", worst_ap) + " (tolerance 1e-12)"};
}

Outcome criterion11() {
  const TrainConfig cfg;  // reference defaults
  const bool pass = lr_at(10, cfg) == 3.5e-4 && lr_at(40, cfg) == 3.5e-5 && lr_at(70, cfg) == 3.5e-6;
  return {pass, "lr_at(10) = " + fmt("%g", lr_at(10, cfg)) + ", lr_at(40) = " +
                    fmt("%g", lr_at(40, cfg)) + ", lr_at(70) = " + fmt("%g", lr_at(70, cfg)) +
                    ", each bit-equal to the decimal literal"};
}

Outcome criterion12() {
  // Echo written by a real (one-step) run on defaults plus the data root.
  RunConfig cfg;
  cfg.set("data.root", preset_data("desk").string());
  cfg.set("input.height", "64");
  cfg.set("input.width", "32");
  cfg.set("model.stage_channels", "8,8,8,8");
  cfg.set("train.epochs", "1");
  cfg.set("train.schedule", "proportional");
  cfg.set("train.probe", "false");
  const fs::path run_dir = work_root() / "defaults_run";
  fs::remove_all(run_dir);
  (void)run_training(cfg, run_dir);
  const json e = read_json(run_dir / "config.json");
  const bool pass = e["schema_version"] == kSchemaVersion && e["sampler"]["J"] == 16 &&
                    e["sampler"]["K"] == 4 && e["train"]["margin"] == 0.3 &&
                    e["besm"]["R"] == 0.1 && e["besm"]["P"] == 0.3 &&
                    e["train"]["weight_decay"] == 5e-4 && e["besm"]["layer"] == "esb.final";
  return {pass, "echo: J=" + e["sampler"]["J"].dump() + " K=" + e["sampler"]["K"].dump() +
                    " margin=" + e["train"]["margin"].dump() + " R=" + e["besm"]["R"].dump() +
                    " P=" + e["besm"]["P"].dump() + " weight_decay=" +
                    e["train"]["weight_decay"].dump() + " layer=" + e["besm"]["layer"].dump()};
}

// ---------------------------------------------------------------------------

struct TimedRun {
  RunOutcome run;
  double seconds = 0.0;
  fs::path dir;
};

TimedRun timed_run(const RunConfig& cfg, const std::string& tag) {
  TimedRun t;
  t.dir = work_root() / ("run_" + tag);
  fs::remove_all(t.dir);
  const auto t0 = Clock::now();
  t.run = run_training(cfg, t.dir);
  t.seconds = seconds_since(t0);
  std::cerr << "  " << tag << ": rank1 " << t.run.fit.eval->rank(1) << " mAP "
            << t.run.fit.eval->mAP << " in " << fmt("%.1f", t.seconds) << " s" << std::endl;
  return t;
}

Outcome criterion8() {
  RunConfig base = preset_config("desk");
  as_base(base);
  const RunConfig esnet = preset_config("desk");
  const TimedRun b = timed_run(base, "desk_base");
  const TimedRun e1 = timed_run(esnet, "desk_esnet");
  const TimedRun e2 = timed_run(esnet, "desk_esnet_repeat");
  const double rb = b.run.fit.eval->rank(1), re = e1.run.fit.eval->rank(1);
  const bool same = e1.run.fit.eval->cmc == e2.run.fit.eval->cmc &&
                    e1.run.fit.eval->mAP == e2.run.fit.eval->mAP &&
                    e1.run.fit.step_losses.back().total == e2.run.fit.step_losses.back().total;
  const double slowest = std::max({b.seconds, e1.seconds, e2.seconds});
  const bool pass = rb >= 0.80 && re >= 0.80 && slowest < 1800.0 && same;
  return {pass, "rank-1 Base " + fmt("%.3f", rb) + " (mAP " + fmt("%.3f", b.run.fit.eval->mAP) +
                    "), ES-Net " + fmt("%.3f", re) + " (mAP " + fmt("%.3f", e1.run.fit.eval->mAP) +
                    "), need >= 0.80; slowest run " + fmt("%.0f", slowest) +
                    " s (< 1800 s); same-seed repeat identical: " + (same ? "yes" : "no")};
}

struct SeedRuns {
  std::vector<TimedRun> base, esnet;
};

SeedRuns& hard_runs() {
  static SeedRuns runs = [] {
    SeedRuns r;
    for (int seed = 1; seed <= 5; ++seed) {
      RunConfig b = preset_config("hard");
      b.set("seed", std::to_string(seed));
      as_base(b);
      RunConfig e = preset_config("hard");
      e.set("seed", std::to_string(seed));
      r.base.push_back(timed_run(b, "hard_base_s" + std::to_string(seed)));
      r.esnet.push_back(timed_run(e, "hard_esnet_s" + std::to_string(seed)));
    }
    return r;
  }();
  return runs;
}

Outcome criterion9() {
  const SeedRuns& r = hard_runs();
  double mb = 0.0, me = 0.0;
  std::string per_seed;
  for (std::size_t i = 0; i < r.base.size(); ++i) {
    mb += r.base[i].run.fit.eval->mAP;
    me += r.esnet[i].run.fit.eval->mAP;
    per_seed += (i ? " " : "") + fmt("%+.3f", r.esnet[i].run.fit.eval->mAP - r.base[i].run.fit.eval->mAP);
  }
  mb /= static_cast<double>(r.base.size());
  me /= static_cast<double>(r.esnet.size());
  return {me >= mb - 0.01, "mean mAP over 5 seeds ES-Net " + fmt("%.4f", me) + " vs Base " +
                               fmt("%.4f", mb) + ", gap " + fmt("%+.4f", me - mb) +
                               " (bound >= -0.01); per-seed gaps " + per_seed};
}

Outcome criterion10() {
  const SeedRuns& r = hard_runs();
  bool all_csv = true;
  for (const auto* runs : {&r.base, &r.esnet}) {
    for (const TimedRun& t : *runs) {
      const auto rows = read_probe_csv(t.dir / "probe.csv");
      all_csv = all_csv && rows.size() == 40;
    }
  }
  double first = 0.0, last = 0.0;
  for (const TimedRun& t : r.base) {
    const ProbeTrend trend = probe_trend(read_probe_csv(t.dir / "probe.csv"));
    first += trend.first_quarter;
    last += trend.last_quarter;
  }
  first /= static_cast<double>(r.base.size());
  last /= static_cast<double>(r.base.size());
  return {all_csv && last > first,
          std::string("probe.csv with one row per epoch for all 10 runs: ") + (all_csv ? "yes" : "no") +
              "; Base mean (erased - clean) first quarter " + fmt("%.4f", first) +
              ", last quarter " + fmt("%.4f", last)};
}

}  // namespace

int main(int argc, char** argv) {
  bool fast = true, training = true;
  if (argc > 1 && std::strcmp(argv[1], "--fast") == 0) training = false;
  if (argc > 1 && std::strcmp(argv[1], "--training") == 0) fast = false;

  if (fast) {
    report(1, "P-pooling gradients vs finite differences", criterion1);
    report(2, "P-pooling limits", criterion2);
    report(3, "CG-RAM localization", criterion3);
    report(4, "CG-RAM purity", criterion4);
    report(5, "BESM exactness", criterion5);
    report(6, "backward-pass budget", criterion6);
    report(7, "evaluator equivalence", criterion7);
  }
  if (training) {
    report(8, "desk-scale training smoke", criterion8);
    report(9, "ES-Net vs Base direction (hard preset)", criterion9);
    report(10, "erasure-sensitivity probe trend (hard preset)", criterion10);
  }
  if (fast) {
    report(11, "schedule fidelity", criterion11);
    report(12, "defaults provenance", criterion12);
  }
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
