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

#include "sreid/model.hpp"

#include <cmath>
#include <limits>

#include "sreid/errors.hpp"
#include "sreid/kernels.hpp"

namespace sreid {

namespace {

constexpr std::size_t kNoStop = std::numeric_limits<std::size_t>::max();

std::string stage_label(std::size_t stage) { return "stage" + std::to_string(stage + 1); }

}  // namespace

std::string_view to_string(Branch branch) {
  return branch == Branch::kAib ? "aib" : "esb";
}

void BackboneConfig::validate() const {
  if (stage_channels.empty()) throw ConfigError("model: no stages");
  for (std::size_t c : stage_channels) {
    if (c == 0) throw ConfigError("model: stage with zero channels");
  }
  if (stem_stages == 0 || stem_stages >= stage_channels.size()) {
    throw ConfigError("model: stem_stages must be in [1, " +
                      std::to_string(stage_channels.size() - 1) +
                      "] so that each branch owns at least one stage");
  }
  if (convs_per_stage == 0) throw ConfigError("model: convs_per_stage must be >= 1");
  if (last_stage_stride == 0 || last_stage_stride > 2) {
    throw ConfigError("model: last_stage_stride must be 1 or 2");
  }
  if (input_height == 0 || input_width == 0) throw ConfigError("model: empty input size");
}

std::size_t BackboneConfig::stage_stride(std::size_t stage) const {
  return stage + 1 == stage_channels.size() ? last_stage_stride : 2;
}

std::pair<std::size_t, std::size_t> BackboneConfig::stage_extent(std::size_t stage) const {
  std::size_t h = input_height;
  std::size_t w = input_width;
  for (std::size_t s = 0; s <= stage; ++s) {
    const std::size_t st = stage_stride(s);
    h = (h - 1) / st + 1;
    w = (w - 1) / st + 1;
  }
  return {h, w};
}

void ModelConfig::validate() const {
  backbone.validate();
  if (num_identities == 0) throw ConfigError("model: num_identities must be > 0");
  if (aib.pooling == PoolingMode::kPPool || esb.pooling == PoolingMode::kPPool) {
    ppool.validate();
  }
}

const BranchTrace& Pass::branch(Branch b) const {
  const auto& t = b == Branch::kAib ? aib : esb;
  if (!t) {
    throw InvalidInput("pass has no " + std::string(to_string(b)) + " branch");
  }
  return *t;
}

Model::Model(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  const auto& bb = config_.backbone;
  for (std::size_t s = 0; s < bb.stem_stages; ++s) {
    stem_.push_back(make_stage("stem." + stage_label(s), s, rng));
  }
  for (Branch b : {Branch::kAib, Branch::kEsb}) {
    BranchNet& n = net(b);
    const std::string prefix(to_string(b));
    for (std::size_t s = bb.stem_stages; s < bb.stage_channels.size(); ++s) {
      n.stages.push_back(make_stage(prefix + "." + stage_label(s), s, rng));
    }
    n.head = make_head(prefix, b == Branch::kAib ? config_.aib : config_.esb, rng);
  }
}

Model::Stage Model::make_stage(const std::string& prefix, std::size_t stage,
                               Rng& rng) const {
  const auto& bb = config_.backbone;
  Stage out;
  std::size_t in = stage == 0 ? 3 : bb.stage_channels[stage - 1];
  const std::size_t ch = bb.stage_channels[stage];
  for (std::size_t u = 0; u < bb.convs_per_stage; ++u) {
    const std::string name = prefix + ".unit" + std::to_string(u + 1);
    const std::size_t stride = u == 0 ? bb.stage_stride(stage) : 1;
    out.push_back(Unit{Conv3x3(name + ".conv", in, ch, stride, rng),
                       BatchNorm(name + ".bn", ch)});
    in = ch;
  }
  return out;
}

Model::Head Model::make_head(const std::string& prefix, const BranchHead& cfg,
                             Rng& rng) const {
  const std::size_t d = embedding_dim();
  Head h;
  h.pooling = cfg.pooling;
  h.ppool = config_.ppool;
  if (cfg.pooling == PoolingMode::kPPool) {
    h.exponent = Parameter(prefix + ".ppool.l", Tensor({1}, config_.ppool.l), false);
  }
  h.neck = BatchNorm(prefix + ".neck", d, /*learn_bias=*/false);
  if (!cfg.bn_neck) {
    h.neck.gamma.trainable = false;
  }
  h.classifier = Linear(prefix + ".classifier", d, config_.num_identities, 0.001, rng);
  return h;
}

PPoolingLayer Model::current_ppool(const Head& head) const {
  PPoolingLayer layer = head.ppool;
  if (head.pooling == PoolingMode::kPPool) layer.l = head.exponent.value[0];
  return layer;
}

bool Model::has_ppool(Branch b) const { return net(b).head.pooling == PoolingMode::kPPool; }

PPoolingLayer Model::ppool(Branch b) const { return current_ppool(net(b).head); }

void Model::clamp_pooling() {
  for (Branch b : {Branch::kAib, Branch::kEsb}) {
    Head& h = net(b).head;
    if (h.pooling != PoolingMode::kPPool) continue;
    PPoolingLayer layer = current_ppool(h);
    layer.clamp();
    h.exponent.value[0] = layer.l;
  }
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  auto add_stage = [&](Stage& st) {
    for (Unit& u : st) {
      out.push_back(&u.conv.weight);
      out.push_back(&u.bn.gamma);
      out.push_back(&u.bn.beta);
    }
  };
  for (Stage& st : stem_) add_stage(st);
  for (Branch b : {Branch::kAib, Branch::kEsb}) {
    BranchNet& n = net(b);
    for (Stage& st : n.stages) add_stage(st);
    if (n.head.pooling == PoolingMode::kPPool) out.push_back(&n.head.exponent);
    out.push_back(&n.head.neck.gamma);
    out.push_back(&n.head.neck.beta);
    out.push_back(&n.head.classifier.weight);
  }
  std::erase_if(out, [](const Parameter* p) { return !p->trainable; });
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  auto mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<const Parameter*> Model::stem_parameters() const {
  std::vector<const Parameter*> out;
  for (const Stage& st : stem_)
    for (const Unit& u : st) {
      out.push_back(&u.conv.weight);
      out.push_back(&u.bn.gamma);
      out.push_back(&u.bn.beta);
    }
  return out;
}

std::vector<const Parameter*> Model::branch_parameters(Branch b) const {
  std::vector<const Parameter*> out;
  const BranchNet& n = net(b);
  for (const Stage& st : n.stages)
    for (const Unit& u : st) {
      out.push_back(&u.conv.weight);
      out.push_back(&u.bn.gamma);
      out.push_back(&u.bn.beta);
    }
  if (n.head.pooling == PoolingMode::kPPool) out.push_back(&n.head.exponent);
  out.push_back(&n.head.neck.gamma);
  out.push_back(&n.head.neck.beta);
  out.push_back(&n.head.classifier.weight);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

std::vector<std::pair<std::string, Tensor*>> Model::state() {
  std::vector<std::pair<std::string, Tensor*>> out;
  auto add_bn = [&](BatchNorm& bn) {
    const std::string& g = bn.gamma.name;
    const std::string prefix = g.substr(0, g.size() - std::string(".gamma").size());
    out.emplace_back(bn.gamma.name, &bn.gamma.value);
    out.emplace_back(bn.beta.name, &bn.beta.value);
    out.emplace_back(prefix + ".running_mean", &bn.running_mean);
    out.emplace_back(prefix + ".running_var", &bn.running_var);
  };
  auto add_stage = [&](Stage& st) {
    for (Unit& u : st) {
      out.emplace_back(u.conv.weight.name, &u.conv.weight.value);
      add_bn(u.bn);
    }
  };
  for (Stage& st : stem_) add_stage(st);
  for (Branch b : {Branch::kAib, Branch::kEsb}) {
    BranchNet& n = net(b);
    for (Stage& st : n.stages) add_stage(st);
    if (n.head.pooling == PoolingMode::kPPool) {
      out.emplace_back(n.head.exponent.name, &n.head.exponent.value);
    }
    add_bn(n.head.neck);
    out.emplace_back(n.head.classifier.weight.name, &n.head.classifier.weight.value);
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> Model::state() const {
  auto mut = const_cast<Model*>(this)->state();
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : mut) out.emplace_back(name, t);
  return out;
}

std::vector<std::string> Model::tap_names() const {
  std::vector<std::string> out;
  const auto& bb = config_.backbone;
  for (std::size_t s = 0; s < bb.stem_stages; ++s) out.push_back("stem." + stage_label(s));
  for (const char* b : {"aib", "esb"}) {
    for (std::size_t s = bb.stem_stages; s < bb.stage_channels.size(); ++s) {
      out.push_back(std::string(b) + "." + stage_label(s));
    }
    out.push_back(std::string(b) + ".final");
  }
  return out;
}

TapId Model::resolve_tap(std::string_view name) const {
  const auto& bb = config_.backbone;
  const std::size_t last = bb.stage_channels.size() - 1;
  const auto dot = name.find('.');
  if (dot != std::string_view::npos) {
    const std::string_view scope = name.substr(0, dot);
    const std::string_view rest = name.substr(dot + 1);
    std::optional<TapId::Scope> sc;
    if (scope == "stem") sc = TapId::Scope::kStem;
    if (scope == "aib") sc = TapId::Scope::kAib;
    if (scope == "esb") sc = TapId::Scope::kEsb;
    if (sc) {
      if (rest == "final" && *sc != TapId::Scope::kStem) return TapId{*sc, last};
      if (rest.starts_with("stage")) {
        std::size_t idx = 0;
        bool ok = rest.size() > 5;
        for (char c : rest.substr(5)) {
          if (c < '0' || c > '9') ok = false;
          idx = idx * 10 + static_cast<std::size_t>(c - '0');
        }
        if (ok && idx >= 1) {
          const std::size_t stage = idx - 1;
          const bool in_stem = stage < bb.stem_stages;
          if (stage <= last && in_stem == (*sc == TapId::Scope::kStem)) {
            return TapId{*sc, stage};
          }
        }
      }
    }
  }
  std::string known;
  for (const auto& n : tap_names()) known += (known.empty() ? "" : ", ") + n;
  throw TapError("unknown layer tap '" + std::string(name) + "' (known: " + known + ")");
}

std::string Model::tap_name(TapId tap) const {
  switch (tap.scope) {
    case TapId::Scope::kStem: return "stem." + stage_label(tap.stage);
    case TapId::Scope::kAib: return "aib." + stage_label(tap.stage);
    case TapId::Scope::kEsb: return "esb." + stage_label(tap.stage);
  }
  return {};
}

const Tensor& Model::tapped(const Pass& pass, TapId tap) const {
  const std::size_t stem_n = config_.backbone.stem_stages;
  switch (tap.scope) {
    case TapId::Scope::kStem: return pass.stem.at(tap.stage).output();
    case TapId::Scope::kAib: return pass.branch(Branch::kAib).stages.at(tap.stage - stem_n).output();
    case TapId::Scope::kEsb: return pass.branch(Branch::kEsb).stages.at(tap.stage - stem_n).output();
  }
  throw TapError("bad tap");
}

StageTrace Model::run_stage(const Stage& stage, const Tensor& x, NormMode mode) const {
  StageTrace trace;
  const Tensor* in = &x;
  for (const Unit& u : stage) {
    UnitTrace t;
    t.input = *in;
    Tensor z = u.conv.forward(t.input);
    z = u.bn.forward(z, mode == NormMode::kBatch, t.bn);
    t.output = relu(z);
    trace.units.push_back(std::move(t));
    in = &trace.units.back().output;
  }
  return trace;
}

HeadTrace Model::run_head(const Head& head, const Tensor& fmap, NormMode mode) const {
  HeadTrace t;
  t.feature_map = fmap;
  t.pooled = kernels::pool_forward(head.pooling, fmap, current_ppool(head));
  if (head.neck.gamma.trainable) {
    t.neck = head.neck.forward(t.pooled, mode == NormMode::kBatch, t.neck_cache);
  } else {
    t.neck = t.pooled;
  }
  t.logits = head.classifier.forward(t.neck);
  return t;
}

BranchTrace Model::run_branch(const BranchNet& b, const Tensor& x, NormMode mode,
                              std::size_t first_stage) const {
  BranchTrace trace;
  const std::size_t stem_n = config_.backbone.stem_stages;
  const Tensor* in = &x;
  for (std::size_t j = first_stage - stem_n; j < b.stages.size(); ++j) {
    trace.stages.push_back(run_stage(b.stages[j], *in, mode));
    in = &trace.stages.back().output();
  }
  trace.head = run_head(b.head, *in, mode);
  return trace;
}

Pass Model::forward(const Tensor& images, NormMode mode, bool with_aib, bool with_esb) const {
  const auto& bb = config_.backbone;
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != bb.input_height ||
      images.dim(3) != bb.input_width) {
    throw InvalidInput("model: expected images (N, 3, " + std::to_string(bb.input_height) +
                       ", " + std::to_string(bb.input_width) + "), got " +
                       shape_string(images.shape()));
  }
  Pass pass;
  pass.mode = mode;
  const Tensor* in = &images;
  for (const Stage& st : stem_) {
    pass.stem.push_back(run_stage(st, *in, mode));
    in = &pass.stem.back().output();
  }
  if (with_aib) add_branch(pass, Branch::kAib);
  if (with_esb) add_branch(pass, Branch::kEsb);
  return pass;
}

void Model::add_branch(Pass& pass, Branch b) const {
  auto& slot = b == Branch::kAib ? pass.aib : pass.esb;
  slot = run_branch(net(b), pass.stem_output(), pass.mode, config_.backbone.stem_stages);
}

void Model::update_running(Stage& stage, const StageTrace& trace) {
  for (std::size_t u = 0; u < stage.size(); ++u) {
    const Tensor& out = trace.units[u].output;
    stage[u].bn.update_running(trace.units[u].bn, out.dim(0) * out.dim(2) * out.dim(3));
  }
}

void Model::update_running(BranchNet& b, const BranchTrace& trace) {
  const std::size_t offset = b.stages.size() - trace.stages.size();
  for (std::size_t j = 0; j < trace.stages.size(); ++j) {
    update_running(b.stages[offset + j], trace.stages[j]);
  }
  if (b.head.neck.gamma.trainable) {
    b.head.neck.update_running(trace.head.neck_cache, trace.head.pooled.dim(0));
  }
}

Pass Model::forward_train(const Tensor& images, bool with_aib, bool with_esb) {
  Pass pass = forward(images, NormMode::kBatch, false, false);
  for (std::size_t s = 0; s < stem_.size(); ++s) update_running(stem_[s], pass.stem[s]);
  if (with_aib) add_branch_train(pass, Branch::kAib);
  if (with_esb) add_branch_train(pass, Branch::kEsb);
  return pass;
}

void Model::add_branch_train(Pass& pass, Branch b) {
  if (pass.mode != NormMode::kBatch) throw InvalidInput("add_branch_train on an eval pass");
  add_branch(pass, b);
  update_running(net(b), pass.branch(b));
}

BranchTrace Model::forward_from_tap(TapId tap, const Tensor& activation, Branch b,
                                    NormMode mode) const {
  const std::size_t stem_n = config_.backbone.stem_stages;
  if (tap.scope == TapId::Scope::kStem) {
    const Tensor* in = &activation;
    std::vector<StageTrace> rest;
    for (std::size_t s = tap.stage + 1; s < stem_n; ++s) {
      rest.push_back(run_stage(stem_[s], *in, mode));
      in = &rest.back().output();
    }
    return run_branch(net(b), *in, mode, stem_n);
  }
  const Branch owner = tap.scope == TapId::Scope::kAib ? Branch::kAib : Branch::kEsb;
  if (owner != b) {
    throw TapError("tap " + tap_name(tap) + " is not upstream of the " +
                   std::string(to_string(b)) + " branch");
  }
  return run_branch(net(b), activation, mode, tap.stage + 1);
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

Tensor Model::backward_stage(const Stage& stage, const StageTrace& trace, const Tensor& dy,
                             bool accumulate) const {
  Tensor d = dy;
  for (std::size_t u = stage.size(); u-- > 0;) {
    const Unit& unit = stage[u];
    const UnitTrace& t = trace.units[u];
    d = relu_backward(t.output, d);
    d = unit.bn.backward(d, t.bn, accumulate ? const_cast<Tensor*>(&unit.bn.gamma.grad) : nullptr,
                         accumulate ? const_cast<Tensor*>(&unit.bn.beta.grad) : nullptr);
    d = unit.conv.backward(t.input, d,
                           accumulate ? const_cast<Tensor*>(&unit.conv.weight.grad) : nullptr);
  }
  return d;
}

Tensor Model::backward_head(const Head& head, const HeadTrace& t, const HeadGrad& g,
                            bool accumulate) const {
  const std::size_t n = t.pooled.dim(0);
  const std::size_t d = t.pooled.dim(1);
  Tensor d_neck = g.neck.empty() ? Tensor({n, d}) : g.neck;
  if (!g.logits.empty()) {
    d_neck += head.classifier.backward(
        t.neck, g.logits,
        accumulate ? const_cast<Tensor*>(&head.classifier.weight.grad) : nullptr);
  }
  Tensor d_pooled = g.pooled.empty() ? Tensor({n, d}) : g.pooled;
  if (head.neck.gamma.trainable) {
    d_pooled += head.neck.backward(
        d_neck, t.neck_cache,
        accumulate ? const_cast<Tensor*>(&head.neck.gamma.grad) : nullptr,
        accumulate && head.neck.beta.trainable ? const_cast<Tensor*>(&head.neck.beta.grad)
                                               : nullptr);
  } else {
    d_pooled += d_neck;
  }
  kernels::PoolGrad pg =
      kernels::pool_backward(head.pooling, t.feature_map, current_ppool(head), d_pooled);
  if (accumulate && head.pooling == PoolingMode::kPPool) {
    const_cast<Tensor&>(head.exponent.grad)[0] += pg.l;
  }
  return std::move(pg.input);
}

Tensor Model::backward_branch(const BranchNet& b, const BranchTrace& trace,
                              const HeadGrad& g, std::size_t stop_stage,
                              bool accumulate) const {
  const std::size_t stem_n = config_.backbone.stem_stages;
  Tensor d = backward_head(b.head, trace.head, g, accumulate);
  const std::size_t offset = b.stages.size() - trace.stages.size();
  for (std::size_t j = trace.stages.size(); j-- > 0;) {
    if (stem_n + offset + j == stop_stage) return d;
    d = backward_stage(b.stages[offset + j], trace.stages[j], d, accumulate);
  }
  return d;
}

Tensor Model::backward_stem(const Pass& pass, Tensor d, std::size_t stop_stage,
                            bool accumulate) const {
  for (std::size_t s = stem_.size(); s-- > 0;) {
    if (s == stop_stage) return d;
    d = backward_stage(stem_[s], pass.stem[s], d, accumulate);
  }
  return d;
}

void Model::backward(std::span<const PassGrad> items) {
  ++backward_passes_;
  const std::size_t stem_out = config_.backbone.stem_stages - 1;
  for (const PassGrad& item : items) {
    Tensor d_stem;
    for (Branch b : {Branch::kAib, Branch::kEsb}) {
      const HeadGrad& g = b == Branch::kAib ? item.aib : item.esb;
      if (g.empty()) continue;
      Tensor d = backward_branch(net(b), item.pass->branch(b), g, stem_out, true);
      if (d_stem.empty()) {
        d_stem = std::move(d);
      } else {
        d_stem += d;
      }
    }
    if (!d_stem.empty()) backward_stem(*item.pass, std::move(d_stem), kNoStop, true);
  }
}

Tensor Model::backward_to_tap(const Pass& pass, TapId tap, const HeadGrad& aib,
                              const HeadGrad& esb) const {
  ++backward_passes_;
  const std::size_t stem_out = config_.backbone.stem_stages - 1;
  if (tap.scope != TapId::Scope::kStem) {
    const Branch b = tap.scope == TapId::Scope::kAib ? Branch::kAib : Branch::kEsb;
    const HeadGrad& g = b == Branch::kAib ? aib : esb;
    if (g.empty()) return Tensor(tapped(pass, tap).shape());
    return backward_branch(net(b), pass.branch(b), g, tap.stage, false);
  }
  Tensor d_stem;
  for (Branch b : {Branch::kAib, Branch::kEsb}) {
    const HeadGrad& g = b == Branch::kAib ? aib : esb;
    if (g.empty()) continue;
    Tensor d = backward_branch(net(b), pass.branch(b), g, stem_out, false);
    if (d_stem.empty()) {
      d_stem = std::move(d);
    } else {
      d_stem += d;
    }
  }
  if (d_stem.empty()) return Tensor(tapped(pass, tap).shape());
  return backward_stem(pass, std::move(d_stem), tap.stage, false);
}

Tensor l2_normalize_rows(const Tensor& x) {
  Tensor y(x.shape());
  const std::size_t d = x.dim(1);
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) sq += x.at(n, i) * x.at(n, i);
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0)) {
      throw NumericError("l2 normalize: zero-norm embedding in row " + std::to_string(n));
    }
    for (std::size_t i = 0; i < d; ++i) y.at(n, i) = x.at(n, i) / norm;
  }
  return y;
}

Tensor l2_normalize_rows_backward(const Tensor& x, const Tensor& dy) {
  // d(x/|x|) = (dy - u <u, dy>) / |x|
  Tensor dx(x.shape());
  const std::size_t d = x.dim(1);
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) sq += x.at(n, i) * x.at(n, i);
    const double norm = std::sqrt(sq);
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += x.at(n, i) * dy.at(n, i);
    dot /= norm;
    for (std::size_t i = 0; i < d; ++i) {
      dx.at(n, i) = (dy.at(n, i) - (x.at(n, i) / norm) * dot) / norm;
    }
  }
  return dx;
}

Tensor infer_descriptors(const Model& model, const Tensor& images) {
  const Pass plain = model.forward(images, NormMode::kEval, true, true);
  const Pass mirrored = model.forward(flip_horizontal(images), NormMode::kEval, true, true);
  const std::size_t n = images.dim(0);
  const std::size_t d = model.embedding_dim();
  Tensor out({n, 2 * d});
  for (Branch b : {Branch::kAib, Branch::kEsb}) {
    Tensor avg({n, d});
    const Tensor& a = plain.head(b).neck;
    const Tensor& m = mirrored.head(b).neck;
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = 0.5 * (a[i] + m[i]);
    const Tensor unit = l2_normalize_rows(avg);
    const std::size_t offset = b == Branch::kAib ? 0 : d;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < d; ++i) out.at(r, offset + i) = unit.at(r, i);
  }
  return out;
}

std::vector<double> infer_descriptor(const Model& model, const Tensor& image) {
  if (image.rank() != 3) {
    throw InvalidInput("infer_descriptor: expected (3, H, W), got " + shape_string(image.shape()));
  }
  const Tensor batch = Tensor::stack(std::span<const Tensor>(&image, 1));
  const Tensor d = infer_descriptors(model, batch);
  return {d.values().begin(), d.values().end()};
}

}  // namespace sreid
