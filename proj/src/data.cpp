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

#include "sreid/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <regex>
#include <set>

#include "sreid/errors.hpp"

namespace sreid {

namespace fs = std::filesystem;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kQuery: return "query";
    case Split::kGallery: return "gallery";
  }
  return "?";
}

std::optional<ReidSample> parse_sample_name(const fs::path& path, Split split) {
  static const std::regex pattern(R"(^(\d+)_c(\d+)_[^/]*\.(png|jpg|jpeg)$)",
                                  std::regex::icase);
  const std::string name = path.filename().string();
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) return std::nullopt;
  try {
    return ReidSample{path, std::stoi(m[1].str()), std::stoi(m[2].str()), split};
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

Dataset ingest_directory(const fs::path& root) {
  Dataset ds;
  ds.root = root;
  if (!fs::is_directory(root)) throw DataError("dataset root not found: " + root.string());
  for (Split split : {Split::kTrain, Split::kQuery, Split::kGallery}) {
    const fs::path dir = root / std::string(to_string(split));
    if (!fs::is_directory(dir)) {
      throw DataError("missing split directory " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    auto& out = split == Split::kTrain ? ds.train : split == Split::kQuery ? ds.query : ds.gallery;
    for (const auto& f : files) {
      if (auto s = parse_sample_name(f, split)) {
        out.push_back(std::move(*s));
      } else {
        ds.warnings.push_back("skipping malformed file name " + f.string());
      }
    }
    if (out.empty()) throw DataError("split '" + std::string(to_string(split)) + "' is empty");
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic sprites

void SynthSpec::validate() const {
  if (train_identities < 2) throw ConfigError("synth: need at least 2 training identities");
  if (eval_identities < 1) throw ConfigError("synth: need at least 1 evaluation identity");
  if (cameras < 2) {
    throw ConfigError("synth: cross-camera evaluation needs at least 2 cameras");
  }
  if (queries_per_identity < 1 || images_per_identity <= queries_per_identity) {
    throw ConfigError("synth: images_per_identity must exceed queries_per_identity");
  }
  if (height < 8 || width < 8) throw ConfigError("synth: image size must be at least 8x8");
  if (!(dominance >= 0.0 && dominance <= 1.0)) throw ConfigError("synth: dominance in [0, 1]");
  if (!(accessory_dropout >= 0.0 && accessory_dropout < 1.0)) {
    throw ConfigError("synth: accessory_dropout in [0, 1)");
  }
  if (!(brightness_jitter >= 0.0 && brightness_jitter < 1.0) || max_blur < 0 ||
      shift_jitter < 0 || !(noise >= 0.0)) {
    throw ConfigError("synth: nuisance parameters out of range");
  }
  // Every query needs a gallery image of its identity under another camera.
  for (int pid = train_identities; pid < train_identities + eval_identities; ++pid) {
    for (int q = 0; q < queries_per_identity; ++q) {
      bool found = false;
      for (int g = queries_per_identity; g < images_per_identity; ++g) {
        found = found || (pid + q) % cameras != (pid + g) % cameras;
      }
      if (!found) {
        throw ConfigError("synth: query " + std::to_string(q) + " of identity " +
                          std::to_string(pid) + " has no cross-camera gallery match");
      }
    }
  }
}

nlohmann::json SynthSpec::to_json() const {
  return {{"train_identities", train_identities},
          {"eval_identities", eval_identities},
          {"images_per_identity", images_per_identity},
          {"queries_per_identity", queries_per_identity},
          {"cameras", cameras},
          {"height", height},
          {"width", width},
          {"dominance", dominance},
          {"accessory_dropout", accessory_dropout},
          {"brightness_jitter", brightness_jitter},
          {"max_blur", max_blur},
          {"shift_jitter", shift_jitter},
          {"noise", noise},
          {"seed", seed}};
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
  SynthSpec s;
  const nlohmann::json known = s.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("synth spec: unknown key '" + key + "'");
  }
  try {
    s.train_identities = j.value("train_identities", s.train_identities);
    s.eval_identities = j.value("eval_identities", s.eval_identities);
    s.images_per_identity = j.value("images_per_identity", s.images_per_identity);
    s.queries_per_identity = j.value("queries_per_identity", s.queries_per_identity);
    s.cameras = j.value("cameras", s.cameras);
    s.height = j.value("height", s.height);
    s.width = j.value("width", s.width);
    s.dominance = j.value("dominance", s.dominance);
    s.accessory_dropout = j.value("accessory_dropout", s.accessory_dropout);
    s.brightness_jitter = j.value("brightness_jitter", s.brightness_jitter);
    s.max_blur = j.value("max_blur", s.max_blur);
    s.shift_jitter = j.value("shift_jitter", s.shift_jitter);
    s.noise = j.value("noise", s.noise);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
  return s;
}

namespace {

struct Rgb {
  double r = 0, g = 0, b = 0;
};

Rgb hsv(double h, double s, double v) {
  h = (h - std::floor(h)) * 6.0;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

Rgb mix(Rgb a, Rgb b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

Rgb scale(Rgb c, double k) { return {c.r * k, c.g * k, c.b * k}; }

struct Identity {
  Rgb skin, hair, torso, torso2, legs, accessory;
  int pattern = 0;    // 0 solid, 1 stripes, 2 split
  int accessory_kind = 0;  // 0 bag left, 1 bag right, 2 hat, 3 scarf
};

Identity make_identity(const SynthSpec& spec, int pid) {
  Rng rng = Rng::stream(spec.seed, "synth.identity", static_cast<std::uint64_t>(pid));
  const double d = spec.dominance;
  const Rgb gray{0.5, 0.5, 0.5};
  // Dominance pulls body colors toward gray and leaves the accessory vivid.
  const double body_sat = 0.75 * (1.0 - 0.6 * d);
  auto body = [&] {
    const Rgb c = hsv(rng.uniform(), body_sat * rng.uniform(0.6, 1.0), rng.uniform(0.35, 0.9));
    return mix(c, gray, 0.6 * d);
  };
  static const Rgb skins[] = {{0.96, 0.80, 0.69}, {0.87, 0.67, 0.52}, {0.68, 0.48, 0.34},
                              {0.45, 0.31, 0.22}};
  Identity id;
  id.skin = skins[rng.below(4)];
  id.hair = hsv(rng.uniform(0.02, 0.12), 0.5, rng.uniform(0.1, 0.45));
  id.torso = body();
  id.torso2 = body();
  id.legs = body();
  id.pattern = static_cast<int>(rng.below(3));
  id.accessory_kind = static_cast<int>(rng.below(4));
  id.accessory = hsv(rng.uniform(), 0.95, rng.uniform(0.8, 1.0));
  return id;
}

struct Camera {
  Rgb background;
  Rgb floor;
  double brightness = 1.0;
  int blur = 0;
};

Camera make_camera(const SynthSpec& spec, int cam) {
  Rng rng = Rng::stream(spec.seed, "synth.camera", static_cast<std::uint64_t>(cam));
  Camera c;
  c.background = hsv(rng.uniform(), rng.uniform(0.1, 0.35), rng.uniform(0.3, 0.75));
  c.floor = scale(c.background, 0.7);
  c.brightness = 1.0 + rng.uniform(-spec.brightness_jitter, spec.brightness_jitter);
  c.blur = static_cast<int>(rng.below(static_cast<std::size_t>(spec.max_blur) + 1));
  return c;
}

bool inside(double x, double y, double x0, double x1, double y0, double y1) {
  return x >= x0 && x < x1 && y >= y0 && y < y1;
}

void box_blur(std::vector<double>& plane, std::size_t h, std::size_t w, int radius) {
  if (radius <= 0) return;
  std::vector<double> tmp(plane.size());
  const auto r = static_cast<std::ptrdiff_t>(radius);
  const auto hh = static_cast<std::ptrdiff_t>(h);
  const auto ww = static_cast<std::ptrdiff_t>(w);
  for (std::ptrdiff_t i = 0; i < hh; ++i)
    for (std::ptrdiff_t j = 0; j < ww; ++j) {
      double sum = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) sum += plane[i * ww + std::clamp(j + k, std::ptrdiff_t{0}, ww - 1)];
      tmp[i * ww + j] = sum / static_cast<double>(2 * r + 1);
    }
  for (std::ptrdiff_t i = 0; i < hh; ++i)
    for (std::ptrdiff_t j = 0; j < ww; ++j) {
      double sum = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) sum += tmp[std::clamp(i + k, std::ptrdiff_t{0}, hh - 1) * ww + j];
      plane[i * ww + j] = sum / static_cast<double>(2 * r + 1);
    }
}

}  // namespace

Image render_sprite(const SynthSpec& spec, int pid, int image_index, int cam) {
  const Identity id = make_identity(spec, pid);
  const Camera camera = make_camera(spec, cam);
  Rng rng = Rng::stream(spec.seed, "synth.image",
                        static_cast<std::uint64_t>(pid) * 4096 + static_cast<std::uint64_t>(image_index));
  const double jitter = static_cast<double>(spec.shift_jitter);
  const double dx = rng.uniform(-jitter, jitter) / static_cast<double>(spec.width);
  const double dy = rng.uniform(-jitter, jitter) / static_cast<double>(spec.height);
  const double zoom = rng.uniform(0.93, 1.07);
  const bool show_accessory = !rng.bernoulli(spec.accessory_dropout);
  const double s = 0.6 + 0.8 * spec.dominance;  // accessory size factor

  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  std::vector<double> planes[3];
  for (auto& p : planes) p.assign(h * w, 0.0);

  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const double py = (static_cast<double>(i) + 0.5) / static_cast<double>(h);
      const double px = (static_cast<double>(j) + 0.5) / static_cast<double>(w);
      const double y = (py - 0.5 - dy) / zoom + 0.5;
      const double x = (px - 0.5 - dx) / zoom + 0.5;

      Rgb c = py > 0.85 ? camera.floor : camera.background;
      if (inside(x, y, 0.30, 0.48, 0.55, 0.95) || inside(x, y, 0.52, 0.70, 0.55, 0.95)) {
        c = id.legs;
      }
      if (inside(x, y, 0.28, 0.72, 0.22, 0.56)) {
        bool second = false;
        if (id.pattern == 1) second = static_cast<int>((y - 0.22) / 0.057) % 2 == 1;
        if (id.pattern == 2) second = x >= 0.5;
        c = second ? id.torso2 : id.torso;
      }
      if (inside(x, y, 0.18, 0.28, 0.23, 0.50) || inside(x, y, 0.72, 0.82, 0.23, 0.50)) {
        c = scale(id.torso, 0.85);
      }
      const double ex = (x - 0.5) / 0.13;
      const double ey = (y - 0.13) / 0.09;
      if (ex * ex + ey * ey <= 1.0) c = y < 0.09 ? id.hair : id.skin;
      if (show_accessory) {
        bool hit = false;
        switch (id.accessory_kind) {
          case 0: hit = inside(x, y, 0.06, 0.06 + 0.2 * s, 0.34, 0.34 + 0.24 * s); break;
          case 1: hit = inside(x, y, 0.94 - 0.2 * s, 0.94, 0.34, 0.34 + 0.24 * s); break;
          case 2: hit = inside(x, y, 0.5 - 0.15 * s, 0.5 + 0.15 * s, 0.02, 0.02 + 0.07 * s); break;
          default: hit = inside(x, y, 0.26, 0.74, 0.22, 0.22 + 0.08 * s); break;
        }
        if (hit) c = id.accessory;
      }
      c = scale(c, camera.brightness);
      planes[0][i * w + j] = c.r;
      planes[1][i * w + j] = c.g;
      planes[2][i * w + j] = c.b;
    }

  Image out(h, w);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    box_blur(planes[ch], h, w, camera.blur);
  }
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double v = planes[ch][i * w + j] + spec.noise * rng.normal();
        out.pixel(i, j)[ch] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      }
  return out;
}

namespace {

std::string sample_name(int pid, int cam, int index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d_c%d_%04d.png", pid, cam + 1, index);
  return buf;
}

std::string file_crc(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
                          static_cast<uInt>(bytes.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace

SynthSummary generate_synthetic(const SynthSpec& spec, const fs::path& out_dir) {
  spec.validate();
  SynthSummary summary;
  nlohmann::json files = nlohmann::json::object();
  try {
    for (const char* split : {"train", "query", "gallery"}) {
      fs::remove_all(out_dir / split);
      fs::create_directories(out_dir / split);
    }
  } catch (const fs::filesystem_error& e) {
    throw DataError(std::string("synth: ") + e.what());
  }
  const int total = spec.train_identities + spec.eval_identities;
  for (int pid = 0; pid < total; ++pid) {
    const bool train = pid < spec.train_identities;
    for (int k = 0; k < spec.images_per_identity; ++k) {
      const int cam = (pid + k) % spec.cameras;
      const char* split = train ? "train" : k < spec.queries_per_identity ? "query" : "gallery";
      const fs::path rel = fs::path(split) / sample_name(pid, cam, k);
      write_png(out_dir / rel, render_sprite(spec, pid, k, cam));
      files[rel.generic_string()] = file_crc(out_dir / rel);
      if (train) {
        ++summary.train;
      } else if (k < spec.queries_per_identity) {
        ++summary.query;
      } else {
        ++summary.gallery;
      }
    }
  }
  const nlohmann::json manifest{{"spec", spec.to_json()}, {"files", files}};
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  return summary;
}

// ---------------------------------------------------------------------------
// Sampling

void SamplerConfig::validate() const {
  if (J < 2) throw ConfigError("sampler.J must be >= 2");
  if (K < 2) throw ConfigError("sampler.K must be >= 2");
}

PkSampler::PkSampler(std::vector<int> labels, SamplerConfig cfg, std::uint64_t seed)
    : labels_(std::move(labels)), cfg_(cfg), seed_(seed) {
  cfg_.validate();
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int l = labels_[i];
    if (l < 0) throw InvalidInput("sampler: negative label");
    if (static_cast<std::size_t>(l) >= by_label_.size()) by_label_.resize(static_cast<std::size_t>(l) + 1);
    by_label_[static_cast<std::size_t>(l)].push_back(i);
  }
  const auto present = static_cast<std::size_t>(
      std::count_if(by_label_.begin(), by_label_.end(), [](const auto& v) { return !v.empty(); }));
  if (present < cfg_.J) {
    throw DataError("sampler: " + std::to_string(present) + " identities available, J = " +
                    std::to_string(cfg_.J));
  }
}

std::vector<Batch> PkSampler::epoch(std::size_t index) const {
  Rng rng = Rng::stream(seed_, "sampler", index);
  const std::size_t k = cfg_.K;
  std::vector<std::vector<std::vector<std::size_t>>> groups(by_label_.size());
  for (std::size_t l = 0; l < by_label_.size(); ++l) {
    if (by_label_[l].empty()) continue;
    std::vector<std::size_t> pool = by_label_[l];
    rng.shuffle(pool);
    while (pool.size() < k) pool.push_back(by_label_[l][rng.below(by_label_[l].size())]);
    for (std::size_t start = 0; start + k <= pool.size(); start += k) {
      groups[l].emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(start),
                             pool.begin() + static_cast<std::ptrdiff_t>(start + k));
    }
  }
  std::vector<Batch> batches;
  while (true) {
    std::vector<std::size_t> available;
    for (std::size_t l = 0; l < groups.size(); ++l) {
      if (!groups[l].empty()) available.push_back(l);
    }
    if (available.size() < cfg_.J) break;
    rng.shuffle(available);
    available.resize(cfg_.J);
    std::sort(available.begin(), available.end());
    Batch batch;
    for (std::size_t l : available) {
      for (std::size_t i : groups[l].back()) {
        batch.indices.push_back(i);
        batch.labels.push_back(static_cast<int>(l));
      }
      groups[l].pop_back();
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<int> contiguous_labels(const std::vector<ReidSample>& samples,
                                   std::size_t* num_identities) {
  std::set<int> pids;
  for (const auto& s : samples) pids.insert(s.pid);
  std::map<int, int> index;
  for (int pid : pids) index.emplace(pid, static_cast<int>(index.size()));
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(index.at(s.pid));
  if (num_identities) *num_identities = pids.size();
  return out;
}

// ---------------------------------------------------------------------------
// Augmentation

void AugmentConfig::validate() const {
  if (height == 0 || width == 0) throw ConfigError("input size must be positive");
  for (double s : std) {
    if (!(s > 0.0)) throw ConfigError("normalization std must be positive");
  }
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ConfigError("flip probability must be in [0, 1]");
  }
}

Tensor augment(const Tensor& image01, Rng& rng, AugmentMode mode, const AugmentConfig& cfg) {
  if (image01.rank() != 3 || image01.dim(0) != 3) {
    throw InvalidInput("augment: expected (3, H, W), got " + shape_string(image01.shape()));
  }
  Tensor t = resize_chw(image01, cfg.height, cfg.width);
  if (mode == AugmentMode::kTrain && rng.bernoulli(cfg.flip_probability)) {
    t = flip_horizontal(t);
  }
  const std::size_t plane = cfg.height * cfg.width;
  for (std::size_t c = 0; c < 3; ++c) {
    double* p = t.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] = (p[i] - cfg.mean[c]) / cfg.std[c];
  }
  return t;
}

Tensor augment(const Image& image, Rng& rng, AugmentMode mode, const AugmentConfig& cfg) {
  return augment(to_tensor(image), rng, mode, cfg);
}

Tensor denormalize(const Tensor& chw, const AugmentConfig& cfg) {
  Tensor t = chw;
  const std::size_t plane = chw.dim(1) * chw.dim(2);
  for (std::size_t c = 0; c < 3; ++c) {
    double* p = t.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] = p[i] * cfg.std[c] + cfg.mean[c];
  }
  return t;
}

std::vector<Tensor> load_images(const std::vector<ReidSample>& samples, std::size_t height,
                                std::size_t width) {
  std::vector<Tensor> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(resize_chw(to_tensor(read_image(s.path)), height, width));
  return out;
}

Tensor make_test_batch(const std::vector<Tensor>& images, std::span<const std::size_t> indices,
                       const AugmentConfig& cfg) {
  Rng unused(0);
  std::vector<Tensor> items;
  items.reserve(indices.size());
  for (std::size_t i : indices) items.push_back(augment(images.at(i), unused, AugmentMode::kTest, cfg));
  return Tensor::stack(items);
}

Tensor make_train_batch(const std::vector<Tensor>& images, std::span<const std::size_t> indices,
                        const AugmentConfig& cfg, Rng& rng) {
  std::vector<Tensor> items;
  items.reserve(indices.size());
  for (std::size_t i : indices) items.push_back(augment(images.at(i), rng, AugmentMode::kTrain, cfg));
  return Tensor::stack(items);
}

}  // namespace sreid
