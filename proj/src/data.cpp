/* Copyright 2026 The setdet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "setdet/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "setdet/error.hpp"

namespace setdet {

using json = nlohmann::json;

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (unsigned char ch : tag) h = mix(h ^ ch);
  return mix(h ^ mix(index));
}

std::vector<Point2> region_centers(int width, int height,
                                   const RegionLayout& layout) {
  std::vector<Point2> out;
  const int rows = height / layout.stride;
  const int cols = width / layout.stride;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out.push_back({layout.stride * c + 0.5 * layout.stride,
                     layout.stride * r + 0.5 * layout.stride});
    }
  }
  return out;
}

bool in_central_region(double x, double y, const Point2& center,
                       int region_size) {
  const double half = 0.5 * region_size;
  return center.x - half <= x && x < center.x + half && center.y - half <= y &&
         y < center.y + half;
}

void SceneConfig::validate() const {
  if (width <= 0 || height <= 0) throw Error("scene size must be positive");
  if (min_boxes < 0 || max_boxes < min_boxes) {
    throw Error("need 0 <= min_boxes <= max_boxes");
  }
  if (!(min_size > 0.0) || max_size < min_size) {
    throw Error("need 0 < min_size <= max_size");
  }
  if (!(aspect > 0.0)) throw Error("aspect must be positive");
  if (max_size > width || max_size * aspect > height) {
    throw Error("infeasible scene config: boxes larger than the image");
  }
  if (overlap_fraction < 0.0 || overlap_fraction > 1.0 ||
      partner_probability < 0.0 || partner_probability > 1.0) {
    throw Error("overlap probabilities must lie in [0, 1]");
  }
  if (max_per_region < 0) throw Error("max_per_region must be >= 0");
  if (layout.stride <= 0 || layout.region_size <= 0) {
    throw Error("region layout must be positive");
  }
}

namespace {

bool inside_image(const BoxGeometry& b, int width, int height) {
  return b.left() >= 0.0 && b.top() >= 0.0 && b.right() <= width &&
         b.bottom() <= height;
}

bool region_cap_ok(const std::vector<BoxGeometry>& boxes,
                   const BoxGeometry& extra,
                   const std::vector<Point2>& centers,
                   const SceneConfig& cfg) {
  for (const Point2& c : centers) {
    if (!in_central_region(extra.x, extra.y, c, cfg.layout.region_size)) {
      continue;
    }
    int count = 1;
    for (const BoxGeometry& b : boxes) {
      if (in_central_region(b.x, b.y, c, cfg.layout.region_size)) ++count;
    }
    if (count > cfg.max_per_region) return false;
  }
  return true;
}

}  // namespace

Scene generate_scene(Rng& rng, const SceneConfig& cfg, std::string id) {
  cfg.validate();
  Scene scene;
  scene.id = std::move(id);
  scene.width = cfg.width;
  scene.height = cfg.height;

  const auto centers = region_centers(cfg.width, cfg.height, cfg.layout);
  std::uniform_int_distribution<int> count_dist(cfg.min_boxes, cfg.max_boxes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count_dist(rng);
  const bool occlusion_scene = unit(rng) < cfg.overlap_fraction;
  bool have_pair = false;

  for (int k = 0; k < n; ++k) {
    const bool partner =
        occlusion_scene && !scene.boxes.empty() &&
        (!have_pair || unit(rng) < cfg.partner_probability);
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      const double w = cfg.min_size + (cfg.max_size - cfg.min_size) * unit(rng);
      BoxGeometry b{0.0, 0.0, w, w * cfg.aspect};
      if (partner) {
        std::uniform_int_distribution<std::size_t> pick(
            0, scene.boxes.size() - 1);
        const BoxGeometry& mate = scene.boxes[pick(rng)];
        // Uniform direction; offsets below half the summed extents
        // guarantee overlap.
        const double angle = 2.0 * std::numbers::pi * unit(rng);
        const double reach = 0.25 + 0.5 * unit(rng);
        b.x = mate.x + reach * 0.5 * (b.w + mate.w) * std::cos(angle);
        b.y = mate.y + reach * 0.5 * (b.h + mate.h) * std::sin(angle);
      } else {
        b.x = 0.5 * b.w + (cfg.width - b.w) * unit(rng);
        b.y = 0.5 * b.h + (cfg.height - b.h) * unit(rng);
        bool clear = true;
        for (const BoxGeometry& other : scene.boxes) {
          if (intersects(b, other)) {
            clear = false;
            break;
          }
        }
        if (!clear) continue;
      }
      if (!inside_image(b, cfg.width, cfg.height)) continue;
      if (!region_cap_ok(scene.boxes, b, centers, cfg)) continue;
      scene.boxes.push_back(b);
      if (partner) have_pair = true;
      break;
    }
  }
  return scene;
}

std::vector<Scene> generate_split(std::uint64_t seed, const SceneConfig& config,
                                  std::string_view split, int count) {
  std::vector<Scene> out;
  out.reserve(count > 0 ? count : 0);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, split, static_cast<std::uint64_t>(i)));
    char id[64];
    std::snprintf(id, sizeof(id), "%.*s-%06d", static_cast<int>(split.size()),
                  split.data(), i);
    out.push_back(generate_scene(rng, config, id));
  }
  return out;
}

Scene jitter_scene(const Scene& scene, Rng& rng, const JitterConfig& config) {
  auto draw = [&rng](double lo, double hi) {
    return lo < hi ? std::uniform_real_distribution<double>(lo, hi)(rng) : lo;
  };
  const double s = draw(config.min_scale, config.max_scale);
  const double dx = draw(-config.max_shift, config.max_shift);
  const double dy = draw(-config.max_shift, config.max_shift);
  const double cx = 0.5 * scene.width;
  const double cy = 0.5 * scene.height;
  Scene out = scene;
  out.boxes.clear();
  for (const BoxGeometry& b : scene.boxes) {
    BoxGeometry j{cx + s * (b.x - cx) + dx, cy + s * (b.y - cy) + dy, s * b.w,
                  s * b.h};
    if (j.x < 0.0 || j.y < 0.0 || j.x >= scene.width || j.y >= scene.height) {
      continue;
    }
    out.boxes.push_back(j);
  }
  return out;
}

void FeatureConfig::validate() const {
  if (grid <= 0) throw Error("feature grid must be positive");
  if (!(receptive_field > 0.0) || !(bump_sigma > 0.0)) {
    throw Error("receptive field and bump sigma must be positive");
  }
  if (noise_sigma < 0.0) throw Error("noise sigma must be >= 0");
}

RegionSample encode_region(const Scene& scene, const Point2& region_origin,
                           int region_size, const FeatureConfig& config,
                           Rng* noise_rng) {
  config.validate();
  RegionSample sample;
  sample.region_origin = region_origin;
  sample.features.assign(config.feature_dim(), config.background);

  const double half_rf = 0.5 * config.receptive_field;
  const double cell = config.receptive_field / config.grid;
  const double inv_two_var = 1.0 / (2.0 * config.bump_sigma * config.bump_sigma);
  for (const BoxGeometry& b : scene.boxes) {
    const double bx = b.x - region_origin.x;
    const double by = b.y - region_origin.y;
    if (std::abs(bx) > half_rf || std::abs(by) > half_rf) continue;
    const double amp = config.area_gain * b.w * b.h;
    for (int gy = 0; gy < config.grid; ++gy) {
      const double cy = -half_rf + (gy + 0.5) * cell;
      for (int gx = 0; gx < config.grid; ++gx) {
        const double cx = -half_rf + (gx + 0.5) * cell;
        const double r2 = (cx - bx) * (cx - bx) + (cy - by) * (cy - by);
        sample.features[gy * config.grid + gx] += amp * std::exp(-r2 * inv_two_var);
      }
    }
    if (in_central_region(b.x, b.y, region_origin, region_size)) {
      sample.ground_truth.push_back({bx, by, b.w, b.h});
    }
  }
  if (noise_rng != nullptr && config.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, config.noise_sigma);
    for (double& v : sample.features) v += noise(*noise_rng);
  }
  return sample;
}

std::vector<RegionSample> encode_scene(const Scene& scene,
                                       const RegionLayout& layout,
                                       const FeatureConfig& config,
                                       Rng* noise_rng) {
  std::vector<RegionSample> out;
  for (const Point2& c : region_centers(scene.width, scene.height, layout)) {
    out.push_back(encode_region(scene, c, layout.region_size, config, noise_rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// NDJSON files

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  return os;
}

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const std::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": malformed record: " + e.what());
    }
  }
}

double number_field(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw Error(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

int int_field(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw Error(std::string("field '") + key + "' is not an integer");
  }
  return v.get<int>();
}

BoxGeometry box_from_json(const json& j) {
  return {number_field(j, "x"), number_field(j, "y"), number_field(j, "w"),
          number_field(j, "h")};
}

}  // namespace

void write_scenes(const std::filesystem::path& path,
                  std::span<const Scene> scenes) {
  std::ofstream os = open_for_write(path);
  for (const Scene& s : scenes) {
    json boxes = json::array();
    for (const BoxGeometry& b : s.boxes) {
      boxes.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
    }
    json rec = {{"id", s.id},
                {"width", s.width},
                {"height", s.height},
                {"boxes", std::move(boxes)}};
    os << rec.dump() << "\n";
  }
  if (!os) throw Error("failed writing " + path.string());
}

std::vector<Scene> read_scenes(const std::filesystem::path& path) {
  std::vector<Scene> out;
  for_each_record(path, [&](const json& j) {
    Scene s;
    s.id = j.at("id").get<std::string>();
    s.width = int_field(j, "width");
    s.height = int_field(j, "height");
    for (const json& b : j.at("boxes")) {
      BoxGeometry g = box_from_json(b);
      if (!g.valid()) throw Error("invalid box (need finite, w > 0, h > 0)");
      s.boxes.push_back(g);
    }
    out.push_back(std::move(s));
  });
  return out;
}

void write_predictions(const std::filesystem::path& path,
                       std::span<const ScenePredictions> predictions) {
  std::ofstream os = open_for_write(path);
  for (const ScenePredictions& p : predictions) {
    json boxes = json::array();
    for (const PredictedBox& b : p.boxes) {
      boxes.push_back({{"x", b.geometry.x},
                       {"y", b.geometry.y},
                       {"w", b.geometry.w},
                       {"h", b.geometry.h},
                       {"confidence", b.confidence},
                       {"rank", b.rank},
                       {"region_index", b.region_index}});
    }
    json rec = {{"scene_id", p.scene_id}, {"boxes", std::move(boxes)}};
    os << rec.dump() << "\n";
  }
  if (!os) throw Error("failed writing " + path.string());
}

std::vector<ScenePredictions> read_predictions(
    const std::filesystem::path& path) {
  std::vector<ScenePredictions> out;
  for_each_record(path, [&](const json& j) {
    ScenePredictions p;
    p.scene_id = j.at("scene_id").get<std::string>();
    for (const json& b : j.at("boxes")) {
      PredictedBox pb;
      pb.geometry = box_from_json(b);
      pb.confidence = number_field(b, "confidence");
      pb.rank = int_field(b, "rank");
      pb.region_index = int_field(b, "region_index");
      p.boxes.push_back(pb);
    }
    out.push_back(std::move(p));
  });
  return out;
}

}  // namespace setdet
