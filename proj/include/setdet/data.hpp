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
#ifndef SETDET_DATA_HPP_
#define SETDET_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "setdet/decoder.hpp"
#include "setdet/geometry.hpp"

namespace setdet {

// Deterministic 64-bit seed derivation (splitmix64 over the inputs).
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                          std::uint64_t index);

// Strided grid of square central regions. Region (r, c) is centered at
// (stride * c + stride / 2, stride * r + stride / 2); regions overlap when
// region_size > stride.
struct RegionLayout {
  int stride = 32;
  int region_size = 64;
};

// Region centers in row-major order (top-left first).
std::vector<Point2> region_centers(int width, int height,
                                   const RegionLayout& layout);

// Half-open membership test [c - size/2, c + size/2) on both axes.
bool in_central_region(double x, double y, const Point2& center,
                       int region_size);

struct Scene {
  std::string id;
  int width = 0;
  int height = 0;
  std::vector<BoxGeometry> boxes;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct SceneConfig {
  int width = 640;
  int height = 480;
  // Box count is uniform in [min_boxes, max_boxes]; placement may fall short
  // when constraints cannot be met within max_attempts.
  int min_boxes = 0;
  int max_boxes = 20;
  double min_size = 16.0;
  double max_size = 32.0;
  double aspect = 1.0;  // h / w
  // Probability that a scene is an occlusion scene. Occlusion scenes place
  // their second box intersecting an existing one and later boxes do so
  // with partner_probability; every other box intersects nothing.
  double overlap_fraction = 0.3;
  double partner_probability = 0.5;
  int max_per_region = 4;
  int max_attempts = 200;
  RegionLayout layout;

  void validate() const;
};

Scene generate_scene(Rng& rng, const SceneConfig& config, std::string id = {});

// `count` scenes with ids "<split>-NNNNNN", each drawn from its own derived
// seed so the set does not depend on generation order.
std::vector<Scene> generate_split(std::uint64_t seed, const SceneConfig& config,
                                  std::string_view split, int count);

struct JitterConfig {
  double max_shift = 32.0;
  double min_scale = 0.9;
  double max_scale = 1.1;
};

// Scales all boxes about the image center and translates them; boxes whose
// centers leave the image are dropped.
Scene jitter_scene(const Scene& scene, Rng& rng, const JitterConfig& config);

// Rasterized stand-in for CNN features: a grid x grid map of Gaussian bumps
// at box centers inside the receptive field, amplitude area_gain * w * h,
// plus a constant background level and optional N(0, noise_sigma) noise.
// The background stands in for the nonzero baseline activations of a real
// encoder; without it an empty region encodes to zeros, which a bias-free
// decoder can only map to confidence 0.5.
struct FeatureConfig {
  int grid = 8;
  double receptive_field = 128.0;
  double bump_sigma = 12.0;
  double area_gain = 0.1;
  double background = 0.0;
  double noise_sigma = 0.0;

  int feature_dim() const { return grid * grid; }
  void validate() const;
};

struct RegionSample {
  std::vector<double> features;
  // Boxes whose centers fall in the central region, relative to its center.
  std::vector<BoxGeometry> ground_truth;
  Point2 region_origin;  // region center, image pixels
};

// `noise_rng` may be null when noise_sigma is zero or noise is not wanted.
RegionSample encode_region(const Scene& scene, const Point2& region_origin,
                           int region_size, const FeatureConfig& config,
                           Rng* noise_rng = nullptr);

std::vector<RegionSample> encode_scene(const Scene& scene,
                                       const RegionLayout& layout,
                                       const FeatureConfig& config,
                                       Rng* noise_rng = nullptr);

// Newline-delimited JSON, one scene per line:
//   {"id": ..., "width": ..., "height": ..., "boxes": [{"x","y","w","h"}]}
void write_scenes(const std::filesystem::path& path,
                  std::span<const Scene> scenes);
std::vector<Scene> read_scenes(const std::filesystem::path& path);

struct PredictedBox {
  BoxGeometry geometry;  // image pixels
  double confidence = 0.0;
  int rank = 1;
  int region_index = 0;

  friend bool operator==(const PredictedBox&, const PredictedBox&) = default;
};

struct ScenePredictions {
  std::string scene_id;
  std::vector<PredictedBox> boxes;

  friend bool operator==(const ScenePredictions&,
                         const ScenePredictions&) = default;
};

// Newline-delimited JSON:
//   {"scene_id": ..., "boxes": [{"x","y","w","h","confidence","rank",
//                                "region_index"}]}
void write_predictions(const std::filesystem::path& path,
                       std::span<const ScenePredictions> predictions);
std::vector<ScenePredictions> read_predictions(
    const std::filesystem::path& path);

}  // namespace setdet

#endif  // SETDET_DATA_HPP_
