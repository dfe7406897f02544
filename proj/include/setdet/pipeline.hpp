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
#ifndef SETDET_PIPELINE_HPP_
#define SETDET_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "setdet/data.hpp"
#include "setdet/decoder.hpp"
#include "setdet/metrics.hpp"

namespace setdet {

// Full-image inference: encode every region, decode, stitch.
struct DetectConfig {
  RegionLayout layout;
  FeatureConfig features;
  double threshold = 0.5;
  // Feature noise for scene s is drawn from derive_seed(noise_seed, s.id, 0).
  std::uint64_t noise_seed = 0;
};

ScenePredictions detect_scene(const DecoderParams& params, const Scene& scene,
                              const DetectConfig& config);

std::vector<ScenePredictions> detect_scenes(const DecoderParams& params,
                                            std::span<const Scene> scenes,
                                            const DetectConfig& config);

struct EvaluationSummary {
  double ap = 0.0;
  double eer = 0.0;
  double count_error = 0.0;
  double chosen_threshold = 0.0;
  std::size_t images = 0;
  std::size_t ground_truth = 0;
  std::size_t predictions = 0;
};

struct Evaluation {
  EvaluationSummary summary;
  PRCurve curve;
};

// Scores `predictions` against `scenes` (joined by scene id; scenes without
// a record have no predictions). The COUNT threshold is chosen on the
// validation pair when given, otherwise on the evaluated set itself.
Evaluation evaluate_predictions(
    std::span<const Scene> scenes,
    std::span<const ScenePredictions> predictions,
    std::span<const Scene> val_scenes = {},
    std::span<const ScenePredictions> val_predictions = {});

// Single-line JSON record with ap, eer, count_error, chosen_threshold and
// the set sizes.
std::string summary_json(const EvaluationSummary& summary);
void write_summary(const std::filesystem::path& path,
                   const EvaluationSummary& summary);

}  // namespace setdet

#endif  // SETDET_PIPELINE_HPP_
