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
#include "setdet/pipeline.hpp"

#include <fstream>
#include <map>

#include "json.hpp"
#include "setdet/error.hpp"
#include "setdet/stitching.hpp"

namespace setdet {

ScenePredictions detect_scene(const DecoderParams& params, const Scene& scene,
                              const DetectConfig& config) {
  Rng noise(derive_seed(config.noise_seed, scene.id, 0));
  const std::vector<RegionSample> samples =
      encode_scene(scene, config.layout, config.features, &noise);
  std::vector<RegionPrediction> regions;
  regions.reserve(samples.size());
  for (const RegionSample& s : samples) {
    RegionPrediction p = decode_region(params, s.features);
    p.region_origin = s.region_origin;
    regions.push_back(std::move(p));
  }
  return {scene.id, stitch_image(regions, config.threshold)};
}

std::vector<ScenePredictions> detect_scenes(const DecoderParams& params,
                                            std::span<const Scene> scenes,
                                            const DetectConfig& config) {
  std::vector<ScenePredictions> out;
  out.reserve(scenes.size());
  for (const Scene& s : scenes) out.push_back(detect_scene(params, s, config));
  return out;
}

namespace {

// Per-image confidences and detections aligned with `scenes`.
struct Aligned {
  std::vector<std::vector<Detection>> detections;
  std::vector<std::vector<double>> confidences;
  std::vector<int> truth;
};

Aligned align(std::span<const Scene> scenes,
              std::span<const ScenePredictions> predictions) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!index.emplace(scenes[i].id, i).second) {
      throw Error("duplicate scene id " + scenes[i].id);
    }
  }
  Aligned a;
  a.detections.resize(scenes.size());
  a.confidences.resize(scenes.size());
  for (const Scene& s : scenes) a.truth.push_back(static_cast<int>(s.boxes.size()));
  for (const ScenePredictions& p : predictions) {
    auto it = index.find(p.scene_id);
    if (it == index.end()) {
      throw Error("predictions refer to unknown scene " + p.scene_id);
    }
    for (const PredictedBox& b : p.boxes) {
      a.detections[it->second].push_back({b.geometry, b.confidence});
      a.confidences[it->second].push_back(b.confidence);
    }
  }
  return a;
}

}  // namespace

Evaluation evaluate_predictions(std::span<const Scene> scenes,
                                std::span<const ScenePredictions> predictions,
                                std::span<const Scene> val_scenes,
                                std::span<const ScenePredictions> val_predictions) {
  const Aligned a = align(scenes, predictions);
  std::vector<LabeledPrediction> labeled;
  Evaluation ev;
  ev.summary.images = scenes.size();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto l = match_for_eval(a.detections[i], scenes[i].boxes);
    labeled.insert(labeled.end(), l.begin(), l.end());
    ev.summary.ground_truth += scenes[i].boxes.size();
  }
  ev.summary.predictions = labeled.size();
  ev.curve = pr_curve(labeled, ev.summary.ground_truth);
  ev.summary.ap = average_precision(ev.curve);
  ev.summary.eer = ev.curve.empty() ? 0.0 : equal_error_rate(ev.curve);

  if (scenes.empty()) return ev;
  if (!val_scenes.empty()) {
    const Aligned v = align(val_scenes, val_predictions);
    ev.summary.chosen_threshold =
        select_count_threshold(v.confidences, v.truth).threshold;
  } else {
    ev.summary.chosen_threshold =
        select_count_threshold(a.confidences, a.truth).threshold;
  }
  ev.summary.count_error = count_error(
      counts_at_threshold(a.confidences, ev.summary.chosen_threshold), a.truth);
  return ev;
}

std::string summary_json(const EvaluationSummary& s) {
  nlohmann::ordered_json j;
  j["ap"] = s.ap;
  j["eer"] = s.eer;
  j["count_error"] = s.count_error;
  j["chosen_threshold"] = s.chosen_threshold;
  j["images"] = s.images;
  j["ground_truth"] = s.ground_truth;
  j["predictions"] = s.predictions;
  return j.dump();
}

void write_summary(const std::filesystem::path& path,
                   const EvaluationSummary& summary) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << summary_json(summary) << "\n";
  if (!os) throw Error("failed writing " + path.string());
}

}  // namespace setdet
