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
#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "setdet/data.hpp"
#include "setdet/decoder.hpp"
#include "setdet/metrics.hpp"

namespace setdet::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void prepare_output(const fs::path& out, bool overwrite) {
  if (out.empty()) throw UsageError("an output directory is required");
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw Error(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out) && !overwrite) {
      throw Error("output directory " + out.string() +
                  " is not empty (pass --overwrite to replace its contents)");
    }
  }
  fs::create_directories(out);
}

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw UsageError(what + " is required");
  if (!fs::is_regular_file(p)) throw Error("cannot open " + p.string());
}

struct Manifest {
  std::string command;
  fs::path config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::string> outputs;
  KeyValues config;
};

void write_manifest(const fs::path& out, const Manifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["artifact_version"] = kArtifactVersion;
  j["config_path"] = m.config_path.string();
  j["seed"] = m.seed ? ordered_json(*m.seed) : ordered_json(nullptr);
  ordered_json inputs = ordered_json::object();
  for (const auto& [k, v] : m.inputs) inputs[k] = v;
  j["inputs"] = inputs;
  j["output_dir"] = out.string();
  j["outputs"] = m.outputs;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = cfg;
  std::ofstream os(out / "manifest.json", std::ios::binary);
  if (!os) throw Error("cannot write " + (out / "manifest.json").string());
  os << j.dump(2) << '\n';
}

void write_config_file(const fs::path& path, const ExperimentConfig& cfg) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  for (const auto& [k, v] : to_key_values(cfg)) os << k << '=' << v << '\n';
}

KeyValues parse_overrides(const std::vector<std::string>& overrides) {
  std::string text;
  for (const std::string& o : overrides) text += o + '\n';
  std::istringstream is(text);
  return parse_key_values(is, "--set");
}

std::uint64_t effective_seed(const ExperimentConfig& cfg) { return cfg.train.seed; }

}  // namespace

ExperimentConfig load_config(const CommonOptions& options) {
  ExperimentConfig cfg;
  try {
    if (!options.config.empty()) {
      if (!fs::is_regular_file(options.config)) {
        throw Error("cannot open " + options.config.string());
      }
      apply_key_values(cfg, read_key_values(options.config));
    }
    apply_key_values(cfg, parse_overrides(options.overrides));
    if (options.seed) apply_key_values(cfg, {{"seed", std::to_string(*options.seed)}});
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void cmd_synth(const SynthOptions& options) {
  const ExperimentConfig cfg = load_config(options);
  if (options.train < 0 || options.val < 0 || options.test < 0) {
    throw UsageError("split sizes must be >= 0");
  }
  cfg.scene.validate();
  prepare_output(options.out, options.overwrite);
  const std::uint64_t seed = effective_seed(cfg);
  const std::pair<const char*, int> splits[] = {
      {"train", options.train}, {"val", options.val}, {"test", options.test}};
  Manifest m{"synth", options.config, seed, {}, {}, to_key_values(cfg)};
  for (const auto& [name, count] : splits) {
    const auto scenes = generate_split(seed, cfg.scene, name, count);
    const std::string file = std::string(name) + ".ndjson";
    write_scenes(options.out / file, scenes);
    std::size_t boxes = 0;
    for (const Scene& s : scenes) boxes += s.boxes.size();
    spdlog::info("{}: {} scenes, {} boxes", name, scenes.size(), boxes);
    m.outputs.push_back(file);
  }
  write_config_file(options.out / "config.txt", cfg);
  m.outputs.push_back("config.txt");
  write_manifest(options.out, m);
}

void cmd_train(const TrainOptions& options) {
  ExperimentConfig cfg = load_config(options);
  try {
    if (options.loss_mode) apply_key_values(cfg, {{"loss_mode", *options.loss_mode}});
    if (options.iterations) {
      apply_key_values(cfg, {{"iterations", std::to_string(*options.iterations)}});
    }
    cfg.train.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (options.data.empty()) throw UsageError("--data is required");
  const fs::path train_path = options.data / "train.ndjson";
  const fs::path val_path = options.data / "val.ndjson";
  require_file(train_path, "training scenes");
  const std::vector<Scene> train_set = read_scenes(train_path);
  const std::vector<Scene> val_set =
      fs::exists(val_path) ? read_scenes(val_path) : std::vector<Scene>{};

  std::optional<Checkpoint> resume;
  if (!options.resume.empty()) {
    require_file(options.resume, "checkpoint");
    resume = read_checkpoint(options.resume);
  }
  prepare_output(options.out, options.overwrite);

  spdlog::info("training {} for {} iterations on {} scenes", loss_mode_name(cfg.train.loss_mode),
               cfg.train.iterations, train_set.size());
  const TrainResult result = train(
      cfg.train, train_set, val_set, resume ? &*resume : nullptr, [](const TrainLogRow& row) {
        if (!std::isnan(row.val_ap)) {
          spdlog::info("iteration {} loss {:.4f} lr {:.4g} val_ap {:.4f}", row.iteration,
                       row.loss, row.lr, row.val_ap);
        } else {
          spdlog::debug("iteration {} loss {:.4f}", row.iteration, row.loss);
        }
      });

  write_checkpoint(options.out / "checkpoint.txt", result.checkpoint);
  write_metrics_csv(options.out / "metrics.csv", result.log);
  write_config_file(options.out / "config.txt", cfg);
  Manifest m{"train", options.config, effective_seed(cfg),
             {{"data", options.data.string()}}, {"checkpoint.txt", "metrics.csv", "config.txt"},
             to_key_values(cfg)};
  if (resume) m.inputs.push_back({"resume", options.resume.string()});
  write_manifest(options.out, m);
}

void cmd_detect(const DetectOptions& options) {
  require_file(options.checkpoint, "--checkpoint");
  require_file(options.scenes, "--scenes");
  CommonOptions common = options;
  if (common.config.empty()) {
    const fs::path beside = options.checkpoint.parent_path() / "config.txt";
    if (fs::is_regular_file(beside)) common.config = beside;
  }
  const ExperimentConfig cfg = load_config(common);
  if (!(options.threshold >= 0.0 && options.threshold <= 1.0)) {
    throw UsageError("--threshold must lie in [0, 1]");
  }
  const Checkpoint ck = read_checkpoint(options.checkpoint);
  if (ck.params.config().feature_dim != cfg.train.features.feature_dim()) {
    throw UsageError("checkpoint expects " + std::to_string(ck.params.config().feature_dim) +
                     " features but the config encodes " +
                     std::to_string(cfg.train.features.feature_dim()));
  }
  const std::vector<Scene> scenes = read_scenes(options.scenes);
  prepare_output(options.out, options.overwrite);

  DetectConfig dc;
  dc.layout = cfg.train.layout;
  dc.features = cfg.train.features;
  dc.threshold = options.threshold;
  dc.noise_seed = effective_seed(cfg);
  const auto preds = detect_scenes(ck.params, scenes, dc);
  write_predictions(options.out / "predictions.ndjson", preds);
  std::size_t boxes = 0;
  for (const auto& p : preds) boxes += p.boxes.size();
  spdlog::info("detected {} boxes in {} scenes", boxes, preds.size());

  Manifest m{"detect", common.config, effective_seed(cfg),
             {{"checkpoint", options.checkpoint.string()}, {"scenes", options.scenes.string()}},
             {"predictions.ndjson"}, to_key_values(cfg)};
  m.config["threshold"] = std::to_string(options.threshold);
  write_manifest(options.out, m);
}

EvaluationSummary cmd_eval(const EvalOptions& options) {
  require_file(options.predictions, "--predictions");
  require_file(options.scenes, "--scenes");
  if (options.val_predictions.empty() != options.val_scenes.empty()) {
    throw UsageError("--val-predictions and --val-scenes go together");
  }
  const auto scenes = read_scenes(options.scenes);
  const auto preds = read_predictions(options.predictions);
  std::vector<Scene> val_scenes;
  std::vector<ScenePredictions> val_preds;
  if (!options.val_scenes.empty()) {
    require_file(options.val_scenes, "--val-scenes");
    require_file(options.val_predictions, "--val-predictions");
    val_scenes = read_scenes(options.val_scenes);
    val_preds = read_predictions(options.val_predictions);
  }
  const Evaluation ev = evaluate_predictions(scenes, preds, val_scenes, val_preds);
  prepare_output(options.out, options.overwrite);
  write_summary(options.out / "summary.json", ev.summary);
  write_pr_csv(options.out / "pr_curve.csv", ev.curve);

  Manifest m{"eval", {}, std::nullopt,
             {{"predictions", options.predictions.string()}, {"scenes", options.scenes.string()}},
             {"summary.json", "pr_curve.csv"}, {}};
  if (!options.val_scenes.empty()) {
    m.inputs.push_back({"val_predictions", options.val_predictions.string()});
    m.inputs.push_back({"val_scenes", options.val_scenes.string()});
  }
  write_manifest(options.out, m);
  return ev.summary;
}

void write_overlay_ppm(const fs::path& path, int width, int height,
                       const std::vector<BoxGeometry>& ground_truth,
                       const std::vector<BoxGeometry>& predictions) {
  if (width <= 0 || height <= 0) throw Error("overlay canvas must be non-empty");
  std::vector<unsigned char> pixels(static_cast<std::size_t>(width) * height * 3, 0);
  auto put = [&](int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  };
  auto outline = [&](const BoxGeometry& box, unsigned char r, unsigned char g, unsigned char b) {
    const int x0 = static_cast<int>(std::floor(box.left()));
    const int x1 = static_cast<int>(std::floor(box.right()));
    const int y0 = static_cast<int>(std::floor(box.top()));
    const int y1 = static_cast<int>(std::floor(box.bottom()));
    for (int x = x0; x <= x1; ++x) {
      put(x, y0, r, g, b);
      put(x, y1, r, g, b);
    }
    for (int y = y0; y <= y1; ++y) {
      put(x0, y, r, g, b);
      put(x1, y, r, g, b);
    }
  };
  for (const BoxGeometry& box : ground_truth) outline(box, 0, 255, 0);
  for (const BoxGeometry& box : predictions) outline(box, 255, 0, 0);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << "P6\n" << width << ' ' << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!os) throw Error("failed writing " + path.string());
}

void cmd_plot(const PlotOptions& options) {
  if (options.predictions.empty() && options.metrics.empty() && options.scenes.empty()) {
    throw UsageError("nothing to plot: pass --predictions/--scenes and/or --metrics");
  }
  if (!options.predictions.empty() && options.scenes.empty()) {
    throw UsageError("--predictions needs --scenes");
  }
  if (options.max_images < 0) throw UsageError("--max-images must be >= 0");

  std::vector<Scene> scenes;
  std::vector<ScenePredictions> preds;
  if (!options.scenes.empty()) {
    require_file(options.scenes, "--scenes");
    scenes = read_scenes(options.scenes);
  }
  if (!options.predictions.empty()) {
    require_file(options.predictions, "--predictions");
    preds = read_predictions(options.predictions);
  }
  std::vector<std::string> metrics_lines;
  if (!options.metrics.empty()) {
    require_file(options.metrics, "--metrics");
    std::ifstream is(options.metrics, std::ios::binary);
    std::string line;
    while (std::getline(is, line)) metrics_lines.push_back(line);
    if (metrics_lines.empty() || metrics_lines[0] != "iteration,loss,lr,val_ap") {
      throw Error(options.metrics.string() + ":1: expected header iteration,loss,lr,val_ap");
    }
  }
  prepare_output(options.out, options.overwrite);

  Manifest m{"plot", {}, std::nullopt, {}, {}, {}};
  if (!options.predictions.empty()) {
    const Evaluation ev = evaluate_predictions(scenes, preds);
    write_pr_csv(options.out / "pr_curve.csv", ev.curve);
    m.inputs.push_back({"predictions", options.predictions.string()});
    m.outputs.push_back("pr_curve.csv");
  }
  if (!options.metrics.empty()) {
    std::ofstream os(options.out / "training_curve.csv", std::ios::binary);
    for (const std::string& line : metrics_lines) os << line << '\n';
    if (!os) throw Error("cannot write training_curve.csv");
    m.inputs.push_back({"metrics", options.metrics.string()});
    m.outputs.push_back("training_curve.csv");
  }
  if (!scenes.empty() && options.max_images > 0) {
    std::map<std::string, const ScenePredictions*> by_id;
    for (const ScenePredictions& p : preds) by_id[p.scene_id] = &p;
    fs::create_directories(options.out / "overlays");
    const std::size_t n = std::min(scenes.size(), static_cast<std::size_t>(options.max_images));
    for (std::size_t i = 0; i < n; ++i) {
      const Scene& s = scenes[i];
      std::vector<BoxGeometry> boxes;
      if (auto it = by_id.find(s.id); it != by_id.end()) {
        for (const PredictedBox& b : it->second->boxes) boxes.push_back(b.geometry);
      }
      const std::string file = "overlays/" + s.id + ".ppm";
      write_overlay_ppm(options.out / file, s.width, s.height, s.boxes, boxes);
      m.outputs.push_back(file);
    }
  }
  if (!options.scenes.empty()) m.inputs.push_back({"scenes", options.scenes.string()});
  write_manifest(options.out, m);
}

}  // namespace setdet::cli
