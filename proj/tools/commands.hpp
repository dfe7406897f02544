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
// Subcommand implementations behind the setdet binary. Each writes into its
// own output directory together with a manifest.json describing the run.
#ifndef SETDET_TOOLS_COMMANDS_HPP_
#define SETDET_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "setdet/error.hpp"
#include "setdet/pipeline.hpp"
#include "setdet/trainer.hpp"

namespace setdet::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Bad flags, unknown config keys or values. The binary exits with status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CommonOptions {
  std::filesystem::path out;
  std::filesystem::path config;          // optional key=value file
  std::vector<std::string> overrides;    // "key=value", applied after the file
  std::optional<std::uint64_t> seed;     // overrides the `seed` key
  bool overwrite = false;
};

struct SynthOptions : CommonOptions {
  int train = 200;
  int val = 50;
  int test = 50;
};

struct TrainOptions : CommonOptions {
  std::filesystem::path data;  // directory with train.ndjson (and val.ndjson)
  std::optional<std::string> loss_mode;
  std::optional<std::int64_t> iterations;
  std::filesystem::path resume;  // checkpoint to continue from
};

struct DetectOptions : CommonOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path scenes;
  double threshold = 0.5;
};

struct EvalOptions {
  std::filesystem::path out;
  std::filesystem::path predictions;
  std::filesystem::path scenes;
  std::filesystem::path val_predictions;
  std::filesystem::path val_scenes;
  bool overwrite = false;
};

struct PlotOptions {
  std::filesystem::path out;
  std::filesystem::path predictions;
  std::filesystem::path scenes;
  std::filesystem::path metrics;  // training metrics.csv
  int max_images = 4;
  bool overwrite = false;
};

// Config file, then overrides, then the seed flag.
ExperimentConfig load_config(const CommonOptions& options);

void cmd_synth(const SynthOptions& options);
void cmd_train(const TrainOptions& options);
void cmd_detect(const DetectOptions& options);
EvaluationSummary cmd_eval(const EvalOptions& options);
void cmd_plot(const PlotOptions& options);

// Binary PPM (P6) of a black width x height canvas with box outlines:
// ground truth in green, predictions in red.
void write_overlay_ppm(const std::filesystem::path& path, int width, int height,
                       const std::vector<BoxGeometry>& ground_truth,
                       const std::vector<BoxGeometry>& predictions);

}  // namespace setdet::cli

#endif  // SETDET_TOOLS_COMMANDS_HPP_
