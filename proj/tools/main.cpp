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
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace setdet::cli;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("setdet");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* level = std::getenv("SETDET_LOG_LEVEL");
  spdlog::set_level(level != nullptr ? spdlog::level::from_str(level) : spdlog::level::info);
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--out", o.out, "Output directory")->required();
  cmd->add_option("--config", o.config, "key=value configuration file");
  cmd->add_option("--set", o.overrides, "Override one config key (key=value); repeatable");
  cmd->add_option("--seed", o.seed, "Seed for every random draw");
  cmd->add_flag("--overwrite", o.overwrite, "Write into a non-empty output directory");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Set-prediction detection on synthetic crowded scenes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Generate train/val/test scene files");
  add_common(s, synth);
  s->add_option("--train", synth.train, "Training scenes")->capture_default_str();
  s->add_option("--val", synth.val, "Validation scenes")->capture_default_str();
  s->add_option("--test", synth.test, "Test scenes")->capture_default_str();

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Train the decoder");
  add_common(t, train);
  t->add_option("--data", train.data, "Directory written by synth")->required();
  t->add_option("--loss-mode", train.loss_mode, "fix, firstk or hungarian")
      ->check(CLI::IsMember({"fix", "firstk", "hungarian"}));
  t->add_option("--iterations", train.iterations, "Number of updates");
  t->add_option("--resume", train.resume, "Checkpoint to continue from");

  DetectOptions detect;
  auto* d = app.add_subcommand("detect", "Decode and stitch every scene");
  add_common(d, detect);
  d->add_option("--checkpoint", detect.checkpoint, "Trained checkpoint")->required();
  d->add_option("--scenes", detect.scenes, "Scenes file")->required();
  d->add_option("--threshold", detect.threshold, "Confidence cutoff")->capture_default_str();

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "Score predictions (AP, EER, COUNT)");
  e->add_option("--out", eval.out, "Output directory")->required();
  e->add_option("--predictions", eval.predictions, "Predictions file")->required();
  e->add_option("--scenes", eval.scenes, "Ground-truth scenes file")->required();
  e->add_option("--val-predictions", eval.val_predictions,
                "Validation predictions for the COUNT threshold");
  e->add_option("--val-scenes", eval.val_scenes, "Validation scenes for the COUNT threshold");
  e->add_flag("--overwrite", eval.overwrite, "Write into a non-empty output directory");

  PlotOptions plot;
  auto* p = app.add_subcommand("plot", "Export PR/training curves and overlay images");
  p->add_option("--out", plot.out, "Output directory")->required();
  p->add_option("--predictions", plot.predictions, "Predictions file");
  p->add_option("--scenes", plot.scenes, "Scenes file");
  p->add_option("--metrics", plot.metrics, "Training metrics.csv");
  p->add_option("--max-images", plot.max_images, "Overlay images to draw")->capture_default_str();
  p->add_flag("--overwrite", plot.overwrite, "Write into a non-empty output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) cmd_synth(synth);
    if (t->parsed()) cmd_train(train);
    if (d->parsed()) cmd_detect(detect);
    if (e->parsed()) std::cout << setdet::summary_json(cmd_eval(eval)) << '\n';
    if (p->parsed()) cmd_plot(plot);
  } catch (const UsageError& err) {
    std::cerr << "setdet: usage error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "setdet: error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
