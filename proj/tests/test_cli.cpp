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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "json.hpp"
#include "setdet/data.hpp"

using namespace setdet;
using namespace setdet::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("setdet_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const std::vector<std::string> kSmall{"width=128", "height=96",   "min_boxes=1",
                                      "max_boxes=4", "feature_grid=4", "hidden_dim=8",
                                      "background=20", "clip_norm=1", "eval_every=0"};

SynthOptions small_synth(const fs::path& out, int n) {
  SynthOptions o;
  o.out = out;
  o.overrides = kSmall;
  o.seed = 3;
  o.train = n;
  o.val = n / 2;
  o.test = n / 2;
  return o;
}

}  // namespace

TEST_CASE("synth") {
  const fs::path root = fresh_dir("synth");
  cmd_synth(small_synth(root / "a", 10));
  cmd_synth(small_synth(root / "b", 10));
  for (const char* f : {"train.ndjson", "val.ndjson", "test.ndjson", "config.txt"}) {
    CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));
  }
  CHECK(read_scenes(root / "a" / "train.ndjson").size() == 10);
  CHECK(read_scenes(root / "a" / "val.ndjson").size() == 5);
  CHECK(read_scenes(root / "a" / "test.ndjson").size() == 5);

  const auto manifest = nlohmann::json::parse(slurp(root / "a" / "manifest.json"));
  CHECK(manifest["command"] == "synth");
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["config"]["width"] == "128");
  CHECK(manifest.contains("artifact_version"));

  cmd_synth(small_synth(root / "empty", 0));
  CHECK(slurp(root / "empty" / "train.ndjson").empty());
  CHECK(read_scenes(root / "empty" / "test.ndjson").empty());

  CHECK_THROWS_WITH_AS(cmd_synth(small_synth(root / "a", 10)), doctest::Contains("--overwrite"),
                       Error);
  SynthOptions again = small_synth(root / "a", 4);
  again.overwrite = true;
  cmd_synth(again);
  CHECK(read_scenes(root / "a" / "train.ndjson").size() == 4);

  SynthOptions bad = small_synth(root / "bad", 2);
  bad.overrides.push_back("colour=blue");
  CHECK_THROWS_AS(cmd_synth(bad), UsageError);
  fs::remove_all(root);
}

TEST_CASE("config file with flag overrides") {
  const fs::path root = fresh_dir("config");
  std::ofstream(root / "c.cfg") << "# small\nwidth=100\nlr=0.3\nseed=5\n";
  CommonOptions o;
  o.config = root / "c.cfg";
  o.overrides = {"lr=0.7"};
  ExperimentConfig cfg = load_config(o);
  CHECK(cfg.scene.width == 100);
  CHECK(cfg.train.lr == 0.7);
  CHECK(cfg.train.seed == 5);
  o.seed = 9;
  CHECK(load_config(o).train.seed == 9);
  o.config = root / "missing.cfg";
  CHECK_THROWS_WITH_AS(load_config(o), doctest::Contains("missing.cfg"), UsageError);
  fs::remove_all(root);
}

TEST_CASE("train, detect, eval and plot") {
  const fs::path root = fresh_dir("pipeline");
  cmd_synth(small_synth(root / "data", 8));

  TrainOptions t;
  t.out = root / "full";
  t.overrides = kSmall;
  t.seed = 3;
  t.data = root / "data";
  t.iterations = 20;
  for (const char* mode : {"fix", "firstk", "hungarian"}) {
    TrainOptions m = t;
    m.out = root / (std::string("mode_") + mode);
    m.loss_mode = mode;
    m.iterations = 2;
    CHECK_NOTHROW(cmd_train(m));
  }
  TrainOptions invalid = t;
  invalid.out = root / "invalid";
  invalid.loss_mode = "greedy";
  CHECK_THROWS_AS(cmd_train(invalid), UsageError);

  cmd_train(t);
  TrainOptions first = t;
  first.out = root / "first";
  first.iterations = 8;
  cmd_train(first);
  TrainOptions rest = t;
  rest.out = root / "rest";
  rest.resume = root / "first" / "checkpoint.txt";
  cmd_train(rest);
  CHECK(slurp(root / "rest" / "checkpoint.txt") == slurp(root / "full" / "checkpoint.txt"));

  DetectOptions d;
  d.out = root / "det";
  d.checkpoint = root / "full" / "checkpoint.txt";
  d.scenes = root / "data" / "test.ndjson";
  cmd_detect(d);
  DetectOptions d2 = d;
  d2.out = root / "det2";
  cmd_detect(d2);
  CHECK(slurp(root / "det" / "predictions.ndjson") == slurp(root / "det2" / "predictions.ndjson"));

  std::ofstream(root / "none.ndjson");
  DetectOptions empty = d;
  empty.out = root / "det_empty";
  empty.scenes = root / "none.ndjson";
  cmd_detect(empty);
  CHECK(read_predictions(root / "det_empty" / "predictions.ndjson").empty());

  // Ground truth echoed back with confidence 1.
  const auto scenes = read_scenes(root / "data" / "test.ndjson");
  std::vector<ScenePredictions> echo;
  for (const Scene& s : scenes) {
    ScenePredictions p{s.id, {}};
    int rank = 1;
    for (const BoxGeometry& b : s.boxes) p.boxes.push_back({b, 1.0, rank++, 0});
    echo.push_back(p);
  }
  write_predictions(root / "echo.ndjson", echo);
  EvalOptions e;
  e.out = root / "eval";
  e.predictions = root / "echo.ndjson";
  e.scenes = root / "data" / "test.ndjson";
  const EvaluationSummary summary = cmd_eval(e);
  CHECK(summary.ap == 1.0);
  CHECK(summary.count_error == 0.0);
  const auto sj = nlohmann::json::parse(slurp(root / "eval" / "summary.json"));
  CHECK(sj["ap"] == 1.0);
  CHECK(sj.contains("eer"));
  CHECK(sj.contains("count_error"));
  CHECK(slurp(root / "eval" / "pr_curve.csv").rfind("threshold,precision,recall\n", 0) == 0);

  EvalOptions missing = e;
  missing.out = root / "eval_missing";
  missing.predictions = root / "nowhere.ndjson";
  CHECK_THROWS_WITH_AS(cmd_eval(missing), doctest::Contains("nowhere.ndjson"), Error);

  PlotOptions p;
  p.out = root / "plot";
  p.predictions = root / "det_empty" / "predictions.ndjson";
  p.scenes = root / "data" / "test.ndjson";
  p.metrics = root / "full" / "metrics.csv";
  p.max_images = 2;
  cmd_plot(p);
  CHECK(slurp(root / "plot" / "pr_curve.csv") == "threshold,precision,recall\n");
  CHECK(slurp(root / "plot" / "training_curve.csv") == slurp(root / "full" / "metrics.csv"));
  CHECK(fs::exists(root / "plot" / "overlays" / (scenes[0].id + ".ppm")));
  fs::remove_all(root);
}

TEST_CASE("overlay images") {
  const fs::path root = fresh_dir("overlay");
  write_overlay_ppm(root / "blank.ppm", 6, 4, {}, {});
  const std::string blank = slurp(root / "blank.ppm");
  const std::string header = "P6\n6 4\n255\n";
  REQUIRE(blank.size() == header.size() + 6 * 4 * 3);
  CHECK(blank.substr(0, header.size()) == header);
  CHECK(blank.find_first_not_of('\0', header.size()) == std::string::npos);

  write_overlay_ppm(root / "box.ppm", 10, 10, {{5, 5, 4, 4}}, {});
  const std::string box = slurp(root / "box.ppm");
  const std::size_t hdr = std::string("P6\n10 10\n255\n").size();
  // Top-left corner of the outline at (3, 3) is green.
  const std::size_t px = hdr + (3 * 10 + 3) * 3;
  CHECK(static_cast<unsigned char>(box[px]) == 0);
  CHECK(static_cast<unsigned char>(box[px + 1]) == 255);
  fs::remove_all(root);
}
