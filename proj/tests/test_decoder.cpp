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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "gradient_check.hpp"
#include "setdet/decoder.hpp"
#include "setdet/error.hpp"
#include "setdet/loss.hpp"
#include "setdet/matching.hpp"

using namespace setdet;

using gradcheck::random_features;
using gradcheck::tiny_config;

TEST_CASE("zero parameters") {
  const DecoderConfig cfg;
  DecoderParams p(cfg);
  Rng rng(1);
  const auto features = random_features(rng, cfg.feature_dim);
  const StepOutput out = lstm_step(p, initial_state(cfg), features);
  for (double v : out.state.cell) CHECK(v == 0.0);
  for (double v : out.state.hidden) CHECK(v == 0.0);
  for (double v : out.raw_output) CHECK(v == 0.0);

  const RegionPrediction pred = decode_region(p, features);
  REQUIRE(pred.candidates.size() == static_cast<std::size_t>(cfg.steps));
  for (std::size_t j = 0; j < pred.candidates.size(); ++j) {
    const Candidate& c = pred.candidates[j];
    CHECK(c.geometry == BoxGeometry{0, 0, 0, 0});
    CHECK(c.confidence == 0.5);
    CHECK(c.rank == static_cast<int>(j) + 1);
  }
}

TEST_CASE("zero input from zero state stays at zero") {
  const DecoderConfig cfg;
  Rng rng(2);
  const DecoderParams p = DecoderParams::uniform(cfg, rng);
  const std::vector<double> zeros(cfg.feature_dim, 0.0);
  DecoderState s = initial_state(cfg);
  for (int step = 0; step < cfg.steps; ++step) {
    const StepOutput out = lstm_step(p, s, zeros);
    for (double v : out.raw_output) CHECK(v == 0.0);
    s = out.state;
  }
}

TEST_CASE("parameters have no bias and the expected shape") {
  DecoderConfig cfg = tiny_config(false);
  DecoderParams untied(cfg);
  CHECK(untied.size() == 4u * 6 * 14 + 3u * 5 * 6);
  CHECK(untied.tensors().size() == 4);
  cfg.tied_heads = true;
  DecoderParams tied(cfg);
  CHECK(tied.size() == 4u * 6 * 14 + 5u * 6);
  CHECK(tied.head(0).data() == tied.head(2).data());
}

TEST_CASE("decode_region is deterministic") {
  const DecoderConfig cfg;
  Rng rng(3);
  const DecoderParams p = DecoderParams::uniform(cfg, rng);
  const auto features = random_features(rng, cfg.feature_dim);
  const RegionPrediction a = decode_region(p, features);
  const RegionPrediction b = decode_region(p, features);
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (std::size_t j = 0; j < a.candidates.size(); ++j) {
    CHECK(a.candidates[j].geometry == b.candidates[j].geometry);
    CHECK(a.candidates[j].confidence == b.candidates[j].confidence);
  }
}

TEST_CASE("forward cache agrees with the plain forward pass") {
  const DecoderConfig cfg = tiny_config(false);
  Rng rng(4);
  const DecoderParams p = DecoderParams::uniform(cfg, rng, 0.5);
  const auto features = random_features(rng, cfg.feature_dim);
  ForwardCache cache;
  const RegionPrediction a = decode_region(p, features, &cache);
  const RegionPrediction b = decode_region(p, features);
  CHECK(cache.steps.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(a.candidates[j].geometry == b.candidates[j].geometry);
    CHECK(cache.steps[j].raw[0] * cfg.output_scale == a.candidates[j].geometry.x);
  }
}

TEST_CASE("input scaling") {
  DecoderConfig cfg = tiny_config(false);
  Rng rng(5);
  const DecoderParams p = DecoderParams::uniform(cfg, rng, 0.5);
  const auto features = random_features(rng, cfg.feature_dim);
  const RegionPrediction base = decode_region(p, features);
  for (double k : {0.25, 2.0, 8.0}) {
    DecoderConfig scaled_cfg = cfg;
    scaled_cfg.input_scale = cfg.input_scale * k;
    DecoderParams q(scaled_cfg);
    std::copy(p.flat().begin(), p.flat().end(), q.flat().begin());
    std::vector<double> scaled = features;
    for (double& v : scaled) v *= k;
    const RegionPrediction out = decode_region(q, scaled);
    for (std::size_t j = 0; j < out.candidates.size(); ++j) {
      CHECK(out.candidates[j].geometry == base.candidates[j].geometry);
      CHECK(out.candidates[j].confidence == base.candidates[j].confidence);
    }
  }
  // Non power-of-two factors agree up to rounding.
  DecoderConfig third = cfg;
  third.input_scale = cfg.input_scale * 3.0;
  DecoderParams q(third);
  std::copy(p.flat().begin(), p.flat().end(), q.flat().begin());
  std::vector<double> scaled = features;
  for (double& v : scaled) v *= 3.0;
  const RegionPrediction out = decode_region(q, scaled);
  for (std::size_t j = 0; j < out.candidates.size(); ++j) {
    CHECK(out.candidates[j].geometry.x ==
          doctest::Approx(base.candidates[j].geometry.x).epsilon(1e-12));
  }
}

TEST_CASE("threshold_cutoff keeps the prefix above threshold") {
  RegionPrediction pred;
  int rank = 1;
  for (double c : {0.9, 0.8, 0.3, 0.7, 0.1}) pred.candidates.push_back({{0, 0, 1, 1}, c, rank++});
  const auto kept = threshold_cutoff(pred, 0.5);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].rank == 1);
  CHECK(kept[1].rank == 2);
  CHECK(threshold_cutoff(pred, 0.95).empty());
  CHECK(threshold_cutoff(pred, 0.05).size() == 5);
}

TEST_CASE("dropout") {
  Rng rng(6);
  std::vector<double> h{0.3, -1.2, 0.0, 2.5, 0.7, -0.4};
  const DropoutResult id = apply_dropout(h, 0.0, rng, true);
  CHECK(id.output == h);
  const DropoutResult eval = apply_dropout(h, 0.5, rng, false);
  CHECK(eval.output == h);
  for (double s : eval.scale) CHECK(s == 1.0);

  const double rate = 0.15;
  std::vector<double> mean(h.size(), 0.0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const DropoutResult r = apply_dropout(h, rate, rng, true);
    for (std::size_t k = 0; k < h.size(); ++k) {
      CHECK((r.scale[k] == 0.0 || r.scale[k] == doctest::Approx(1.0 / (1.0 - rate))));
      mean[k] += r.output[k] / trials;
    }
  }
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k] == 0.0) {
      CHECK(mean[k] == 0.0);
    } else {
      CHECK(std::abs(mean[k] - h[k]) <= 0.02 * std::abs(h[k]));
    }
  }
}

TEST_CASE("zero upstream gives zero gradients") {
  const DecoderConfig cfg = tiny_config(false);
  Rng rng(8);
  const DecoderParams p = DecoderParams::uniform(cfg, rng, 0.5);
  const auto features = random_features(rng, cfg.feature_dim);
  ForwardCache cache;
  decode_region(p, features, &cache);
  LossGradients up;
  up.d_positions.assign(3, {0, 0, 0, 0});
  up.d_confidence_logits.assign(3, 0.0);
  const DecoderGradients g = decoder_backward(p, cache, up);
  for (double v : g.params.flat()) CHECK(v == 0.0);
  for (double v : g.d_features) CHECK(v == 0.0);

  ForwardCache empty;
  CHECK_THROWS_AS(decoder_backward(p, empty, up), Error);
}

TEST_CASE("decoder_backward matches central differences") {
  for (bool tied : {false, true}) {
    for (LossMode mode : {LossMode::kHungarian, LossMode::kFix}) {
      for (bool tanh_out : {false, true}) {
        DecoderConfig cfg = tiny_config(tied);
        cfg.tanh_on_cell_output = tanh_out;
        const gradcheck::Result r = gradcheck::check_decoder(cfg, mode, 11 + tied);
        INFO("tied=" << tied << " mode=" << loss_mode_name(mode) << " tanh=" << tanh_out);
        REQUIRE(r.smooth);
        CHECK(r.checked > 0);
        CHECK_MESSAGE(r.failed == 0, "worst relative error " << r.worst_relative);
      }
    }
  }
  DecoderConfig first_only = tiny_config(false);
  first_only.features_every_step = false;
  const gradcheck::Result r = gradcheck::check_decoder(first_only, LossMode::kHungarian, 21);
  REQUIRE(r.smooth);
  CHECK(r.failed == 0);
}

TEST_CASE("tied head gradient is the sum of per-step head gradients") {
  Rng rng(31);
  const DecoderConfig tied_cfg = tiny_config(true);
  const DecoderParams tied = DecoderParams::uniform(tied_cfg, rng, 0.5);
  DecoderParams untied(tiny_config(false));
  std::copy(tied.gates().begin(), tied.gates().end(), untied.gates().begin());
  for (int s = 0; s < 3; ++s) {
    std::copy(tied.head(0).begin(), tied.head(0).end(), untied.head(s).begin());
  }
  const auto features = random_features(rng, 8);
  ForwardCache ct, cu;
  const RegionPrediction pt = decode_region(tied, features, &ct);
  const RegionPrediction pu = decode_region(untied, features, &cu);
  const auto gt = gradcheck::near_ground_truth(pt.candidates, 2);
  const Matching m = match_hungarian(gt, pt.candidates, CostMode::kHungarian);
  const DecoderGradients gt_grad =
      decoder_backward(tied, ct, loss_gradients(gt, pt.candidates, m));
  const DecoderGradients gu_grad =
      decoder_backward(untied, cu, loss_gradients(gt, pu.candidates, m));

  for (std::size_t k = 0; k < tied.gates().size(); ++k) {
    CHECK(gt_grad.params.gates()[k] == doctest::Approx(gu_grad.params.gates()[k]).epsilon(1e-12));
  }
  for (std::size_t k = 0; k < tied.head(0).size(); ++k) {
    double sum = 0.0;
    for (int s = 0; s < 3; ++s) sum += gu_grad.params.head(s)[k];
    CHECK(gt_grad.params.head(0)[k] == doctest::Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "setdet_test_decoder";
  std::filesystem::create_directories(dir);
  for (bool tied : {false, true}) {
    DecoderConfig cfg = tiny_config(tied);
    cfg.tanh_on_cell_output = tied;
    Rng rng(41);
    Checkpoint ck{DecoderParams::uniform(cfg, rng), DecoderParams::uniform(cfg, rng, 1e-7), 1234};
    ck.params.flat()[0] = 1.0 / 3.0;
    ck.params.flat()[1] = -2.5e-300;
    const auto path = dir / "ck.txt";
    write_checkpoint(path, ck);
    const Checkpoint back = read_checkpoint(path);
    CHECK(back.params == ck.params);
    CHECK(back.params.config() == cfg);
    REQUIRE(back.velocity.has_value());
    CHECK(*back.velocity == *ck.velocity);
    CHECK(back.iteration == 1234);

    ck.velocity.reset();
    write_checkpoint(path, ck);
    CHECK_FALSE(read_checkpoint(path).velocity.has_value());
  }

  const auto bad = dir / "bad.txt";
  std::ofstream(bad) << "setdet-checkpoint\nformat_version 99\n";
  CHECK_THROWS_AS(read_checkpoint(bad), Error);
  std::ofstream(bad) << "not a checkpoint\n";
  CHECK_THROWS_AS(read_checkpoint(bad), Error);
  CHECK_THROWS_AS(read_checkpoint(dir / "missing.txt"), Error);
  std::filesystem::remove_all(dir);
}
