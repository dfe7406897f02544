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
#ifndef SETDET_TRAINER_HPP_
#define SETDET_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "setdet/data.hpp"
#include "setdet/decoder.hpp"
#include "setdet/matching.hpp"

namespace setdet {

struct TrainConfig {
  LossMode loss_mode = LossMode::kHungarian;
  double alpha = 0.03;
  double lr = 0.2;
  double momentum = 0.5;
  double clip_norm = 0.1;
  double lr_decay = 0.8;
  std::int64_t decay_every = 100000;
  double dropout = 0.15;
  std::int64_t iterations = 0;
  std::uint64_t seed = 1;
  bool jitter = true;
  JitterConfig jitter_config;
  // Validation AP is computed every eval_every iterations and after the
  // last one; 0 disables periodic evaluation.
  std::int64_t eval_every = 200;
  double eval_threshold = 0.5;

  DecoderConfig decoder;
  FeatureConfig features;
  RegionLayout layout;

  void validate() const;
};

// Returns the global 2-norm before clipping. Rescales `grads` in place by
// clip_norm / norm when the norm exceeds clip_norm.
double clip_gradients(std::span<double> grads, double clip_norm);

// Classical momentum: v' = momentum * v - lr * g, p' = p + v'.
void sgd_momentum_step(std::span<double> params, std::span<double> velocity,
                       std::span<const double> grads, double lr,
                       double momentum);

// lr * lr_decay ^ floor(iteration / decay_every).
double lr_at(std::int64_t iteration, const TrainConfig& config);

struct TrainLogRow {
  std::int64_t iteration = 0;  // 1-based count of completed updates
  double loss = 0.0;
  double lr = 0.0;
  double val_ap = 0.0;  // NaN when not evaluated at this iteration
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<TrainLogRow> log;
};

// Loss and gradient of one scene summed over all its regions, regions
// reduced in row-major order.
struct SceneStep {
  double loss = 0.0;
  DecoderParams grads;
};
SceneStep scene_loss_and_gradients(const DecoderParams& params,
                                   const Scene& scene,
                                   const TrainConfig& config, Rng& rng,
                                   bool training);

// Parameters drawn uniformly from [-0.1, 0.1] with a seed derived from
// config.seed.
DecoderParams initial_params(const TrainConfig& config);

// Runs config.iterations updates. Each iteration samples one training scene,
// (optionally) jitters it, encodes all regions with fresh feature noise,
// decodes with dropout, matches per loss_mode, backpropagates the summed
// loss, clips and steps. Every random draw of iteration k comes from a
// generator seeded by (seed, k), so resuming from a checkpoint taken at
// iteration k reproduces an uninterrupted run. Throws Error when the loss
// becomes non-finite.
TrainResult train(const TrainConfig& config, std::span<const Scene> train_set,
                  std::span<const Scene> val_set,
                  const Checkpoint* resume = nullptr,
                  const std::function<void(const TrainLogRow&)>& on_log = {});

// Validation AP of `params` with the stitching pipeline at eval_threshold.
double validation_ap(const DecoderParams& params, std::span<const Scene> scenes,
                     const TrainConfig& config);

// CSV with header "iteration,loss,lr,val_ap"; val_ap is empty when absent.
void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const TrainLogRow> log);

// ---------------------------------------------------------------------------
// key=value configuration files. '#' starts a comment; blank lines are
// skipped. One file may carry scene, decoder, feature and training keys.

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& is, const std::string& source);
KeyValues read_key_values(const std::filesystem::path& path);

struct ExperimentConfig {
  SceneConfig scene;
  TrainConfig train;
};

// Applies every key; throws Error naming the first unknown key or bad value.
void apply_key_values(ExperimentConfig& config, const KeyValues& kv);

// Every key with its effective value, in a fixed order.
KeyValues to_key_values(const ExperimentConfig& config);

}  // namespace setdet

#endif  // SETDET_TRAINER_HPP_
