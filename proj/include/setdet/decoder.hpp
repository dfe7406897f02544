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
#ifndef SETDET_DECODER_HPP_
#define SETDET_DECODER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "setdet/loss.hpp"
#include "setdet/matching.hpp"

namespace setdet {

using Rng = std::mt19937_64;

struct DecoderConfig {
  int feature_dim = 64;
  int hidden_dim = 32;
  int steps = 5;
  // One output head shared by all steps instead of one head per step.
  bool tied_heads = false;
  // When false the features are only presented at the first step and the
  // later steps see zeros in their place.
  bool features_every_step = true;
  // Alternative reading of the hidden output: h = o * tanh(c) rather than
  // the default h = o * c.
  bool tanh_on_cell_output = false;
  // Features are divided by input_scale before entering the LSTM; raw
  // position outputs are multiplied by output_scale.
  double input_scale = 100.0;
  double output_scale = 100.0;

  int input_dim() const { return feature_dim + hidden_dim; }
  int head_count() const { return tied_heads ? 1 : steps; }

  void validate() const;
  friend bool operator==(const DecoderConfig&, const DecoderConfig&) = default;
};

// All trainable weights, stored contiguously: the four gate matrices
// (input, forget, output, cell candidate) stacked into one
// (4H x (F + H)) row-major block, followed by head_count() output heads of
// shape (5 x H). There are no bias terms. The same type holds gradients and
// momentum buffers.
class DecoderParams {
 public:
  DecoderParams() = default;
  explicit DecoderParams(const DecoderConfig& config);

  static DecoderParams uniform(const DecoderConfig& config, Rng& rng,
                               double limit = 0.1);

  const DecoderConfig& config() const { return config_; }

  std::span<double> gates();
  std::span<const double> gates() const;
  // Head used at `step` (0-based); the shared head when tied.
  std::span<double> head(int step);
  std::span<const double> head(int step) const;

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }

  std::size_t size() const { return values_.size(); }

  // Named views for serialization: "gates", "head0", "head1", ...
  struct TensorView {
    std::string name;
    std::size_t rows;
    std::size_t cols;
    std::size_t offset;
  };
  std::vector<TensorView> tensors() const;

  void set_zero();

  friend bool operator==(const DecoderParams&, const DecoderParams&) = default;

 private:
  std::size_t gate_size() const;
  std::size_t head_size() const;

  DecoderConfig config_;
  std::vector<double> values_;
};

struct DecoderState {
  std::vector<double> cell;
  std::vector<double> hidden;
  int step = 0;
};

DecoderState initial_state(const DecoderConfig& config);

struct StepOutput {
  DecoderState state;
  // Four raw position values then the confidence logit.
  std::array<double, 5> raw_output{};
};

// One LSTM step in evaluation mode. `input` is the already scaled feature
// vector; it is concatenated with state.hidden. The head used is the one for
// state.step.
StepOutput lstm_step(const DecoderParams& params, const DecoderState& state,
                     std::span<const double> input);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// Candidates in emission order with ranks 1..S. Geometry is relative to the
// region center; region_origin is that center in image pixels.
struct RegionPrediction {
  std::vector<Candidate> candidates;
  Point2 region_origin;
};

struct DropoutResult {
  std::vector<double> output;
  // Per-unit multiplier applied: 0 or 1 / (1 - rate).
  std::vector<double> scale;
};

// Inverted dropout. Identity (scale 1) when `training` is false or rate is 0.
DropoutResult apply_dropout(std::span<const double> hidden, double rate,
                            Rng& rng, bool training);

// Everything the backward pass needs from one forward pass.
struct ForwardCache {
  struct Step {
    std::vector<double> z;  // [scaled features or zeros ; previous output]
    std::vector<double> in_gate, forget_gate, out_gate, cand;
    std::vector<double> cell_prev, cell;
    std::vector<double> cell_out;  // c or tanh(c)
    std::vector<double> drop_scale;
    std::vector<double> output;  // dropped-out hidden fed to head and next step
    std::array<double, 5> raw{};
  };
  std::vector<Step> steps;
};

struct DropoutSpec {
  double rate = 0.0;
  Rng* rng = nullptr;  // null disables dropout
};

// Runs all S steps from the zero state. Position = output_scale * raw,
// confidence = sigmoid(raw logit).
RegionPrediction decode_region(const DecoderParams& params,
                               std::span<const double> features,
                               ForwardCache* cache = nullptr,
                               DropoutSpec dropout = {});

struct DecoderGradients {
  DecoderParams params;
  std::vector<double> d_features;
};

// Reverse-mode gradients of a scalar loss whose gradients with respect to
// the emitted candidates (pixel positions and confidence logits) are
// `upstream`.
DecoderGradients decoder_backward(const DecoderParams& params,
                                  const ForwardCache& cache,
                                  const LossGradients& upstream);

// Keeps candidates up to (not including) the first one below `threshold`.
std::vector<Candidate> threshold_cutoff(const RegionPrediction& prediction,
                                        double threshold);

struct Checkpoint {
  DecoderParams params;
  std::optional<DecoderParams> velocity;
  std::int64_t iteration = 0;
};

inline constexpr int kCheckpointFormatVersion = 1;

// Text format with a version line, the decoder config, and named tensors
// with explicit shapes. Values are written in shortest round-trip form.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace setdet

#endif  // SETDET_DECODER_HPP_
