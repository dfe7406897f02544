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
#ifndef SETDET_LOSS_HPP_
#define SETDET_LOSS_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "setdet/geometry.hpp"
#include "setdet/matching.hpp"

namespace setdet {

// Trade-off between localization and confidence errors.
inline constexpr double kDefaultAlpha = 0.03;

struct LossBreakdown {
  double position_term = 0.0;    // alpha * sum of matched L1 distances
  double confidence_term = 0.0;  // sum of per-candidate cross entropies
  double total = 0.0;
  double alpha = kDefaultAlpha;
};

// Gradients in pixel units for positions (x, y, w, h) and with respect to
// the pre-sigmoid confidence logit.
struct LossGradients {
  std::vector<std::array<double, 4>> d_positions;
  std::vector<double> d_confidence_logits;
};

// y_j = 1 iff candidate j is assigned to some ground truth.
std::vector<int> confidence_labels(const Matching& matching,
                                   std::size_t n_candidates);

// -(y ln c + (1 - y) ln(1 - c)). c is clamped to [1e-12, 1 - 1e-12] so a
// saturated sigmoid still yields a finite loss.
double cross_entropy(double confidence, int label);

double sigmoid(double z);

LossBreakdown loss_value(std::span<const BoxGeometry> gt,
                         std::span<const Candidate> cands,
                         const Matching& matching,
                         double alpha = kDefaultAlpha);

// Subgradient sign(0) = 0 at L1 kinks.
LossGradients loss_gradients(std::span<const BoxGeometry> gt,
                             std::span<const Candidate> cands,
                             const Matching& matching,
                             double alpha = kDefaultAlpha);

}  // namespace setdet

#endif  // SETDET_LOSS_HPP_
