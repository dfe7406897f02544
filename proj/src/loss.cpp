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
#include "setdet/loss.hpp"

#include <algorithm>
#include <cmath>

namespace setdet {

namespace {

constexpr double kConfidenceFloor = 1e-12;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<int> confidence_labels(const Matching& matching,
                                   std::size_t n_candidates) {
  std::vector<int> y(n_candidates, 0);
  for (std::size_t j : matching.assignment) {
    if (j < n_candidates) y[j] = 1;
  }
  return y;
}

double cross_entropy(double confidence, int label) {
  const double c =
      std::clamp(confidence, kConfidenceFloor, 1.0 - kConfidenceFloor);
  return label != 0 ? -std::log(c) : -std::log1p(-c);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LossBreakdown loss_value(std::span<const BoxGeometry> gt,
                         std::span<const Candidate> cands,
                         const Matching& matching, double alpha) {
  validate_matching(matching, gt.size(), cands.size());
  LossBreakdown out;
  out.alpha = alpha;
  double l1 = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    l1 += l1_distance(gt[i], cands[matching.assignment[i]].geometry);
  }
  out.position_term = alpha * l1;
  const std::vector<int> y = confidence_labels(matching, cands.size());
  for (std::size_t j = 0; j < cands.size(); ++j) {
    out.confidence_term += cross_entropy(cands[j].confidence, y[j]);
  }
  out.total = out.position_term + out.confidence_term;
  return out;
}

LossGradients loss_gradients(std::span<const BoxGeometry> gt,
                             std::span<const Candidate> cands,
                             const Matching& matching, double alpha) {
  validate_matching(matching, gt.size(), cands.size());
  LossGradients g;
  g.d_positions.assign(cands.size(), {0.0, 0.0, 0.0, 0.0});
  g.d_confidence_logits.assign(cands.size(), 0.0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::size_t j = matching.assignment[i];
    const BoxGeometry& c = cands[j].geometry;
    g.d_positions[j] = {alpha * sign(c.x - gt[i].x), alpha * sign(c.y - gt[i].y),
                        alpha * sign(c.w - gt[i].w),
                        alpha * sign(c.h - gt[i].h)};
  }
  const std::vector<int> y = confidence_labels(matching, cands.size());
  for (std::size_t j = 0; j < cands.size(); ++j) {
    g.d_confidence_logits[j] = cands[j].confidence - y[j];
  }
  return g;
}

}  // namespace setdet
