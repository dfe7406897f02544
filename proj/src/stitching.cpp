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
#include "setdet/stitching.hpp"

#include "setdet/hungarian.hpp"

namespace setdet {

StitchCost stitch_cost(const BoxGeometry& accepted,
                       const BoxGeometry& incoming) {
  return {intersects(accepted, incoming) ? 0 : 1,
          l1_distance(accepted, incoming)};
}

std::vector<bool> destroyed_by_accepted(std::span<const BoxGeometry> accepted,
                                        std::span<const BoxGeometry> incoming) {
  const std::size_t n = incoming.size();
  const std::size_t a = accepted.size();
  std::vector<bool> destroyed(n, false);
  if (n == 0 || a == 0) return destroyed;

  // Rows are incoming boxes; columns are the accepted boxes followed by one
  // null node per incoming box. Accepted boxes left unmatched implicitly
  // take a null partner, which adds the same (1, 0) to every solution.
  const StitchCost null_cost{1, 0.0};
  const auto cols = solve_assignment<StitchCost>(
      n, a + n, [&](std::size_t i, std::size_t j) {
        return j < a ? stitch_cost(accepted[j], incoming[i]) : null_cost;
      });
  for (std::size_t i = 0; i < n; ++i) {
    destroyed[i] = cols[i] < a && intersects(accepted[cols[i]], incoming[i]);
  }
  return destroyed;
}

std::vector<BoxGeometry> stitch_step(std::span<const BoxGeometry> accepted,
                                     std::span<const Candidate> incoming) {
  std::vector<BoxGeometry> boxes;
  boxes.reserve(incoming.size());
  for (const Candidate& c : incoming) boxes.push_back(c.geometry);
  const std::vector<bool> destroyed = destroyed_by_accepted(accepted, boxes);

  std::vector<BoxGeometry> out(accepted.begin(), accepted.end());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!destroyed[i]) out.push_back(boxes[i]);
  }
  return out;
}

std::vector<PredictedBox> stitch_image(
    std::span<const RegionPrediction> region_predictions, double threshold) {
  std::vector<PredictedBox> accepted;
  std::vector<BoxGeometry> accepted_boxes;
  for (std::size_t r = 0; r < region_predictions.size(); ++r) {
    const RegionPrediction& region = region_predictions[r];
    std::vector<PredictedBox> incoming;
    std::vector<BoxGeometry> incoming_boxes;
    for (const Candidate& c : threshold_cutoff(region, threshold)) {
      if (!(c.geometry.w > 0.0) || !(c.geometry.h > 0.0)) continue;
      PredictedBox p;
      p.geometry = {c.geometry.x + region.region_origin.x,
                    c.geometry.y + region.region_origin.y, c.geometry.w,
                    c.geometry.h};
      p.confidence = c.confidence;
      p.rank = c.rank;
      p.region_index = static_cast<int>(r);
      incoming.push_back(p);
      incoming_boxes.push_back(p.geometry);
    }
    const std::vector<bool> destroyed =
        destroyed_by_accepted(accepted_boxes, incoming_boxes);
    for (std::size_t i = 0; i < incoming.size(); ++i) {
      if (destroyed[i]) continue;
      accepted.push_back(incoming[i]);
      accepted_boxes.push_back(incoming_boxes[i]);
    }
  }
  return accepted;
}

}  // namespace setdet
