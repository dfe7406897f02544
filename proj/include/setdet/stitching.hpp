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
#ifndef SETDET_STITCHING_HPP_
#define SETDET_STITCHING_HPP_

#include <span>
#include <vector>

#include "setdet/cost_tuple.hpp"
#include "setdet/data.hpp"
#include "setdet/decoder.hpp"
#include "setdet/geometry.hpp"

namespace setdet {

StitchCost stitch_cost(const BoxGeometry& accepted, const BoxGeometry& incoming);

// For each incoming box, whether the minimum-cost (m, d) matching against the
// accepted boxes pairs it with a box it intersects. Unmatched sides pair with
// null nodes of cost (1, 0). Each accepted box destroys at most one box.
std::vector<bool> destroyed_by_accepted(std::span<const BoxGeometry> accepted,
                                        std::span<const BoxGeometry> incoming);

// Appends every incoming box that survives destruction to `accepted`.
std::vector<BoxGeometry> stitch_step(std::span<const BoxGeometry> accepted,
                                     std::span<const Candidate> incoming);

// Folds stitch_step over the regions in the given (row-major) order, starting
// from an empty set. Each region is cut at `threshold` first; candidates with
// non-positive width or height are then dropped. Output coordinates are
// image-absolute.
std::vector<PredictedBox> stitch_image(
    std::span<const RegionPrediction> region_predictions, double threshold);

}  // namespace setdet

#endif  // SETDET_STITCHING_HPP_
