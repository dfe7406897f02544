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
#ifndef SETDET_MATCHING_HPP_
#define SETDET_MATCHING_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "setdet/cost_tuple.hpp"
#include "setdet/geometry.hpp"

namespace setdet {

// One decoder output. `rank` is the 1-based emission step.
struct Candidate {
  BoxGeometry geometry;
  double confidence = 0.5;
  int rank = 1;
};

// Injective map from ground-truth index to candidate index (both 0-based).
// assignment[i] is the candidate assigned to ground truth i.
struct Matching {
  std::vector<std::size_t> assignment;

  friend bool operator==(const Matching&, const Matching&) = default;
};

// Pairwise cost variants. kFirstK zeroes the overlap term.
enum class CostMode { kHungarian, kFirstK };

// Which matching function a loss uses.
enum class LossMode { kFix, kFirstK, kHungarian };

LossMode parse_loss_mode(std::string_view name);
std::string_view loss_mode_name(LossMode mode);

CostTuple pair_cost(const BoxGeometry& gt, const Candidate& cand,
                    CostMode mode);

// Sum of pair costs over ground truths, accumulated in ground-truth order.
CostTuple total_cost(std::span<const BoxGeometry> gt,
                     std::span<const Candidate> cands, const Matching& m,
                     CostMode mode);

// Indices of `gt` ordered top to bottom, then left to right, then by input
// index.
std::vector<std::size_t> sort_ground_truth(std::span<const BoxGeometry> gt);

// Minimum-cost injective matching under lexicographic tuple order. Among
// optimal matchings the one whose assignment vector, read in
// sort_ground_truth order, is lexicographically smallest wins.
// Throws Error when |gt| > |cands|.
Matching match_hungarian(std::span<const BoxGeometry> gt,
                         std::span<const Candidate> cands, CostMode mode);

// Exhaustive enumeration with the same optimum and tie-break rule as
// match_hungarian. Limited to |cands| <= 8.
Matching match_bruteforce(std::span<const BoxGeometry> gt,
                          std::span<const Candidate> cands, CostMode mode);

// The i-th ground truth in sort_ground_truth order gets the candidate of
// rank i + 1.
Matching match_fixed_order(std::span<const BoxGeometry> gt,
                           std::span<const Candidate> cands);

// Dispatch on the training loss mode.
Matching match_for_loss(std::span<const BoxGeometry> gt,
                        std::span<const Candidate> cands, LossMode mode);

// Throws Error unless `m` is an injective map of every ground truth into
// [0, n_candidates).
void validate_matching(const Matching& m, std::size_t n_gt,
                       std::size_t n_candidates);

}  // namespace setdet

#endif  // SETDET_MATCHING_HPP_
