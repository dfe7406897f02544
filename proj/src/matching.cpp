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
#include "setdet/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "setdet/error.hpp"
#include "setdet/hungarian.hpp"

namespace setdet {

bool tuple_near_equal(const CostTuple& a, const CostTuple& b) {
  if (a.o != b.o || a.r != b.r) return false;
  const double scale = std::max({1.0, std::abs(a.d), std::abs(b.d)});
  return std::abs(a.d - b.d) <= 1e-9 * scale;
}

std::ostream& operator<<(std::ostream& os, const CostTuple& t) {
  return os << "(" << t.o << ", " << t.r << ", " << t.d << ")";
}

LossMode parse_loss_mode(std::string_view name) {
  if (name == "fix") return LossMode::kFix;
  if (name == "firstk") return LossMode::kFirstK;
  if (name == "hungarian") return LossMode::kHungarian;
  throw Error("unknown loss mode '" + std::string(name) +
              "' (expected fix, firstk or hungarian)");
}

std::string_view loss_mode_name(LossMode mode) {
  switch (mode) {
    case LossMode::kFix:
      return "fix";
    case LossMode::kFirstK:
      return "firstk";
    case LossMode::kHungarian:
      return "hungarian";
  }
  return "?";
}

CostTuple pair_cost(const BoxGeometry& gt, const Candidate& cand,
                    CostMode mode) {
  CostTuple c;
  c.o = (mode == CostMode::kHungarian && !center_inside(cand.geometry, gt))
            ? 1
            : 0;
  c.r = cand.rank;
  c.d = l1_distance(gt, cand.geometry);
  return c;
}

CostTuple total_cost(std::span<const BoxGeometry> gt,
                     std::span<const Candidate> cands, const Matching& m,
                     CostMode mode) {
  validate_matching(m, gt.size(), cands.size());
  CostTuple total;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    total += pair_cost(gt[i], cands[m.assignment[i]], mode);
  }
  return total;
}

std::vector<std::size_t> sort_ground_truth(std::span<const BoxGeometry> gt) {
  std::vector<std::size_t> order(gt.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (gt[a].y != gt[b].y) return gt[a].y < gt[b].y;
                     return gt[a].x < gt[b].x;
                   });
  return order;
}

void validate_matching(const Matching& m, std::size_t n_gt,
                       std::size_t n_candidates) {
  if (m.assignment.size() != n_gt) {
    throw Error("matching covers " + std::to_string(m.assignment.size()) +
                " ground truths, expected " + std::to_string(n_gt));
  }
  std::vector<bool> taken(n_candidates, false);
  for (std::size_t j : m.assignment) {
    if (j >= n_candidates) {
      throw Error("matching refers to candidate " + std::to_string(j) +
                  " of " + std::to_string(n_candidates));
    }
    if (taken[j]) {
      throw Error("matching assigns candidate " + std::to_string(j) +
                  " twice");
    }
    taken[j] = true;
  }
}

namespace {

void require_fits(std::size_t n_gt, std::size_t n_cands) {
  if (n_gt > n_cands) {
    throw Error("cannot match " + std::to_string(n_gt) +
                " ground truths to " + std::to_string(n_cands) +
                " candidates");
  }
}

}  // namespace

Matching match_hungarian(std::span<const BoxGeometry> gt,
                         std::span<const Candidate> cands, CostMode mode) {
  require_fits(gt.size(), cands.size());
  const std::size_t n = gt.size();
  const std::size_t m = cands.size();
  if (n == 0) return {};

  std::vector<CostTuple> table(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      table[i * m + j] = pair_cost(gt[i], cands[j], mode);
    }
  }

  // Any forced-away edge costs more overlap misses than a whole matching
  // of real edges can accumulate.
  const CostTuple forbidden{static_cast<std::int64_t>(n) + 1, 0, 0.0};
  std::vector<std::optional<std::size_t>> forced(n);
  auto solve = [&]() {
    Matching result;
    result.assignment = solve_assignment<CostTuple>(
        n, m, [&](std::size_t i, std::size_t j) {
          if (forced[i] && *forced[i] != j) return table[i * m + j] + forbidden;
          return table[i * m + j];
        });
    return result;
  };

  Matching best = solve();
  const CostTuple optimum = total_cost(gt, cands, best, mode);

  // Pin rows in sort order to the smallest column that keeps the optimum.
  for (std::size_t row : sort_ground_truth(gt)) {
    for (std::size_t col = 0; col < m; ++col) {
      if (col == best.assignment[row]) {
        forced[row] = col;
        break;
      }
      bool col_pinned = false;
      for (std::size_t r = 0; r < n; ++r) {
        if (forced[r] && *forced[r] == col) col_pinned = true;
      }
      if (col_pinned) continue;
      forced[row] = col;
      Matching trial = solve();
      bool honors_pins = true;
      for (std::size_t r = 0; r < n; ++r) {
        if (forced[r] && trial.assignment[r] != *forced[r]) honors_pins = false;
      }
      if (honors_pins &&
          tuple_near_equal(total_cost(gt, cands, trial, mode), optimum)) {
        best = std::move(trial);
        break;
      }
      forced[row].reset();
    }
  }
  return best;
}

Matching match_bruteforce(std::span<const BoxGeometry> gt,
                          std::span<const Candidate> cands, CostMode mode) {
  require_fits(gt.size(), cands.size());
  if (cands.size() > 8) {
    throw Error("brute-force matching limited to 8 candidates, got " +
                std::to_string(cands.size()));
  }
  const std::size_t n = gt.size();
  const std::size_t m = cands.size();
  const std::vector<std::size_t> order = sort_ground_truth(gt);

  // Enumerate assignment vectors (in sort order) lexicographically; a later
  // vector only replaces the incumbent when strictly and clearly better.
  std::vector<std::size_t> slot(n, 0);
  std::vector<bool> used(m, false);
  Matching current;
  current.assignment.assign(n, 0);
  std::optional<Matching> best;
  CostTuple best_cost;

  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == n) {
      const CostTuple c = total_cost(gt, cands, current, mode);
      if (!best || (tuple_less(c, best_cost) &&
                    !tuple_near_equal(c, best_cost))) {
        best = current;
        best_cost = c;
      }
      return;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = true;
      current.assignment[order[depth]] = j;
      self(self, depth + 1);
      used[j] = false;
    }
  };
  recurse(recurse, 0);
  return best ? *best : Matching{};
}

Matching match_fixed_order(std::span<const BoxGeometry> gt,
                           std::span<const Candidate> cands) {
  require_fits(gt.size(), cands.size());
  Matching result;
  result.assignment.assign(gt.size(), 0);
  const std::vector<std::size_t> order = sort_ground_truth(gt);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int rank = static_cast<int>(k) + 1;
    auto it = std::find_if(cands.begin(), cands.end(),
                           [&](const Candidate& c) { return c.rank == rank; });
    if (it == cands.end()) {
      throw Error("no candidate with rank " + std::to_string(rank));
    }
    result.assignment[order[k]] =
        static_cast<std::size_t>(std::distance(cands.begin(), it));
  }
  return result;
}

Matching match_for_loss(std::span<const BoxGeometry> gt,
                        std::span<const Candidate> cands, LossMode mode) {
  switch (mode) {
    case LossMode::kFix:
      return match_fixed_order(gt, cands);
    case LossMode::kFirstK:
      return match_hungarian(gt, cands, CostMode::kFirstK);
    case LossMode::kHungarian:
      return match_hungarian(gt, cands, CostMode::kHungarian);
  }
  throw Error("unknown loss mode");
}

}  // namespace setdet
