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

#include <random>
#include <vector>

#include "oracles.hpp"
#include "setdet/stitching.hpp"

using namespace setdet;

namespace {

std::vector<Candidate> as_candidates(const std::vector<BoxGeometry>& boxes) {
  std::vector<Candidate> out;
  int rank = 1;
  for (const BoxGeometry& b : boxes) out.push_back({b, 0.9, rank++});
  return out;
}

std::vector<BoxGeometry> random_boxes(std::mt19937_64& rng, std::size_t n) {
  std::vector<BoxGeometry> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_box(rng, 30.0, 4.0, 20.0));
  return out;
}

}  // namespace

TEST_CASE("stitch_cost") {
  const StitchCost touching = stitch_cost({10, 10, 8, 8}, {11, 11, 8, 8});
  CHECK(touching.m == 0);
  CHECK(touching.d == 2.0);
  const StitchCost apart = stitch_cost({10, 10, 8, 8}, {50, 50, 8, 8});
  CHECK(apart.m == 1);
  CHECK(apart.d == 80.0);
}

TEST_CASE("stitch_step examples") {
  const std::vector<BoxGeometry> none;
  const std::vector<BoxGeometry> incoming{{11, 11, 8, 8}, {50, 50, 8, 8}};
  CHECK(stitch_step(none, as_candidates(incoming)) == incoming);

  const std::vector<BoxGeometry> accepted{{10, 10, 8, 8}};
  CHECK(destroyed_by_accepted(accepted, incoming) == std::vector<bool>{true, false});
  CHECK(stitch_step(accepted, as_candidates(incoming)) ==
        std::vector<BoxGeometry>{{10, 10, 8, 8}, {50, 50, 8, 8}});

  // Both intersect the accepted box; only the nearer one is destroyed.
  const std::vector<BoxGeometry> pair{{14, 10, 8, 8}, {11, 10, 8, 8}};
  CHECK(destroyed_by_accepted(accepted, pair) == std::vector<bool>{false, true});
  CHECK(stitch_step(accepted, as_candidates(pair)) ==
        std::vector<BoxGeometry>{{10, 10, 8, 8}, {14, 10, 8, 8}});
}

TEST_CASE("stitch_image") {
  CHECK(stitch_image({}, 0.5).empty());
  std::vector<RegionPrediction> empty_regions(3);
  CHECK(stitch_image(empty_regions, 0.5).empty());

  RegionPrediction r;
  r.region_origin = {100, 50};
  r.candidates = {{{-5, 0, 10, 12}, 0.9, 1},
                  {{20, 3, 8, 8}, 0.7, 2},
                  {{0, 0, 8, 8}, 0.3, 3},
                  {{30, 30, 8, 8}, 0.8, 4}};
  const auto out = stitch_image(std::vector<RegionPrediction>{r}, 0.5);
  REQUIRE(out.size() == 2);
  CHECK(out[0].geometry == BoxGeometry{95, 50, 10, 12});
  CHECK(out[0].confidence == 0.9);
  CHECK(out[0].rank == 1);
  CHECK(out[0].region_index == 0);
  CHECK(out[1].geometry == BoxGeometry{120, 53, 8, 8});

  RegionPrediction degenerate;
  degenerate.candidates = {{{0, 0, -3, 5}, 0.9, 1}, {{0, 0, 5, 5}, 0.9, 2}};
  const auto kept = stitch_image(std::vector<RegionPrediction>{degenerate}, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].rank == 2);
}

TEST_CASE("destruction count is the maximum intersecting matching") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> n(0, 6);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto accepted = random_boxes(rng, n(rng));
    const auto incoming = random_boxes(rng, n(rng));
    std::vector<std::vector<bool>> adj(incoming.size(), std::vector<bool>(accepted.size()));
    for (std::size_t i = 0; i < incoming.size(); ++i) {
      for (std::size_t j = 0; j < accepted.size(); ++j) {
        adj[i][j] = oracle::overlap_area(incoming[i], accepted[j]) > 0.0;
      }
    }
    const auto destroyed = destroyed_by_accepted(accepted, incoming);
    const int count = static_cast<int>(std::count(destroyed.begin(), destroyed.end(), true));
    CHECK(count == oracle::max_matching_exhaustive(adj, accepted.size()));
    for (std::size_t i = 0; i < incoming.size(); ++i) {
      if (destroyed[i]) {
        CHECK(std::any_of(adj[i].begin(), adj[i].end(), [](bool b) { return b; }));
      }
    }
  }
}

TEST_CASE("presenting an identical region twice adds nothing") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> n(0, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto prior = random_boxes(rng, n(rng));
    const auto region = as_candidates(random_boxes(rng, n(rng) + 1));
    const auto once = stitch_step(prior, region);
    const auto twice = stitch_step(once, region);
    CHECK(twice == once);
  }
}

TEST_CASE("stitch_image is idempotent under duplicated regions") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> n(0, 5);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RegionPrediction> regions(3);
    for (std::size_t k = 0; k < regions.size(); ++k) {
      regions[k].region_origin = {32.0 * k, 16.0};
      int rank = 1;
      for (int c = 0; c < 5; ++c) {
        regions[k].candidates.push_back({oracle::random_box(rng, 30.0, 4.0, 20.0),
                                         c < n(rng) ? 0.9 : conf(rng), rank++});
      }
    }
    const auto base = stitch_image(regions, 0.5);
    auto doubled = regions;
    doubled.push_back(regions.back());
    const auto again = stitch_image(doubled, 0.5);
    REQUIRE(again.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(again[i].geometry == base[i].geometry);
  }
}
