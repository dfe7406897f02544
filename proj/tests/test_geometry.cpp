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

#include "oracles.hpp"
#include "setdet/geometry.hpp"

using namespace setdet;

TEST_CASE("l1_distance") {
  CHECK(l1_distance({0, 0, 10, 10}, {0, 0, 10, 10}) == 0.0);
  CHECK(l1_distance({0, 0, 10, 10}, {1, 2, 10, 8}) == 5.0);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const BoxGeometry a = oracle::random_box(rng);
    const BoxGeometry b = oracle::random_box(rng);
    const BoxGeometry c = oracle::random_box(rng);
    CHECK(l1_distance(a, b) == doctest::Approx(oracle::l1_loop(a, b)).epsilon(1e-15));
    CHECK(l1_distance(a, b) == l1_distance(b, a));
    CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12);
  }
}

TEST_CASE("center_inside") {
  const BoxGeometry gt{0, 0, 10, 10};
  CHECK(center_inside({0, 0, 3, 3}, gt));
  CHECK_FALSE(center_inside({100, 100, 4, 4}, gt));
  // Boundary is inclusive on every edge and corner.
  CHECK(center_inside({5, 0, 1, 1}, gt));
  CHECK(center_inside({-5, 0, 1, 1}, gt));
  CHECK(center_inside({0, 5, 1, 1}, gt));
  CHECK(center_inside({5, -5, 1, 1}, gt));
  CHECK_FALSE(center_inside({5.000001, 0, 1, 1}, gt));

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const BoxGeometry g = oracle::random_box(rng);
    CHECK(center_inside(g, g));
  }
}

TEST_CASE("intersects") {
  CHECK(intersects({0, 0, 10, 10}, {0, 0, 10, 10}));
  CHECK_FALSE(intersects({0, 0, 10, 10}, {10, 0, 10, 10}));
  CHECK_FALSE(intersects({0, 0, 10, 10}, {0, 10, 10, 10}));
  CHECK(intersects({0, 0, 10, 10}, {5, 0, 10, 10}));
  CHECK(oracle::overlap_area({0, 0, 10, 10}, {5, 0, 10, 10}) > 0.0);
}

TEST_CASE("iou") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(iou({0, 0, 10, 10}, {50, 50, 10, 10}) == 0.0);
  // Intersection 50, union 150.
  CHECK(iou({0, 0, 10, 10}, {5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("iou properties on random pairs") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const BoxGeometry a = oracle::random_box(rng, 20.0);
    const BoxGeometry b = oracle::random_box(rng, 20.0);
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK((v > 0.0) == intersects(a, b));
    const double inter = oracle::overlap_area(a, b);
    const double expected = inter / (a.w * a.h + b.w * b.h - inter);
    CHECK(v == doctest::Approx(expected).epsilon(1e-12));
    CHECK(iou(a, a) == 1.0);
  }
}

TEST_CASE("validity") {
  CHECK(BoxGeometry{0, 0, 1, 1}.valid());
  CHECK_FALSE(BoxGeometry{0, 0, 0, 1}.valid());
  CHECK_FALSE(BoxGeometry{0, 0, 1, -1}.valid());
  CHECK_FALSE(BoxGeometry{std::nan(""), 0, 1, 1}.valid());
  // Degenerate boxes never intersect anything, not even themselves.
  CHECK_FALSE(intersects({0, 0, 0, 5}, {0, 0, 0, 5}));
}
