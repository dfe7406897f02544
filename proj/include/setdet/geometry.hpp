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
#ifndef SETDET_GEOMETRY_HPP_
#define SETDET_GEOMETRY_HPP_

namespace setdet {

// Axis-aligned box stored as center/size in pixels. Corner form is only
// materialized inside the area computations.
struct BoxGeometry {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x - 0.5 * w; }
  double right() const { return x + 0.5 * w; }
  double top() const { return y - 0.5 * h; }
  double bottom() const { return y + 0.5 * h; }

  // w > 0, h > 0 and all fields finite.
  bool valid() const;

  friend bool operator==(const BoxGeometry&, const BoxGeometry&) = default;
};

// Sum of absolute differences over (x, y, w, h).
double l1_distance(const BoxGeometry& a, const BoxGeometry& b);

// True iff the candidate's center lies inside the extent of `gt`, boundary
// inclusive.
bool center_inside(const BoxGeometry& candidate, const BoxGeometry& gt);

// Area of the overlap rectangle; zero for disjoint or edge-touching boxes.
// Boxes with non-positive extent have zero area.
double intersection_area(const BoxGeometry& a, const BoxGeometry& b);

// Positive-area overlap. Edge contact is not an intersection.
bool intersects(const BoxGeometry& a, const BoxGeometry& b);

double iou(const BoxGeometry& a, const BoxGeometry& b);

}  // namespace setdet

#endif  // SETDET_GEOMETRY_HPP_
