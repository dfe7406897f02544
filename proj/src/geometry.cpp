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
#include "setdet/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace setdet {

bool BoxGeometry::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
         std::isfinite(h) && w > 0.0 && h > 0.0;
}

double l1_distance(const BoxGeometry& a, const BoxGeometry& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.w - b.w) +
         std::abs(a.h - b.h);
}

bool center_inside(const BoxGeometry& candidate, const BoxGeometry& gt) {
  return gt.left() <= candidate.x && candidate.x <= gt.right() &&
         gt.top() <= candidate.y && candidate.y <= gt.bottom();
}

double intersection_area(const BoxGeometry& a, const BoxGeometry& b) {
  if (a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0) return 0.0;
  const double iw =
      std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih =
      std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

bool intersects(const BoxGeometry& a, const BoxGeometry& b) {
  return intersection_area(a, b) > 0.0;
}

double iou(const BoxGeometry& a, const BoxGeometry& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  // Extents taken from corner form so identical boxes give exactly 1.
  const double area_a = (a.right() - a.left()) * (a.bottom() - a.top());
  const double area_b = (b.right() - b.left()) * (b.bottom() - b.top());
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace setdet
