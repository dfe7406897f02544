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
#ifndef SETDET_COST_TUPLE_HPP_
#define SETDET_COST_TUPLE_HPP_

#include <cstdint>
#include <ostream>

namespace setdet {

// Matching edge weight (overlap miss, rank, L1 distance). Ordered
// lexicographically, added element-wise. Subtraction exists so the tuple
// can carry Hungarian dual potentials, which may go negative.
struct CostTuple {
  std::int64_t o = 0;
  std::int64_t r = 0;
  double d = 0.0;

  friend bool operator==(const CostTuple&, const CostTuple&) = default;
};

inline CostTuple tuple_add(const CostTuple& a, const CostTuple& b) {
  return {a.o + b.o, a.r + b.r, a.d + b.d};
}

inline bool tuple_less(const CostTuple& a, const CostTuple& b) {
  if (a.o != b.o) return a.o < b.o;
  if (a.r != b.r) return a.r < b.r;
  return a.d < b.d;
}

inline CostTuple operator+(const CostTuple& a, const CostTuple& b) {
  return tuple_add(a, b);
}
inline CostTuple operator-(const CostTuple& a, const CostTuple& b) {
  return {a.o - b.o, a.r - b.r, a.d - b.d};
}
inline CostTuple& operator+=(CostTuple& a, const CostTuple& b) {
  return a = a + b;
}
inline CostTuple& operator-=(CostTuple& a, const CostTuple& b) {
  return a = a - b;
}
inline bool operator<(const CostTuple& a, const CostTuple& b) {
  return tuple_less(a, b);
}

// Integer parts equal and distances equal up to relative 1e-9. Used to
// detect ties between matchings whose distance sums were accumulated in
// different orders.
bool tuple_near_equal(const CostTuple& a, const CostTuple& b);

std::ostream& operator<<(std::ostream& os, const CostTuple& t);

// Stitching edge weight (m, d): m = 1 iff the two boxes do not intersect.
struct StitchCost {
  std::int64_t m = 0;
  double d = 0.0;

  friend bool operator==(const StitchCost&, const StitchCost&) = default;
};

inline StitchCost operator+(const StitchCost& a, const StitchCost& b) {
  return {a.m + b.m, a.d + b.d};
}
inline StitchCost operator-(const StitchCost& a, const StitchCost& b) {
  return {a.m - b.m, a.d - b.d};
}
inline StitchCost& operator+=(StitchCost& a, const StitchCost& b) {
  return a = a + b;
}
inline StitchCost& operator-=(StitchCost& a, const StitchCost& b) {
  return a = a - b;
}
inline bool operator<(const StitchCost& a, const StitchCost& b) {
  if (a.m != b.m) return a.m < b.m;
  return a.d < b.d;
}

}  // namespace setdet

#endif  // SETDET_COST_TUPLE_HPP_
