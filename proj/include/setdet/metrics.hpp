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
#ifndef SETDET_METRICS_HPP_
#define SETDET_METRICS_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "setdet/geometry.hpp"

namespace setdet {

// A hypothesis is correct when its IoU with a ground truth exceeds this.
inline constexpr double kIouThreshold = 0.5;

struct Detection {
  BoxGeometry geometry;
  double confidence = 0.0;
};

struct LabeledPrediction {
  double confidence = 0.0;
  bool true_positive = false;
};

// Greedy protocol for one image: predictions are visited by descending
// confidence (ties in input order); each claims the unclaimed ground truth
// with the highest IoU if that IoU is > 0.5, otherwise it is a false
// positive. Result is in input order.
std::vector<LabeledPrediction> match_for_eval(
    std::span<const Detection> predictions,
    std::span<const BoxGeometry> ground_truth);

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

// Ordered by descending threshold.
using PRCurve = std::vector<PRPoint>;

// One point per distinct confidence, pooling predictions of all images.
// Throws Error when total_gt is 0 but predictions exist.
PRCurve pr_curve(std::span<const LabeledPrediction> labeled,
                 std::size_t total_gt);

// All-points interpolation; 0 for an empty curve.
double average_precision(const PRCurve& curve);

// Precision = recall operating point (see metrics.cpp for the rules).
double equal_error_rate(const PRCurve& curve);

// Mean absolute difference of per-image counts.
double count_error(std::span<const int> predicted, std::span<const int> truth);

struct CountThreshold {
  double threshold = 0.0;
  double error = 0.0;
};

// Picks the confidence threshold (a prediction counts when its confidence
// is >= threshold) minimizing count_error. Candidates are every distinct
// confidence plus one value above all of them; ties go to the lowest
// threshold.
CountThreshold select_count_threshold(
    std::span<const std::vector<double>> confidences_per_image,
    std::span<const int> truth);

std::vector<int> counts_at_threshold(
    std::span<const std::vector<double>> confidences_per_image,
    double threshold);

// CSV with header "threshold,precision,recall".
void write_pr_csv(const std::filesystem::path& path, const PRCurve& curve);

}  // namespace setdet

#endif  // SETDET_METRICS_HPP_
