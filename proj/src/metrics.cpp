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
#include "setdet/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include "setdet/error.hpp"

namespace setdet {

std::vector<LabeledPrediction> match_for_eval(
    std::span<const Detection> predictions,
    std::span<const BoxGeometry> ground_truth) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });

  std::vector<bool> claimed(ground_truth.size(), false);
  std::vector<LabeledPrediction> out(predictions.size());
  for (std::size_t p : order) {
    out[p].confidence = predictions[p].confidence;
    double best = kIouThreshold;
    std::optional<std::size_t> best_gt;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (claimed[g]) continue;
      const double v = iou(predictions[p].geometry, ground_truth[g]);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best_gt) {
      claimed[*best_gt] = true;
      out[p].true_positive = true;
    }
  }
  return out;
}

PRCurve pr_curve(std::span<const LabeledPrediction> labeled,
                 std::size_t total_gt) {
  if (labeled.empty()) return {};
  if (total_gt == 0) {
    throw Error("recall is undefined without ground truth");
  }
  std::vector<LabeledPrediction> sorted(labeled.begin(), labeled.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LabeledPrediction& a, const LabeledPrediction& b) {
                     return a.confidence > b.confidence;
                   });
  PRCurve curve;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k].true_positive) ++tp; else ++fp;
    const bool last_of_group = k + 1 == sorted.size() ||
                               sorted[k + 1].confidence != sorted[k].confidence;
    if (!last_of_group) continue;
    curve.push_back({sorted[k].confidence,
                     static_cast<double>(tp) / static_cast<double>(tp + fp),
                     static_cast<double>(tp) / static_cast<double>(total_gt)});
  }
  return curve;
}

double average_precision(const PRCurve& curve) {
  if (curve.empty()) return 0.0;
  // Interpolated precision at point k: max precision at any recall >= r_k.
  std::vector<double> envelope(curve.size());
  double running = 0.0;
  for (std::size_t k = curve.size(); k-- > 0;) {
    running = std::max(running, curve[k].precision);
    envelope[k] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    ap += (curve[k].recall - prev_recall) * envelope[k];
    prev_recall = curve[k].recall;
  }
  return ap;
}

// Crossings of precision - recall between adjacent points (or exact zeros)
// are located by linear interpolation; the one at the highest recall wins.
// Without any crossing the point closest to the diagonal is reported as the
// mean of its precision and recall.
double equal_error_rate(const PRCurve& curve) {
  if (curve.empty()) throw Error("equal error rate of an empty curve");
  std::optional<double> best_value;
  double best_recall = -1.0;
  auto consider = [&](double value, double recall) {
    if (!best_value || recall > best_recall) {
      best_value = value;
      best_recall = recall;
    }
  };
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const double dk = curve[k].precision - curve[k].recall;
    if (dk == 0.0) consider(curve[k].precision, curve[k].recall);
    if (k + 1 == curve.size()) break;
    const double dn = curve[k + 1].precision - curve[k + 1].recall;
    if ((dk < 0.0 && dn > 0.0) || (dk > 0.0 && dn < 0.0)) {
      const double t = dk / (dk - dn);
      const double recall =
          curve[k].recall + t * (curve[k + 1].recall - curve[k].recall);
      consider(recall, recall);
    }
  }
  if (best_value) return *best_value;

  const auto closest = std::min_element(
      curve.begin(), curve.end(), [](const PRPoint& a, const PRPoint& b) {
        return std::abs(a.precision - a.recall) <
               std::abs(b.precision - b.recall);
      });
  return 0.5 * (closest->precision + closest->recall);
}

double count_error(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw Error("count_error: image sets differ in size");
  }
  if (predicted.empty()) throw Error("count_error: empty image set");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    sum += std::abs(predicted[i] - truth[i]);
  }
  return sum / static_cast<double>(predicted.size());
}

std::vector<int> counts_at_threshold(
    std::span<const std::vector<double>> confidences_per_image,
    double threshold) {
  std::vector<int> out;
  out.reserve(confidences_per_image.size());
  for (const auto& confs : confidences_per_image) {
    out.push_back(static_cast<int>(
        std::count_if(confs.begin(), confs.end(),
                      [&](double c) { return c >= threshold; })));
  }
  return out;
}

CountThreshold select_count_threshold(
    std::span<const std::vector<double>> confidences_per_image,
    std::span<const int> truth) {
  std::set<double> candidates;
  double top = 0.0;
  for (const auto& confs : confidences_per_image) {
    for (double c : confs) {
      candidates.insert(c);
      top = std::max(top, c);
    }
  }
  candidates.insert(std::nextafter(std::max(top, 1.0),
                                   std::numeric_limits<double>::infinity()));
  std::optional<CountThreshold> best;
  for (double t : candidates) {
    const double err =
        count_error(counts_at_threshold(confidences_per_image, t), truth);
    if (!best || err < best->error) best = CountThreshold{t, err};
  }
  return *best;
}

void write_pr_csv(const std::filesystem::path& path, const PRCurve& curve) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << "threshold,precision,recall\n";
  char buf[64];
  auto put = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, res.ptr - buf);
  };
  for (const PRPoint& p : curve) {
    put(p.threshold);
    os << ',';
    put(p.precision);
    os << ',';
    put(p.recall);
    os << '\n';
  }
  if (!os) throw Error("failed writing " + path.string());
}

}  // namespace setdet
