/* Copyright 2026 The CascadeV Authors. All Rights Reserved.

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

#include "cascadev/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cascadev/errors.hpp"

namespace cascadev {

void CpaSchedule::validate() const {
  if (!(mu_min > 0.0 && mu_min <= mu_max)) {
    throw InvalidArgumentError("schedule requires 0 < mu_min <= mu_max");
  }
  if (num_stages < 1) throw InvalidArgumentError("schedule requires at least one stage");
}

double cpa_threshold(int stage, const CpaSchedule& sched) {
  sched.validate();
  if (stage < 1 || stage > sched.num_stages) {
    throw StageRangeError("stage index " + std::to_string(stage) + " outside 1.." +
                          std::to_string(sched.num_stages));
  }
  if (stage == sched.num_stages) return sched.mu_min;
  const double frac = static_cast<double>(stage) / static_cast<double>(sched.num_stages);
  return sched.mu_max - frac * (sched.mu_max - sched.mu_min);
}

size_t Assignment::positive_count() const {
  return static_cast<size_t>(std::count_if(targets.begin(), targets.end(), [](const auto& t) {
    return t.positive() && !t.is_denoising;
  }));
}

ProposalTarget make_target(const Point3& p, size_t gt_index, const OrientedBox& gt,
                           bool is_denoising) {
  ProposalTarget t;
  t.matched_gt = gt_index;
  t.target_deltas = encode_deltas(p, gt);
  t.target_centerness = centerness(*t.target_deltas);
  t.target_class = gt.class_id.value_or(0);
  t.is_denoising = is_denoising;
  return t;
}

std::optional<size_t> match_scaled(const Point3& p, std::span<const OrientedBox> gts,
                                   double mu) {
  std::optional<size_t> best;
  for (size_t g = 0; g < gts.size(); ++g) {
    if (!point_in_scaled_box(p, gts[g], mu)) continue;
    if (!best || gts[g].volume() < gts[*best].volume()) best = g;
  }
  return best;
}

Assignment assign_targets(std::span<const Point3> points,
                          std::span<const OrientedBox> gts, double mu) {
  if (!(mu > 0.0)) throw InvalidArgumentError("assignment threshold must be positive");
  Assignment out;
  out.mu = mu;
  out.targets.reserve(points.size());
  for (const Point3& p : points) {
    const auto g = match_scaled(p, gts, mu);
    out.targets.push_back(g ? make_target(p, *g, gts[*g]) : ProposalTarget{});
  }
  return out;
}

std::vector<size_t> select_denoising(std::span<const Point3> all_points,
                                     std::span<const Point3> gt_centers) {
  if (all_points.empty()) throw EmptyInputError("denoising selection needs points");
  std::vector<size_t> out;
  out.reserve(gt_centers.size());
  for (const Point3& g : gt_centers) {
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t n = 0; n < all_points.size(); ++n) {
      const double d = l1_distance(all_points[n], g);
      if (d < best_d) {
        best_d = d;
        best = n;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<size_t> select_top_b(std::span<const double> predicted_centerness, int b) {
  if (b < 1) throw InvalidArgumentError("B must be at least 1");
  std::vector<size_t> idx(predicted_centerness.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  const size_t k = std::min(idx.size(), static_cast<size_t>(b));
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](size_t i, size_t j) {
                      if (predicted_centerness[i] != predicted_centerness[j]) {
                        return predicted_centerness[i] > predicted_centerness[j];
                      }
                      return i < j;
                    });
  idx.resize(k);
  return idx;
}

std::optional<size_t> responsible_gt(const Point3& p, std::span<const OrientedBox> gts) {
  if (gts.empty()) return std::nullopt;
  if (auto inside = match_scaled(p, gts, 0.5)) return inside;
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t g = 0; g < gts.size(); ++g) {
    const double d = norm(p - gts[g].center);
    if (d < best_d) {
      best_d = d;
      best = g;
    }
  }
  return best;
}

}  // namespace cascadev
