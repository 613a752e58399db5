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

// Positive/negative target assignment for proposal points.

#ifndef CASCADEV_ASSIGNMENT_HPP_
#define CASCADEV_ASSIGNMENT_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cascadev/geometry.hpp"

namespace cascadev {

// Decreasing per-stage assignment thresholds.
struct CpaSchedule {
  double mu_max = 0.4;
  double mu_min = 0.2;
  int num_stages = 3;

  // Throws InvalidArgumentError unless 0 < mu_min <= mu_max and L >= 1.
  void validate() const;
};

// mu_l = mu_max - (l / L) * (mu_max - mu_min) for 1-based stage l.
double cpa_threshold(int stage, const CpaSchedule& sched);

struct ProposalTarget {
  std::optional<size_t> matched_gt;
  std::optional<Deltas> target_deltas;
  std::optional<double> target_centerness;
  std::optional<int> target_class;
  bool is_denoising = false;

  bool positive() const { return matched_gt.has_value(); }
};

struct Assignment {
  double mu = 0.0;
  std::vector<ProposalTarget> targets;

  // Positives that came from the scaled-box rule; denoising ones excluded.
  size_t positive_count() const;
};

// Full target for `p` against `gt`.
ProposalTarget make_target(const Point3& p, size_t gt_index, const OrientedBox& gt,
                           bool is_denoising = false);

// Index of the smallest-volume ground truth whose mu-scaled box contains p;
// lower index on equal volume. nullopt when none does.
std::optional<size_t> match_scaled(const Point3& p, std::span<const OrientedBox> gts,
                                   double mu);

Assignment assign_targets(std::span<const Point3> points,
                          std::span<const OrientedBox> gts, double mu);

// For each ground-truth center, the point index with the smallest l1
// distance (lowest index on ties). Throws EmptyInputError if `all_points` is
// empty.
std::vector<size_t> select_denoising(std::span<const Point3> all_points,
                                     std::span<const Point3> gt_centers);

// Indices of the B largest values, descending, lower index first on ties.
std::vector<size_t> select_top_b(std::span<const double> predicted_centerness, int b);

// The ground truth a point "belongs to": the smallest box containing it,
// otherwise the one with the nearest center. nullopt only when gts is empty.
std::optional<size_t> responsible_gt(const Point3& p, std::span<const OrientedBox> gts);

}  // namespace cascadev

#endif  // CASCADEV_ASSIGNMENT_HPP_
