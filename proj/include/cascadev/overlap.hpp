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

#ifndef CASCADEV_OVERLAP_HPP_
#define CASCADEV_OVERLAP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cascadev/geometry.hpp"

namespace cascadev {

struct Detection {
  OrientedBox box;
  double score = 0.0;
  int class_id = 0;
  int stage = 1;
  // Index of the proposal that produced the detection within its stage.
  size_t proposal = 0;
};

enum class IouVariant {
  kRotated,
  // Compares the axis-aligned boxes enclosing each footprint.
  kAxisAligned,
};

// Plain axis-aligned IoU. Throws WrongVariantError if either yaw is nonzero.
double iou_aabb(const OrientedBox& a, const OrientedBox& b);

// BEV convex clipping of the two footprints times the vertical overlap.
double iou_rotated(const OrientedBox& a, const OrientedBox& b);

// Smallest yaw-free box containing `box`.
OrientedBox enclosing_aabb(const OrientedBox& box);

double iou(const OrientedBox& a, const OrientedBox& b, IouVariant variant);

// Intersection area of two convex polygons given counter-clockwise.
double convex_intersection_area(std::span<const std::array<double, 2>> a,
                                std::span<const std::array<double, 2>> b);

struct MonteCarloIou {
  double estimate = 0.0;
  double std_error = 0.0;
  size_t samples_in_union = 0;
};

// Rejection estimate of IoU from uniform samples over the union's bounding
// box: (#in both) / (#in either).
MonteCarloIou iou_monte_carlo(const OrientedBox& a, const OrientedBox& b,
                              size_t samples, uint64_t seed);

// Greedy class-wise NMS. Returns kept indices in descending score order;
// equal scores keep input order. A detection is dropped when its IoU with an
// already kept detection of the same class exceeds `iou_threshold`.
std::vector<size_t> nms(std::span<const Detection> dets, double iou_threshold,
                        IouVariant variant = IouVariant::kRotated);

}  // namespace cascadev

#endif  // CASCADEV_OVERLAP_HPP_
