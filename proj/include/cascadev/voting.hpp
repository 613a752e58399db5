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

// Instance-aware feature voting.
//
// Each proposal gathers the features of source points lying inside its
// predicted box and averages them with weights that depend on the distance
// from the proposal's updated point:
//
//   q_i = sum_j 1[j in box_i] * w_ij / (sum_k 1[k in box_i] * w_ik) * q_j

#ifndef CASCADEV_VOTING_HPP_
#define CASCADEV_VOTING_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cascadev/geometry.hpp"

namespace cascadev {

using FeatureVec = std::vector<double>;

enum class Weighting {
  // w = exp(-|p'_i - p_j|): nearer sources weigh more.
  kExpNegDist,
  // w = -exp(|p'_i - p_j|) as literally written; after normalization this
  // favours farther sources.
  kLiteral,
};

Weighting parse_weighting(std::string_view name);
std::string_view to_string(Weighting w);

// Unnormalized weight for a source at distance `dist`.
double voting_weight(double dist, Weighting weighting);

// `predicted_boxes[i]` may be empty when a proposal produced no valid box;
// such proposals, and those whose box contains no source, keep
// `prior_features[i]`. Throws MisalignmentError on mismatched list lengths
// and DimensionMismatchError when feature lengths differ.
std::vector<FeatureVec> ia_voting(std::span<const Point3> updated_points,
                                  std::span<const std::optional<OrientedBox>> predicted_boxes,
                                  std::span<const Point3> source_points,
                                  std::span<const FeatureVec> source_features,
                                  std::span<const FeatureVec> prior_features,
                                  Weighting weighting = Weighting::kExpNegDist);

}  // namespace cascadev

#endif  // CASCADEV_VOTING_HPP_
