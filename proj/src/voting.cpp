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

#include "cascadev/voting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cascadev/errors.hpp"

namespace cascadev {

Weighting parse_weighting(std::string_view name) {
  if (name == "exp_neg_dist") return Weighting::kExpNegDist;
  if (name == "literal") return Weighting::kLiteral;
  throw ConfigError("unknown weighting '" + std::string(name) + "'");
}

std::string_view to_string(Weighting w) {
  return w == Weighting::kLiteral ? "literal" : "exp_neg_dist";
}

double voting_weight(double dist, Weighting weighting) {
  return weighting == Weighting::kLiteral ? -std::exp(dist) : std::exp(-dist);
}

std::vector<FeatureVec> ia_voting(std::span<const Point3> updated_points,
                                  std::span<const std::optional<OrientedBox>> predicted_boxes,
                                  std::span<const Point3> source_points,
                                  std::span<const FeatureVec> source_features,
                                  std::span<const FeatureVec> prior_features,
                                  Weighting weighting) {
  if (updated_points.size() != predicted_boxes.size() ||
      updated_points.size() != prior_features.size()) {
    throw MisalignmentError("proposal lists are not aligned");
  }
  if (source_points.size() != source_features.size()) {
    throw MisalignmentError("source points and features are not aligned");
  }
  std::optional<size_t> dim;
  auto check_dim = [&](const FeatureVec& f) {
    if (!dim) dim = f.size();
    if (f.size() != *dim) throw DimensionMismatchError("feature dimensions differ");
  };
  for (const auto& f : source_features) check_dim(f);
  for (const auto& f : prior_features) check_dim(f);

  std::vector<FeatureVec> out;
  out.reserve(updated_points.size());
  std::vector<size_t> members;
  std::vector<double> dist;
  for (size_t i = 0; i < updated_points.size(); ++i) {
    members.clear();
    dist.clear();
    if (predicted_boxes[i]) {
      for (size_t j = 0; j < source_points.size(); ++j) {
        if (point_in_scaled_box(source_points[j], *predicted_boxes[i], 0.5)) {
          members.push_back(j);
          dist.push_back(norm(updated_points[i] - source_points[j]));
        }
      }
    }
    if (members.empty()) {
      out.push_back(prior_features[i]);
      continue;
    }
    // Shift exponents by the extreme distance; the normalized weights are
    // unchanged and cannot underflow to an all-zero mask.
    const auto [dmin, dmax] = std::minmax_element(dist.begin(), dist.end());
    const double shift = weighting == Weighting::kLiteral ? *dmax : *dmin;
    std::vector<double> w(members.size());
    double total = 0.0;
    for (size_t k = 0; k < members.size(); ++k) {
      w[k] = weighting == Weighting::kLiteral ? std::exp(dist[k] - shift)
                                              : std::exp(-(dist[k] - shift));
      total += w[k];
    }
    FeatureVec q(dim.value_or(0), 0.0);
    for (size_t k = 0; k < members.size(); ++k) {
      const double a = w[k] / total;
      const FeatureVec& src = source_features[members[k]];
      for (size_t c = 0; c < q.size(); ++c) q[c] += a * src[c];
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace cascadev
