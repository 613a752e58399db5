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

// Procedural scenes and the noisy oracle head.

#ifndef CASCADEV_SYNTH_HPP_
#define CASCADEV_SYNTH_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "cascadev/cascade.hpp"
#include "cascadev/geometry.hpp"
#include "cascadev/rng.hpp"
#include "cascadev/voting.hpp"

namespace cascadev {

struct SceneConfig {
  int num_gt_min = 2;
  int num_gt_max = 4;
  BoxSize size_min{0.5, 0.5, 0.4};
  BoxSize size_max{2.0, 2.0, 1.5};
  // Each class has a template size drawn once (from class_seed) inside the
  // size range; instances vary around it by this relative amount.
  double class_size_jitter = 0.15;
  uint64_t class_seed = 7;
  bool yaw_enabled = false;
  int surface_points_per_box = 96;
  // Points below the surface, at most interior_depth of the half extent
  // deep along the face normal.
  int interior_points_per_box = 16;
  double interior_depth = 0.75;
  int clutter_points = 1500;
  // Boxes stand on z = 0 inside [-x/2, x/2] x [-y/2, y/2] x [0, z].
  double workspace_x = 8.0;
  double workspace_y = 8.0;
  double workspace_z = 3.0;
  int num_classes = 4;
  int feature_dim = 16;
  double feature_sigma = 0.05;

  // Throws ConfigError on inconsistent values.
  void validate() const;
  BoxSize class_template(int class_id) const;
};

enum class PointKind { kSurface, kInterior, kClutter };

struct SyntheticScene {
  uint64_t seed = 0;
  int num_classes = 0;
  std::vector<OrientedBox> gt_boxes;
  std::vector<Point3> points;
  std::vector<FeatureVec> features;
  std::vector<std::optional<size_t>> point_gt_labels;
  std::vector<PointKind> point_kinds;
};

// Deterministic in (cfg, seed). Throws PlacementError if a box cannot be
// placed without overlap within 1000 attempts.
SyntheticScene gen_scene(const SceneConfig& cfg, uint64_t seed);

// Features a point would carry: offset to its box center and the box class
// one-hot, each with Gaussian noise, remaining dims pure noise.
FeatureVec make_feature(const Point3& p, const OrientedBox* gt, int num_classes,
                        int dim, double sigma, Rng& rng);

struct OracleNoise {
  double sigma_delta = 0.0;
  double sigma_heading = 0.0;
  double p_class_flip = 0.0;
  double centerness_bias = 0.0;
  uint64_t seed = 0;

  void validate() const;
};

// Predicts from the true geometry of the proposal's responsible ground
// truth, perturbed per OracleNoise. Noise is keyed on (seed, stage,
// proposal identity) so results do not depend on call order.
class OraclePredictor final : public Predictor {
 public:
  OraclePredictor(std::vector<OrientedBox> gts, int num_classes, OracleNoise noise);
  Prediction predict(const Proposal& proposal, int stage) const override;

 private:
  std::vector<OrientedBox> gts_;
  int num_classes_;
  OracleNoise noise_;
};

OraclePredictor oracle_predictor(const SyntheticScene& scene, const OracleNoise& noise);

}  // namespace cascadev

#endif  // CASCADEV_SYNTH_HPP_
