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

#include "cascadev/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "cascadev/assignment.hpp"
#include "cascadev/errors.hpp"
#include "cascadev/overlap.hpp"

namespace cascadev {
namespace {

constexpr int kMaxPlacementAttempts = 1000;

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("scene config: ") + what);
}

// Uniform point on the box surface (faces picked by area) in box-local
// coordinates. Returns the face axis and sign through out-params.
Point3 sample_surface_local(const BoxSize& s, Rng& rng, int& axis, double& sign) {
  const std::array<double, 3> area = {s.l * s.h, s.w * s.h, s.w * s.l};
  const double total = 2.0 * (area[0] + area[1] + area[2]);
  double u = rng.uniform() * total;
  axis = 2;
  for (int k = 0; k < 3; ++k) {
    if (u < 2.0 * area[static_cast<size_t>(k)]) {
      axis = k;
      break;
    }
    u -= 2.0 * area[static_cast<size_t>(k)];
  }
  sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const std::array<double, 3> half = {0.5 * s.w, 0.5 * s.l, 0.5 * s.h};
  std::array<double, 3> q{};
  for (int k = 0; k < 3; ++k) {
    q[static_cast<size_t>(k)] = k == axis ? sign * half[static_cast<size_t>(k)]
                                          : rng.uniform(-half[static_cast<size_t>(k)],
                                                        half[static_cast<size_t>(k)]);
  }
  return {q[0], q[1], q[2]};
}

double component(const Point3& p, int axis) {
  return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
}

void set_component(Point3& p, int axis, double v) {
  (axis == 0 ? p.x : axis == 1 ? p.y : p.z) = v;
}

double half_extent(const BoxSize& s, int axis) {
  return 0.5 * (axis == 0 ? s.w : axis == 1 ? s.l : s.h);
}

bool footprint_inside(const OrientedBox& box, const SceneConfig& cfg) {
  for (const auto& c : box.bev_corners()) {
    if (std::abs(c[0]) > 0.5 * cfg.workspace_x || std::abs(c[1]) > 0.5 * cfg.workspace_y) {
      return false;
    }
  }
  return box.size.h <= cfg.workspace_z;
}

}  // namespace

void SceneConfig::validate() const {
  require(num_gt_min >= 1 && num_gt_min <= num_gt_max, "need 1 <= num_gt_min <= num_gt_max");
  require(size_min.w > 0 && size_min.l > 0 && size_min.h > 0, "sizes must be positive");
  require(size_min.w <= size_max.w && size_min.l <= size_max.l && size_min.h <= size_max.h,
          "size_min must not exceed size_max");
  require(class_size_jitter >= 0.0 && class_size_jitter < 1.0,
          "class_size_jitter must lie in [0, 1)");
  require(surface_points_per_box >= 0 && interior_points_per_box >= 0 && clutter_points >= 0,
          "point counts must be non-negative");
  require(interior_depth > 0.0 && interior_depth <= 1.0, "interior_depth must lie in (0, 1]");
  require(workspace_x > 0 && workspace_y > 0 && workspace_z > 0, "workspace must be positive");
  require(size_max.h <= workspace_z, "boxes must fit under the workspace height");
  require(num_classes >= 1, "need at least one class");
  require(feature_dim >= 3 + num_classes, "feature_dim must hold offset and class one-hot");
  require(feature_sigma >= 0.0, "feature_sigma must be non-negative");
}

BoxSize SceneConfig::class_template(int class_id) const {
  Rng rng(derive_seed(class_seed, {static_cast<uint64_t>(class_id)}));
  return {rng.uniform(size_min.w, size_max.w), rng.uniform(size_min.l, size_max.l),
          rng.uniform(size_min.h, size_max.h)};
}

FeatureVec make_feature(const Point3& p, const OrientedBox* gt, int num_classes, int dim,
                        double sigma, Rng& rng) {
  FeatureVec f(static_cast<size_t>(dim));
  for (double& v : f) v = sigma * rng.normal();
  if (gt == nullptr) return f;
  const Point3 off = gt->center - p;
  f[0] += off.x;
  f[1] += off.y;
  f[2] += off.z;
  const int cls = gt->class_id.value_or(0);
  if (cls >= 0 && cls < num_classes) f[3 + static_cast<size_t>(cls)] += 1.0;
  return f;
}

SyntheticScene gen_scene(const SceneConfig& cfg, uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  SyntheticScene scene;
  scene.seed = seed;
  scene.num_classes = cfg.num_classes;

  const int num_gt = cfg.num_gt_min +
                     static_cast<int>(rng.below(static_cast<uint64_t>(cfg.num_gt_max - cfg.num_gt_min + 1)));
  for (int g = 0; g < num_gt; ++g) {
    const int cls = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.num_classes)));
    const BoxSize tmpl = cfg.class_template(cls);
    auto jitter = [&](double base, double lo, double hi) {
      return std::clamp(base * (1.0 + cfg.class_size_jitter * rng.uniform(-1.0, 1.0)), lo, hi);
    };
    const BoxSize size{jitter(tmpl.w, cfg.size_min.w, cfg.size_max.w),
                       jitter(tmpl.l, cfg.size_min.l, cfg.size_max.l),
                       jitter(tmpl.h, cfg.size_min.h, cfg.size_max.h)};
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const double yaw = cfg.yaw_enabled ? rng.uniform(-std::numbers::pi, std::numbers::pi) : 0.0;
      const Point3 c{rng.uniform(-0.5, 0.5) * cfg.workspace_x,
                     rng.uniform(-0.5, 0.5) * cfg.workspace_y, 0.5 * size.h};
      const OrientedBox box = OrientedBox::make(c, size, yaw, cls);
      if (!footprint_inside(box, cfg)) continue;
      const bool clear = std::none_of(scene.gt_boxes.begin(), scene.gt_boxes.end(),
                                      [&](const OrientedBox& o) { return iou_rotated(box, o) > 0.0; });
      if (clear) {
        scene.gt_boxes.push_back(box);
        placed = true;
      }
    }
    if (!placed) {
      throw PlacementError("could not place box " + std::to_string(g) + " after " +
                           std::to_string(kMaxPlacementAttempts) + " attempts");
    }
  }

  auto add_point = [&](const Point3& p, std::optional<size_t> label, PointKind kind) {
    const OrientedBox* gt = label ? &scene.gt_boxes[*label] : nullptr;
    scene.points.push_back(p);
    scene.features.push_back(
        make_feature(p, gt, cfg.num_classes, cfg.feature_dim, cfg.feature_sigma, rng));
    scene.point_gt_labels.push_back(label);
    scene.point_kinds.push_back(kind);
  };

  for (size_t g = 0; g < scene.gt_boxes.size(); ++g) {
    const OrientedBox& box = scene.gt_boxes[g];
    int axis = 0;
    double sign = 1.0;
    for (int i = 0; i < cfg.surface_points_per_box; ++i) {
      add_point(box.to_world(sample_surface_local(box.size, rng, axis, sign)), g,
                PointKind::kSurface);
    }
    for (int i = 0; i < cfg.interior_points_per_box; ++i) {
      Point3 q = sample_surface_local(box.size, rng, axis, sign);
      const double h = half_extent(box.size, axis);
      const double depth = rng.uniform() * cfg.interior_depth * h;
      set_component(q, axis, component(q, axis) - sign * depth);
      add_point(box.to_world(q), g, PointKind::kInterior);
    }
  }

  for (int i = 0; i < cfg.clutter_points; ++i) {
    Point3 p;
    bool inside = true;
    for (int attempt = 0; inside; ++attempt) {
      if (attempt == kMaxPlacementAttempts) throw PlacementError("could not place clutter point");
      p = {rng.uniform(-0.5, 0.5) * cfg.workspace_x, rng.uniform(-0.5, 0.5) * cfg.workspace_y,
           rng.uniform(0.0, cfg.workspace_z)};
      inside = std::any_of(scene.gt_boxes.begin(), scene.gt_boxes.end(),
                           [&](const OrientedBox& b) { return point_in_scaled_box(p, b, 0.5); });
    }
    add_point(p, std::nullopt, PointKind::kClutter);
  }
  return scene;
}

void OracleNoise::validate() const {
  const bool ok = sigma_delta >= 0.0 && sigma_heading >= 0.0 && centerness_bias >= 0.0 &&
                  p_class_flip >= 0.0 && p_class_flip < 1.0;
  if (!ok) throw ConfigError("oracle noise parameters out of range");
}

OraclePredictor::OraclePredictor(std::vector<OrientedBox> gts, int num_classes,
                                 OracleNoise noise)
    : gts_(std::move(gts)), num_classes_(num_classes), noise_(noise) {
  noise_.validate();
  if (gts_.empty()) throw InvalidArgumentError("oracle predictor needs at least one ground truth");
  if (num_classes_ < 1) throw InvalidArgumentError("oracle predictor needs a class");
}

Prediction OraclePredictor::predict(const Proposal& proposal, int stage) const {
  const size_t g = proposal.is_denoising && proposal.denoising_gt && *proposal.denoising_gt < gts_.size()
                       ? *proposal.denoising_gt
                       : *responsible_gt(proposal.point, gts_);
  const OrientedBox& gt = gts_[g];
  Rng rng(derive_seed(noise_.seed, {static_cast<uint64_t>(stage), proposal.origin_index,
                                    proposal.is_denoising ? 1ULL : 0ULL}));
  Prediction pred;
  pred.deltas = encode_deltas(proposal.point, gt);
  const double true_c = centerness(pred.deltas);
  if (noise_.sigma_delta > 0.0) {
    for (double& d : pred.deltas.d) d *= rng.normal(1.0, noise_.sigma_delta);
  }
  if (noise_.sigma_heading > 0.0) {
    pred.deltas.heading = normalize_yaw(pred.deltas.heading + noise_.sigma_heading * rng.normal());
  }
  int cls = std::clamp(gt.class_id.value_or(0), 0, num_classes_ - 1);
  if (noise_.p_class_flip > 0.0 && num_classes_ > 1 && rng.uniform() < noise_.p_class_flip) {
    const int shift = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(num_classes_ - 1)));
    cls = (cls + shift) % num_classes_;
  }
  pred.class_probs.assign(static_cast<size_t>(num_classes_) + 1, 0.0);
  pred.class_probs[static_cast<size_t>(cls)] = 1.0;
  double c = true_c;
  if (noise_.centerness_bias > 0.0) c += noise_.centerness_bias * rng.normal();
  pred.centerness = std::clamp(c, 0.0, 1.0);
  return pred;
}

OraclePredictor oracle_predictor(const SyntheticScene& scene, const OracleNoise& noise) {
  return OraclePredictor(scene.gt_boxes, scene.num_classes, noise);
}

}  // namespace cascadev
