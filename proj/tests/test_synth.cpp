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

#include <gtest/gtest.h>

#include <cmath>

#include "cascadev/errors.hpp"
#include "cascadev/io.hpp"
#include "cascadev/overlap.hpp"
#include "cascadev/synth.hpp"

namespace cascadev {
namespace {

TEST(Synth, DeterministicPerSeed) {
  const SceneConfig cfg;
  EXPECT_EQ(scene_to_json(gen_scene(cfg, 77)).dump(), scene_to_json(gen_scene(cfg, 77)).dump());
  EXPECT_NE(scene_to_json(gen_scene(cfg, 77)).dump(), scene_to_json(gen_scene(cfg, 78)).dump());
}

TEST(Synth, SceneInvariantsOverSeeds) {
  SceneConfig cfg;
  for (bool yaw : {false, true}) {
    cfg.yaw_enabled = yaw;
    for (uint64_t seed = 0; seed < 100; ++seed) {
      const SyntheticScene s = gen_scene(cfg, seed);
      const int n = static_cast<int>(s.gt_boxes.size());
      EXPECT_GE(n, cfg.num_gt_min);
      EXPECT_LE(n, cfg.num_gt_max);
      for (int a = 0; a < n; ++a) {
        const auto& b = s.gt_boxes[static_cast<size_t>(a)];
        EXPECT_TRUE(b.class_id.has_value());
        if (!yaw) {
          EXPECT_EQ(b.yaw, 0.0);
        }
        for (const auto& c : b.bev_corners()) {
          EXPECT_LE(std::abs(c[0]), cfg.workspace_x / 2 + 1e-9);
          EXPECT_LE(std::abs(c[1]), cfg.workspace_y / 2 + 1e-9);
        }
        for (int c = a + 1; c < n; ++c) {
          EXPECT_EQ(iou_rotated(b, s.gt_boxes[static_cast<size_t>(c)]), 0.0);
        }
      }
      ASSERT_EQ(s.points.size(), s.features.size());
      for (size_t i = 0; i < s.points.size(); ++i) {
        EXPECT_EQ(s.features[i].size(), static_cast<size_t>(cfg.feature_dim));
        if (s.point_kinds[i] == PointKind::kClutter) {
          EXPECT_FALSE(s.point_gt_labels[i].has_value());
          for (const auto& b : s.gt_boxes) EXPECT_FALSE(point_in_scaled_box(s.points[i], b, 0.5));
          continue;
        }
        const auto& b = s.gt_boxes[*s.point_gt_labels[i]];
        const Point3 q = b.to_local(s.points[i]);
        const double ex = std::abs(q.x) - b.size.w / 2, ey = std::abs(q.y) - b.size.l / 2,
                     ez = std::abs(q.z) - b.size.h / 2;
        const double gap = std::max({ex, ey, ez});
        if (s.point_kinds[i] == PointKind::kSurface) {
          EXPECT_NEAR(gap, 0.0, 1e-9);
        } else {
          EXPECT_LE(gap, 1e-9);
        }
      }
    }
  }
}

TEST(Synth, PlacementAndConfigErrors) {
  SceneConfig cramped;
  cramped.workspace_x = 2.2;
  cramped.workspace_y = 2.2;
  cramped.num_gt_min = cramped.num_gt_max = 4;
  EXPECT_THROW(gen_scene(cramped, 1), PlacementError);
  SceneConfig bad;
  bad.num_gt_min = 3;
  bad.num_gt_max = 2;
  EXPECT_THROW(gen_scene(bad, 1), ConfigError);
  bad = SceneConfig{};
  bad.feature_dim = 3;
  EXPECT_THROW(gen_scene(bad, 1), ConfigError);
  EXPECT_THROW((OracleNoise{0.0, 0.0, 1.0, 0.0, 0}.validate()), ConfigError);
  EXPECT_THROW((OracleNoise{-0.1, 0.0, 0.0, 0.0, 0}.validate()), ConfigError);
}

TEST(Synth, NoiselessFeatureEncodesCenterAndClass) {
  SceneConfig cfg;
  cfg.feature_sigma = 0.0;
  const SyntheticScene s = gen_scene(cfg, 9);
  for (size_t i = 0; i < s.points.size(); ++i) {
    const auto& f = s.features[i];
    if (!s.point_gt_labels[i]) {
      for (double v : f) EXPECT_EQ(v, 0.0);
      continue;
    }
    const auto& b = s.gt_boxes[*s.point_gt_labels[i]];
    EXPECT_NEAR(s.points[i].x + f[0], b.center.x, 1e-12);
    EXPECT_NEAR(s.points[i].y + f[1], b.center.y, 1e-12);
    EXPECT_NEAR(s.points[i].z + f[2], b.center.z, 1e-12);
    for (int c = 0; c < cfg.num_classes; ++c) {
      EXPECT_EQ(f[3 + static_cast<size_t>(c)], c == *b.class_id ? 1.0 : 0.0);
    }
  }
}

TEST(Synth, VotedCenterEstimateBeatsSingleFeature) {
  // Center estimates p_j + offset_j, aggregated by IA-Voting over the box.
  const SceneConfig cfg;
  double mse_single = 0.0, mse_vote = 0.0;
  int n = 0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const SyntheticScene s = gen_scene(cfg, seed);
    std::vector<Point3> src;
    std::vector<FeatureVec> est;
    for (size_t i = 0; i < s.points.size(); ++i) {
      src.push_back(s.points[i]);
      const auto& f = s.features[i];
      est.push_back({s.points[i].x + f[0], s.points[i].y + f[1], s.points[i].z + f[2]});
    }
    for (size_t i = 0; i < s.points.size(); ++i) {
      if (s.point_kinds[i] != PointKind::kSurface) continue;
      const auto& b = s.gt_boxes[*s.point_gt_labels[i]];
      const std::vector<Point3> up{s.points[i]};
      const std::vector<std::optional<OrientedBox>> boxes{b};
      const std::vector<FeatureVec> prior{est[i]};
      const auto out = ia_voting(up, boxes, src, est, prior);
      auto err = [&](const FeatureVec& e) {
        return (e[0] - b.center.x) * (e[0] - b.center.x) +
               (e[1] - b.center.y) * (e[1] - b.center.y) + (e[2] - b.center.z) * (e[2] - b.center.z);
      };
      mse_single += err(est[i]);
      mse_vote += err(out[0]);
      ++n;
    }
  }
  EXPECT_LT(mse_vote / n, mse_single / n);
}

TEST(Synth, ExactOracle) {
  const SyntheticScene s = gen_scene(SceneConfig{}, 12);
  const OraclePredictor oracle = oracle_predictor(s, OracleNoise{});
  for (size_t i = 0; i < s.points.size(); i += 7) {
    Proposal p;
    p.point = s.points[i];
    p.feature = s.features[i];
    p.origin_index = i;
    const Prediction pred = oracle.predict(p, 1);
    const auto& gt = s.gt_boxes[*responsible_gt(p.point, s.gt_boxes)];
    const OrientedBox box = decode_box(p.point, pred.deltas);
    EXPECT_NEAR(box.center.x, gt.center.x, 1e-9);
    EXPECT_NEAR(box.center.y, gt.center.y, 1e-9);
    EXPECT_NEAR(box.center.z, gt.center.z, 1e-9);
    EXPECT_NEAR(box.size.w, gt.size.w, 1e-9);
    EXPECT_NEAR(box.size.l, gt.size.l, 1e-9);
    EXPECT_NEAR(box.size.h, gt.size.h, 1e-9);
    EXPECT_EQ(best_object_class(pred).first, *gt.class_id);
    EXPECT_EQ(pred.centerness, centerness(encode_deltas(p.point, gt)));
  }
  EXPECT_THROW(OraclePredictor({}, 2, OracleNoise{}), InvalidArgumentError);
}

double mean_iou(double sigma) {
  double total = 0.0;
  size_t n = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const SyntheticScene s = gen_scene(SceneConfig{}, seed);
    const OraclePredictor oracle = oracle_predictor(s, OracleNoise{sigma, 0.0, 0.0, 0.0, seed});
    for (size_t i = 0; i < s.points.size(); ++i) {
      if (!s.point_gt_labels[i]) continue;
      Proposal p;
      p.point = s.points[i];
      p.origin_index = i;
      const Prediction pred = oracle.predict(p, 1);
      const auto& gt = s.gt_boxes[*responsible_gt(p.point, s.gt_boxes)];
      try {
        total += iou_rotated(decode_box(p.point, pred.deltas), gt);
      } catch (const InvalidDeltasError&) {
      }
      ++n;
    }
  }
  return total / n;
}

TEST(Synth, IouFallsAsDeltaNoiseGrows) {
  double prev = 1.0 + 1e-12;
  for (double sigma : {0.0, 0.05, 0.1, 0.2}) {
    const double m = mean_iou(sigma);
    EXPECT_LT(m, prev) << "sigma " << sigma;
    prev = m;
  }
}

TEST(Synth, ClassFlipRate) {
  for (double flip : {0.0, 0.3}) {
    size_t right = 0, n = 0;
    for (uint64_t seed = 0; seed < 30; ++seed) {
      const SyntheticScene s = gen_scene(SceneConfig{}, seed);
      const OraclePredictor oracle = oracle_predictor(s, OracleNoise{0.0, 0.0, flip, 0.0, seed});
      for (size_t i = 0; i < s.points.size(); ++i) {
        Proposal p;
        p.point = s.points[i];
        p.origin_index = i;
        const auto& gt = s.gt_boxes[*responsible_gt(p.point, s.gt_boxes)];
        right += best_object_class(oracle.predict(p, 1)).first == *gt.class_id;
        ++n;
      }
    }
    const double acc = static_cast<double>(right) / n;
    if (flip == 0.0) {
      EXPECT_EQ(acc, 1.0);
    } else {
      EXPECT_NEAR(acc, 0.7, 0.02);
    }
  }
}

}  // namespace
}  // namespace cascadev
