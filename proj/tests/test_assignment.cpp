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

#include <algorithm>
#include <numeric>

#include "cascadev/assignment.hpp"
#include "cascadev/errors.hpp"
#include "cascadev/synth.hpp"
#include "support.hpp"

namespace cascadev {
namespace {

using testing::point_inside;
using testing::random_box;
using testing::random_point;

TEST(Assignment, CpaScheduleValues) {
  const CpaSchedule s;
  EXPECT_NEAR(cpa_threshold(1, s), 0.4 - 0.2 / 3.0, 1e-12);
  EXPECT_NEAR(cpa_threshold(1, s), 0.33333, 1e-5);
  EXPECT_NEAR(cpa_threshold(2, s), 0.26667, 1e-5);
  EXPECT_EQ(cpa_threshold(3, s), 0.2);
  EXPECT_THROW(cpa_threshold(0, s), StageRangeError);
  EXPECT_THROW(cpa_threshold(4, s), StageRangeError);
  EXPECT_THROW((CpaSchedule{0.2, 0.4, 3}.validate()), InvalidArgumentError);
  EXPECT_THROW((CpaSchedule{0.4, 0.2, 0}.validate()), InvalidArgumentError);
  const CpaSchedule flat{0.3, 0.3, 5};
  for (int l = 1; l <= 5; ++l) EXPECT_EQ(cpa_threshold(l, flat), 0.3);
  const CpaSchedule s7{0.6, 0.1, 7};
  for (int l = 2; l <= 7; ++l) EXPECT_LT(cpa_threshold(l, s7), cpa_threshold(l - 1, s7));
}

TEST(Assignment, SimpleExamples) {
  const std::vector<OrientedBox> gts{OrientedBox::make({0, 0, 0}, {2, 2, 2}, 0.0, 1)};
  const std::vector<Point3> pts{{0, 0, 0}, {5, 5, 5}};
  const Assignment a = assign_targets(pts, gts, 0.5);
  ASSERT_TRUE(a.targets[0].positive());
  EXPECT_EQ(*a.targets[0].target_centerness, 1.0);
  EXPECT_EQ(*a.targets[0].target_class, 1);
  EXPECT_FALSE(a.targets[1].positive());
  EXPECT_FALSE(a.targets[1].target_deltas.has_value());
  EXPECT_EQ(a.positive_count(), 1u);
  const Assignment none = assign_targets(pts, std::span<const OrientedBox>(), 0.5);
  EXPECT_EQ(none.positive_count(), 0u);
}

// Exhaustive matcher: every gt containing the point, smallest volume first.
std::optional<size_t> brute_match(const Point3& p, const std::vector<OrientedBox>& gts,
                                  double mu) {
  std::optional<size_t> best;
  for (size_t g = 0; g < gts.size(); ++g) {
    const Deltas d = encode_deltas(p, gts[g]);
    const double sx = (d.d[1] - d.d[0]) / 2, sy = (d.d[3] - d.d[2]) / 2,
                 sz = (d.d[5] - d.d[4]) / 2;
    const bool in = std::abs(sx) <= mu * gts[g].size.w + 1e-9 &&
                    std::abs(sy) <= mu * gts[g].size.l + 1e-9 &&
                    std::abs(sz) <= mu * gts[g].size.h + 1e-9;
    if (in && (!best || gts[g].volume() < gts[*best].volume())) best = g;
  }
  return best;
}

TEST(Assignment, NestedBoxesPreferSmallerVolume) {
  const std::vector<OrientedBox> gts{OrientedBox::make({0, 0, 0}, {4, 4, 4}, 0.0, 0),
                                     OrientedBox::make({0.2, 0, 0}, {1, 1, 1}, 0.5, 2)};
  const Assignment a = assign_targets(std::vector<Point3>{{0.1, 0, 0}}, gts, 0.5);
  EXPECT_EQ(a.targets[0].matched_gt, std::optional<size_t>(1));
  EXPECT_EQ(*a.targets[0].target_class, 2);
}

TEST(Assignment, MatchesExhaustiveOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<OrientedBox> gts;
    for (int g = 0; g < 4; ++g) {
      auto b = random_box(rng, true, 1.0);
      b.class_id = g;
      gts.push_back(b);
    }
    std::vector<Point3> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(random_point(rng, 2.5));
    const double mu = rng.uniform(0.1, 0.6);
    const Assignment a = assign_targets(pts, gts, mu);
    EXPECT_EQ(a.mu, mu);
    for (size_t i = 0; i < pts.size(); ++i) {
      const auto ref = brute_match(pts[i], gts, mu);
      EXPECT_EQ(a.targets[i].matched_gt, ref);
      if (ref) {
        const Deltas d = encode_deltas(pts[i], gts[*ref]);
        EXPECT_EQ(a.targets[i].target_deltas->d, d.d);
        EXPECT_EQ(*a.targets[i].target_centerness, centerness(d));
        if (mu < 0.5) {
          EXPECT_GT(*a.targets[i].target_centerness, 0.0);
        }
      } else {
        EXPECT_FALSE(a.targets[i].target_centerness.has_value());
      }
    }
  }
}

TEST(Assignment, PositiveSetsShrinkWithMu) {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<OrientedBox> gts;
    for (int g = 0; g < 3; ++g) gts.push_back(random_box(rng, true, 1.5));
    std::vector<Point3> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(random_point(rng, 2.5));
    const double mu1 = rng.uniform(0.05, 0.6);
    const double mu2 = rng.uniform(0.01, mu1);
    const Assignment a1 = assign_targets(pts, gts, mu1);
    const Assignment a2 = assign_targets(pts, gts, mu2);
    for (size_t i = 0; i < pts.size(); ++i) {
      if (a2.targets[i].positive()) {
        EXPECT_TRUE(a1.targets[i].positive());
      }
    }
  }
}

TEST(Assignment, DenoisingSelection) {
  const std::vector<Point3> pts{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  const std::vector<Point3> centers{{1, 1, 1}, {1.1, 1, 1}, {-5, 0, 0}};
  EXPECT_EQ(select_denoising(pts, centers), (std::vector<size_t>{1, 1, 0}));
  EXPECT_THROW(select_denoising(std::span<const Point3>(), centers), EmptyInputError);
  // Equidistant points: lower index wins.
  const std::vector<Point3> tie{{1, 0, 0}, {-1, 0, 0}};
  EXPECT_EQ(select_denoising(tie, std::vector<Point3>{{0, 0, 0}}), std::vector<size_t>{0});
}

TEST(Assignment, DenoisingMatchesArgminAndIsPermutationStable) {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point3> pts;
    for (int i = 0; i < 300; ++i) pts.push_back(random_point(rng));
    std::vector<Point3> centers;
    for (int g = 0; g < 5; ++g) centers.push_back(random_point(rng));
    const auto idx = select_denoising(pts, centers);
    for (size_t g = 0; g < centers.size(); ++g) {
      size_t best = 0;
      for (size_t i = 1; i < pts.size(); ++i) {
        if (l1_distance(pts[i], centers[g]) < l1_distance(pts[best], centers[g])) best = i;
      }
      EXPECT_EQ(idx[g], best);
    }
    std::vector<Point3> rev(centers.rbegin(), centers.rend());
    const auto ridx = select_denoising(pts, rev);
    for (size_t g = 0; g < centers.size(); ++g) EXPECT_EQ(ridx[centers.size() - 1 - g], idx[g]);
  }
}

TEST(Assignment, TopBSelection) {
  const std::vector<double> v{0.1, 0.9, 0.5};
  EXPECT_EQ(select_top_b(v, 5), (std::vector<size_t>{1, 2, 0}));
  EXPECT_EQ(select_top_b(v, 1), std::vector<size_t>{1});
  EXPECT_THROW(select_top_b(v, 0), InvalidArgumentError);
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> c(200);
    for (double& x : c) x = std::round(rng.uniform() * 20) / 20;  // many ties
    const int b = 1 + static_cast<int>(rng.below(250));
    std::vector<size_t> ref(c.size());
    std::iota(ref.begin(), ref.end(), 0);
    std::stable_sort(ref.begin(), ref.end(), [&](size_t x, size_t y) { return c[x] > c[y]; });
    ref.resize(std::min<size_t>(ref.size(), b));
    EXPECT_EQ(select_top_b(c, b), ref);
  }
}

TEST(Assignment, ResponsibleGt) {
  const std::vector<OrientedBox> gts{OrientedBox::make({0, 0, 0}, {4, 4, 4}),
                                     OrientedBox::make({0, 0, 0}, {1, 1, 1}),
                                     OrientedBox::make({10, 0, 0}, {1, 1, 1})};
  EXPECT_EQ(responsible_gt({0.1, 0, 0}, gts), std::optional<size_t>(1));
  EXPECT_EQ(responsible_gt({1.5, 0, 0}, gts), std::optional<size_t>(0));
  EXPECT_EQ(responsible_gt({8, 0, 0}, gts), std::optional<size_t>(2));
  EXPECT_FALSE(responsible_gt({0, 0, 0}, std::span<const OrientedBox>()).has_value());
}

TEST(Assignment, ShrinkingPositivesOnSyntheticScenes) {
  // Fixed scene points; positive counts across the CPA thresholds.
  const CpaSchedule s;
  SceneConfig cfg;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto scene = gen_scene(cfg, seed);
    size_t prev = scene.points.size() + 1;
    for (int l = 1; l <= s.num_stages; ++l) {
      const size_t n = assign_targets(scene.points, scene.gt_boxes, cpa_threshold(l, s)).positive_count();
      EXPECT_LE(n, prev);
      prev = n;
    }
  }
}

}  // namespace
}  // namespace cascadev
