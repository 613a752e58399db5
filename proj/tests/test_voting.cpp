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
#include <cmath>
#include <limits>
#include <numeric>

#include "cascadev/errors.hpp"
#include "cascadev/voting.hpp"
#include "support.hpp"

namespace cascadev {
namespace {

using testing::point_inside;
using testing::random_box;
using testing::random_point;

// Voting by a plain double loop with unshifted weights.
FeatureVec vote_reference(const Point3& up, const OrientedBox& box,
                         const std::vector<Point3>& src, const std::vector<FeatureVec>& feat,
                         const FeatureVec& prior, bool literal) {
  double denom = 0.0;
  for (size_t k = 0; k < src.size(); ++k) {
    if (!point_in_scaled_box(src[k], box, 0.5)) continue;
    const double d = norm(up - src[k]);
    denom += literal ? -std::exp(d) : std::exp(-d);
  }
  if (denom == 0.0) return prior;
  FeatureVec out(prior.size(), 0.0);
  for (size_t j = 0; j < src.size(); ++j) {
    if (!point_in_scaled_box(src[j], box, 0.5)) continue;
    const double d = norm(up - src[j]);
    const double w = (literal ? -std::exp(d) : std::exp(-d)) / denom;
    for (size_t c = 0; c < out.size(); ++c) out[c] += w * feat[j][c];
  }
  return out;
}

struct Instance {
  std::vector<Point3> up;
  std::vector<std::optional<OrientedBox>> boxes;
  std::vector<Point3> src;
  std::vector<FeatureVec> feat;
  std::vector<FeatureVec> prior;
};

Instance random_instance(Rng& rng, int proposals, int sources, int dim) {
  Instance in;
  for (int i = 0; i < proposals; ++i) {
    const auto b = random_box(rng, true, 1.0);
    in.boxes.push_back(b);
    in.up.push_back(point_inside(rng, b, 0.5));
    FeatureVec f(dim);
    for (double& v : f) v = rng.normal();
    in.prior.push_back(f);
  }
  for (int j = 0; j < sources; ++j) {
    in.src.push_back(random_point(rng, 2.0));
    FeatureVec f(dim);
    for (double& v : f) v = rng.normal();
    in.feat.push_back(f);
  }
  return in;
}

TEST(Voting, WeightingNames) {
  EXPECT_EQ(parse_weighting("exp_neg_dist"), Weighting::kExpNegDist);
  EXPECT_EQ(parse_weighting("literal"), Weighting::kLiteral);
  EXPECT_THROW(parse_weighting("idw"), ConfigError);
  EXPECT_EQ(voting_weight(0.0, Weighting::kExpNegDist), 1.0);
  EXPECT_EQ(voting_weight(0.0, Weighting::kLiteral), -1.0);
}

TEST(Voting, SingleMemberReturnsItsFeature) {
  const auto box = OrientedBox::make({0, 0, 0}, {1, 1, 1});
  const std::vector<std::optional<OrientedBox>> boxes{box};
  const std::vector<Point3> up{{0.1, 0, 0}};
  const std::vector<Point3> src{{0.2, 0.1, 0}, {3, 3, 3}};
  const std::vector<FeatureVec> feat{{1.5, -2.0}, {100, 100}};
  const std::vector<FeatureVec> prior{{0, 0}};
  const auto out = ia_voting(up, boxes, src, feat, prior);
  EXPECT_EQ(out[0], feat[0]);
}

TEST(Voting, EquidistantPairGivesMean) {
  const auto box = OrientedBox::make({0, 0, 0}, {2, 2, 2});
  const std::vector<std::optional<OrientedBox>> boxes{box};
  const std::vector<Point3> up{{0, 0, 0}};
  const std::vector<Point3> src{{0.5, 0, 0}, {0, -0.5, 0}};
  const std::vector<FeatureVec> feat{{1.0, 4.0}, {3.0, 0.0}};
  const std::vector<FeatureVec> prior{{9, 9}};
  for (Weighting w : {Weighting::kExpNegDist, Weighting::kLiteral}) {
    const auto out = ia_voting(up, boxes, src, feat, prior, w);
    EXPECT_NEAR(out[0][0], 2.0, 1e-12);
    EXPECT_NEAR(out[0][1], 2.0, 1e-12);
  }
}

TEST(Voting, EmptyMaskKeepsPrior) {
  const std::vector<std::optional<OrientedBox>> boxes{OrientedBox::make({0, 0, 0}, {1, 1, 1}),
                                                      std::nullopt};
  const std::vector<Point3> up{{0, 0, 0}, {0, 0, 0}};
  const std::vector<Point3> src{{5, 5, 5}};
  const std::vector<FeatureVec> feat{{1.0}};
  const std::vector<FeatureVec> prior{{7.0}, {8.0}};
  const auto out = ia_voting(up, boxes, src, feat, prior);
  EXPECT_EQ(out, prior);
}

TEST(Voting, MatchesBruteForceSum) {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance in = random_instance(rng, 3, 10, 4);
    for (bool literal : {false, true}) {
      const auto out = ia_voting(in.up, in.boxes, in.src, in.feat, in.prior,
                                 literal ? Weighting::kLiteral : Weighting::kExpNegDist);
      for (size_t i = 0; i < in.up.size(); ++i) {
        const auto ref = vote_reference(in.up[i], *in.boxes[i], in.src, in.feat, in.prior[i], literal);
        for (size_t c = 0; c < ref.size(); ++c) EXPECT_NEAR(out[i][c], ref[c], 1e-12);
      }
    }
  }
}

TEST(Voting, ConvexHullLocalityAndPermutation) {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    Instance in = random_instance(rng, 4, 30, 3);
    const auto out = ia_voting(in.up, in.boxes, in.src, in.feat, in.prior);
    for (size_t i = 0; i < out.size(); ++i) {
      std::vector<size_t> members;
      for (size_t j = 0; j < in.src.size(); ++j) {
        if (point_in_scaled_box(in.src[j], *in.boxes[i], 0.5)) members.push_back(j);
      }
      if (members.empty()) {
        EXPECT_EQ(out[i], in.prior[i]);
        continue;
      }
      for (size_t c = 0; c < 3; ++c) {
        double lo = 1e300, hi = -1e300;
        for (size_t j : members) {
          lo = std::min(lo, in.feat[j][c]);
          hi = std::max(hi, in.feat[j][c]);
        }
        EXPECT_GE(out[i][c], lo - 1e-12);
        EXPECT_LE(out[i][c], hi + 1e-12);
      }
    }
    // Sources outside every box have no influence at all.
    Instance moved = in;
    for (size_t j = 0; j < in.src.size(); ++j) {
      const bool anywhere = std::any_of(in.boxes.begin(), in.boxes.end(), [&](const auto& b) {
        return point_in_scaled_box(in.src[j], *b, 0.5);
      });
      if (!anywhere) {
        for (double& v : moved.feat[j]) v = rng.normal(0.0, 1e6);
      }
    }
    EXPECT_EQ(ia_voting(moved.up, moved.boxes, moved.src, moved.feat, moved.prior), out);
    // Reordering sources only changes the summation order.
    std::vector<size_t> perm(in.src.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (size_t k = perm.size() - 1; k > 0; --k) std::swap(perm[k], perm[rng.below(k + 1)]);
    Instance shuffled = in;
    for (size_t k = 0; k < perm.size(); ++k) {
      shuffled.src[k] = in.src[perm[k]];
      shuffled.feat[k] = in.feat[perm[k]];
    }
    const auto sout = ia_voting(shuffled.up, shuffled.boxes, shuffled.src, shuffled.feat, shuffled.prior);
    for (size_t i = 0; i < out.size(); ++i) {
      for (size_t c = 0; c < 3; ++c) EXPECT_NEAR(sout[i][c], out[i][c], 1e-12);
    }
  }
}

TEST(Voting, ConvexHullExactIn1D) {
  // In one dimension the hull is an interval; bounds hold without slack.
  Rng rng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance in = random_instance(rng, 1, 12, 1);
    const auto out = ia_voting(in.up, in.boxes, in.src, in.feat, in.prior);
    double lo = 1e300, hi = -1e300;
    for (size_t j = 0; j < in.src.size(); ++j) {
      if (!point_in_scaled_box(in.src[j], *in.boxes[0], 0.5)) continue;
      lo = std::min(lo, in.feat[j][0]);
      hi = std::max(hi, in.feat[j][0]);
    }
    if (lo > hi) continue;
    // A few ulps of rounding in the weighted sum.
    const double slack = 8 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
    EXPECT_GE(out[0][0], lo - slack);
    EXPECT_LE(out[0][0], hi + slack);
  }
}

TEST(Voting, VarianceReductionAtNinetyFivePercent) {
  // Shared true vector plus i.i.d. noise: the vote should beat a single
  // noisy feature in mean squared error.
  Rng rng(44);
  const int trials = 1000, dim = 8;
  std::vector<double> diff;
  double mse_single = 0.0, mse_vote = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto box = OrientedBox::make({0, 0, 0}, {2, 2, 2}, rng.uniform(-3, 3));
    FeatureVec truth(dim);
    for (double& v : truth) v = rng.normal();
    std::vector<Point3> src;
    std::vector<FeatureVec> feat;
    for (int j = 0; j < 16; ++j) {
      src.push_back(point_inside(rng, box, 0.5));
      FeatureVec f = truth;
      for (double& v : f) v += rng.normal(0.0, 0.3);
      feat.push_back(f);
    }
    const std::vector<std::optional<OrientedBox>> boxes{box};
    const std::vector<Point3> up{src[0]};
    const std::vector<FeatureVec> prior{feat[0]};
    const auto out = ia_voting(up, boxes, src, feat, prior);
    double es = 0.0, ev = 0.0;
    for (int c = 0; c < dim; ++c) {
      es += (feat[0][c] - truth[c]) * (feat[0][c] - truth[c]);
      ev += (out[0][c] - truth[c]) * (out[0][c] - truth[c]);
    }
    mse_single += es / trials;
    mse_vote += ev / trials;
    diff.push_back(es - ev);
  }
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / trials;
  double var = 0.0;
  for (double d : diff) var += (d - mean) * (d - mean);
  const double se = std::sqrt(var / (trials - 1) / trials);
  EXPECT_LE(mse_vote, mse_single);
  EXPECT_GT(mean - 1.645 * se, 0.0);
}

TEST(Voting, Errors) {
  const std::vector<std::optional<OrientedBox>> boxes{OrientedBox::make({0, 0, 0}, {1, 1, 1})};
  const std::vector<Point3> up{{0, 0, 0}};
  const std::vector<Point3> src{{0, 0, 0}};
  EXPECT_THROW(ia_voting(up, boxes, src, std::vector<FeatureVec>{{1.0, 2.0}},
                         std::vector<FeatureVec>{{1.0}}),
               DimensionMismatchError);
  EXPECT_THROW(ia_voting(up, boxes, src, std::vector<FeatureVec>{},
                         std::vector<FeatureVec>{{1.0}}),
               MisalignmentError);
  EXPECT_THROW(ia_voting(std::vector<Point3>{}, boxes, src, std::vector<FeatureVec>{{1.0}},
                         std::vector<FeatureVec>{{1.0}}),
               MisalignmentError);
}

}  // namespace
}  // namespace cascadev
