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

// The multi-stage voting decoder.
//
// Each stage runs the predictor on the current proposals, decodes boxes, and
// (except after the last stage) moves every proposal point to the center of
// its predicted box and re-aggregates its feature by instance-aware voting
// over the stage's proposal set.

#ifndef CASCADEV_CASCADE_HPP_
#define CASCADEV_CASCADE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cascadev/assignment.hpp"
#include "cascadev/geometry.hpp"
#include "cascadev/overlap.hpp"
#include "cascadev/voting.hpp"

namespace cascadev {

struct Proposal {
  Point3 point;
  FeatureVec feature;
  bool is_denoising = false;
  // Stable identity across stages (scene point index for regular proposals).
  size_t origin_index = 0;
  // Fixed ground truth of a denoising proposal.
  std::optional<size_t> denoising_gt;
};

// Head outputs for one proposal. `class_probs` has one entry per object
// class followed by a trailing background entry; the heading travels in
// `deltas.heading`.
struct Prediction {
  std::vector<double> class_probs;
  Deltas deltas;
  double centerness = 0.0;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  // `stage` is 1-based.
  virtual Prediction predict(const Proposal& proposal, int stage) const = 0;
};

// Throws PredictorOutputError if probabilities do not sum to 1 within 1e-6,
// any entry is out of [0, 1], or deltas are not finite.
void validate_prediction(const Prediction& pred);

// Most likely object class (background excluded) and its probability.
std::pair<int, double> best_object_class(const Prediction& pred);

struct StageRecord {
  int stage = 1;
  double mu = 0.0;
  std::vector<Proposal> inputs;
  std::vector<Prediction> predictions;
  // Decoded box per proposal; empty when the deltas imply no valid box.
  std::vector<std::optional<OrientedBox>> boxes;
  // Centers of the predicted boxes (computed for every stage).
  std::vector<Point3> updated_points;
  std::optional<Assignment> assignment;
  std::vector<Detection> detections;
};

struct StageTrace {
  std::vector<OrientedBox> gts;
  std::vector<StageRecord> stages;
};

struct CascadeOptions {
  Weighting weighting = Weighting::kExpNegDist;
};

// Ground truths, when given, enable per-stage assignment at
// cpa_threshold(l) and are stored in the trace for later statistics.
StageTrace run_cascade(std::vector<Proposal> proposals, const Predictor& predictor,
                       const CpaSchedule& sched,
                       std::optional<std::span<const OrientedBox>> gts,
                       const CascadeOptions& options = {});

// Detections of stages first..last (1-based, inclusive) pooled through one
// class-wise NMS pass. Throws StageRangeError for an empty or invalid range.
std::vector<Detection> ensemble_stages(const StageTrace& trace, int first, int last,
                                       double iou_threshold,
                                       IouVariant variant = IouVariant::kRotated);

// Top-B scene points by stage-1 predicted centerness, weighted by the best
// object-class probability (the detection score).
std::vector<Proposal> initial_proposals(std::span<const Point3> points,
                                        std::span<const FeatureVec> features,
                                        const Predictor& predictor, int b);

// One denoising proposal per ground truth at its l1-nearest scene point.
std::vector<Proposal> denoising_proposals(std::span<const Point3> points,
                                          std::span<const FeatureVec> features,
                                          std::span<const OrientedBox> gts);

}  // namespace cascadev

#endif  // CASCADEV_CASCADE_HPP_
