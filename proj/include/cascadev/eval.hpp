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

#ifndef CASCADEV_EVAL_HPP_
#define CASCADEV_EVAL_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "cascadev/cascade.hpp"
#include "cascadev/overlap.hpp"

namespace cascadev {

enum class ApInterpolation {
  kContinuous,  // area under the monotone precision envelope
  kElevenPoint,
};

ApInterpolation parse_ap_interpolation(std::string_view name);
IouVariant parse_iou_variant(std::string_view name);
std::string_view to_string(ApInterpolation a);
std::string_view to_string(IouVariant v);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct ClassAp {
  int class_id = 0;
  size_t num_gt = 0;
  size_t num_det = 0;
  double ap = 0.0;
  std::vector<PrPoint> curve;
};

struct ThresholdAp {
  double iou_threshold = 0.0;
  double map = 0.0;
  std::vector<ClassAp> per_class;  // ascending class id, classes with gts only
};

struct ApResult {
  std::vector<ThresholdAp> thresholds;

  // Throws InvalidArgumentError when `t` was not evaluated.
  double map_at(double t) const;
};

// Detections and ground truths of one scene.
struct EvalScene {
  std::vector<Detection> detections;
  std::vector<OrientedBox> gts;
};

struct ApOptions {
  IouVariant matcher = IouVariant::kRotated;
  ApInterpolation interpolation = ApInterpolation::kContinuous;
};

// Pools all scenes. Within each class detections are visited by descending
// score (stable across scenes in input order); each takes the unmatched
// same-class gt of its scene with the highest IoU, and counts as a true
// positive when that IoU reaches the threshold.
ApResult average_precision(std::span<const EvalScene> scenes,
                           std::span<const double> iou_thresholds,
                           const ApOptions& options = {});

// Single-scene, single-threshold convenience form.
ApResult average_precision(std::span<const Detection> dets, std::span<const OrientedBox> gts,
                           double iou_threshold, const ApOptions& options = {});

// AP from a ranked list of TP flags.
double ap_from_ranked(std::span<const char> is_tp, size_t num_gt, ApInterpolation interp,
                      std::vector<PrPoint>* curve = nullptr);

// Spearman rank correlation with average ranks for ties. Zero when either
// side is constant or fewer than two samples.
double spearman(std::span<const double> a, std::span<const double> b);

struct StageSamples {
  int stage = 0;
  double mu = 0.0;
  size_t positives = 0;
  std::vector<double> centerness_before;
  std::vector<double> centerness_after;
  std::vector<double> iou;  // predicted box vs the proposal's ground truth
};

struct StageSummary {
  int stage = 0;
  double mu = 0.0;
  size_t positives = 0;
  size_t samples = 0;
  double mean_centerness_before = 0.0;
  double mean_centerness_after = 0.0;
  double p10_before = 0.0, p50_before = 0.0, p90_before = 0.0;
  double p10_after = 0.0, p50_after = 0.0, p90_after = 0.0;
  double fraction_gained = 0.0;
  double spearman_rho = 0.0;
};

struct CascadeStats {
  std::vector<StageSamples> stages;

  void merge(const CascadeStats& other);
  std::vector<StageSummary> summary() const;

  // Pooled over stages.
  size_t sample_count() const;
  double fraction_gained() const;
  double spearman_rho() const;
};

// Traces must carry ground truths. Denoising proposals are skipped.
// Throws EmptyInputError on an empty list.
CascadeStats cascade_stats(std::span<const StageTrace> traces);

}  // namespace cascadev

#endif  // CASCADEV_EVAL_HPP_
