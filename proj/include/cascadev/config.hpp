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

// Resolved configuration shared by the command-line subcommands.

#ifndef CASCADEV_CONFIG_HPP_
#define CASCADEV_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cascadev/assignment.hpp"
#include "cascadev/eval.hpp"
#include "cascadev/io.hpp"
#include "cascadev/learner.hpp"
#include "cascadev/synth.hpp"

namespace cascadev {

enum class PredictorKind { kOracle, kModel };

struct RunConfig {
  uint64_t seed = 1;
  int num_scenes = 1;
  SceneConfig scene;
  CpaSchedule schedule;

  PredictorKind predictor = PredictorKind::kOracle;
  std::string model_path;
  OracleNoise oracle{0.1, 0.0, 0.0, 0.1, 0};

  int proposals = 64;
  Weighting weighting = Weighting::kExpNegDist;
  double nms_iou = 0.25;
  int ensemble_first = 1;
  int ensemble_last = 0;  // 0 means the last stage

  IouVariant iou = IouVariant::kRotated;
  ApInterpolation ap = ApInterpolation::kContinuous;
  std::vector<double> iou_thresholds{0.25, 0.5};

  TrainConfig train;

  // Throws ConfigError.
  void validate() const;
};

// Keys absent from `j` keep their defaults; unknown keys throw ConfigError.
RunConfig config_from_json(const Json& j, RunConfig base = {});
Json config_to_json(const RunConfig& cfg);
// Accepts a plain config or a manifest/run document embedding one.
RunConfig load_config(const std::filesystem::path& path);

// Hash of the canonical JSON form.
std::string config_hash(const RunConfig& cfg);

}  // namespace cascadev

#endif  // CASCADEV_CONFIG_HPP_
