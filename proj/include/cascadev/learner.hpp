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

// A small trainable detection head and the cascade training loop.
//
// Every stage owns three independent two-layer perceptrons (tanh hidden
// layer, linear output) mapping a proposal feature to
//   - class logits (object classes + background),
//   - six face distances and a heading,
//   - a centerness logit.
// Gradients are computed by hand; parameters are updated with plain SGD.

#ifndef CASCADEV_LEARNER_HPP_
#define CASCADEV_LEARNER_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cascadev/assignment.hpp"
#include "cascadev/cascade.hpp"
#include "cascadev/synth.hpp"
#include "cascadev/voting.hpp"

namespace cascadev {

struct Mlp {
  int in = 0;
  int hidden = 0;
  int out = 0;
  std::vector<double> w1;  // hidden x in, row-major
  std::vector<double> b1;
  std::vector<double> w2;  // out x hidden, row-major
  std::vector<double> b2;

  static Mlp zeros(int in, int hidden, int out);
  static Mlp random(int in, int hidden, int out, Rng& rng);

  // Writes the hidden activations to `hidden_out` when non-null.
  std::vector<double> forward(std::span<const double> x,
                              std::vector<double>* hidden_out = nullptr) const;

  // Accumulates parameter gradients for one sample into `grad`.
  void backward(std::span<const double> x, std::span<const double> hidden,
                std::span<const double> d_out, Mlp& grad) const;

  void axpy(double alpha, const Mlp& other);
  bool all_finite() const;
};

struct StageHead {
  Mlp cls;
  Mlp reg;
  Mlp ctr;
};

struct HeadParams {
  int feature_dim = 0;
  int num_classes = 0;
  int hidden = 32;
  std::vector<StageHead> stages;

  static HeadParams init(int feature_dim, int num_classes, int hidden, int num_stages,
                         uint64_t seed);
  static HeadParams zeros_like(const HeadParams& p);
  const StageHead& head_for(int stage) const;
};

// Raw outputs for one proposal.
struct HeadOutput {
  std::vector<double> class_logits;
  std::array<double, 7> reg{};  // d1..d6, heading
  double ctr_logit = 0.0;
};

HeadOutput forward(const StageHead& head, std::span<const double> feature);

// Converts raw outputs into the predictor contract.
Prediction to_prediction(const HeadOutput& out);

struct LossConfig {
  double w_cls = 1.0;
  double w_reg = 1.0;
  double w_ctr = 1.0;
  bool focal = false;
  double focal_gamma = 2.0;
  double smooth_l1_beta = 0.1;
};

struct StageLoss {
  double cls = 0.0;
  double reg = 0.0;
  double ctr = 0.0;
  size_t positives = 0;  // scaled-box positives, denoising excluded
  size_t denoising = 0;

  double total(const LossConfig& cfg) const;
};

struct LossReport {
  int step = 0;
  std::vector<StageLoss> stages;
  double total = 0.0;
};

struct OutputGrad {
  std::vector<double> class_logits;
  std::array<double, 7> reg{};
  double ctr_logit = 0.0;
};

// Classification: cross-entropy (or focal) over all proposals, negatives
// targeting background, averaged over proposals. Regression: smooth-L1 over
// the 7 box outputs of positives; centerness: BCE against the centerness
// target of positives; both divided by the positive count (denoising
// included) and zero without positives. When `grads` is non-null it
// receives d(total)/d(output) per proposal. Throws MisalignmentError if the
// assignment does not match the outputs.
StageLoss compute_losses(std::span<const HeadOutput> outputs, const Assignment& assignment,
                         int num_classes, const LossConfig& cfg,
                         std::vector<OutputGrad>* grads = nullptr);

// Loss of one stage head on fixed inputs plus its parameter gradient.
StageLoss stage_loss_and_grad(const StageHead& head, std::span<const FeatureVec> inputs,
                              const Assignment& assignment, int num_classes,
                              const LossConfig& cfg, StageHead* grad);

struct TrainConfig {
  int steps = 500;
  double lr = 1e-2;
  uint64_t seed = 1;
  int batch_scenes = 4;
  int proposals = 64;  // B
  int hidden = 32;
  bool denoising = true;
  Weighting weighting = Weighting::kExpNegDist;
  LossConfig loss;
};

struct TrainResult {
  HeadParams params;
  std::vector<LossReport> history;
};

// Throws TrainingDivergedError as soon as a loss or parameter turns
// non-finite.
TrainResult train_cascade(std::span<const SyntheticScene> scenes, const CpaSchedule& sched,
                          const TrainConfig& cfg);

class HeadPredictor final : public Predictor {
 public:
  explicit HeadPredictor(HeadParams params) : params_(std::move(params)) {}
  Prediction predict(const Proposal& proposal, int stage) const override;
  const HeadParams& params() const { return params_; }

 private:
  HeadParams params_;
};

}  // namespace cascadev

#endif  // CASCADEV_LEARNER_HPP_
