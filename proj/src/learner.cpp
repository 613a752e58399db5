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

#include "cascadev/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cascadev/errors.hpp"
#include "cascadev/rng.hpp"

namespace cascadev {

Mlp Mlp::zeros(int in, int hidden, int out) {
  Mlp m;
  m.in = in;
  m.hidden = hidden;
  m.out = out;
  m.w1.assign(static_cast<size_t>(hidden * in), 0.0);
  m.b1.assign(static_cast<size_t>(hidden), 0.0);
  m.w2.assign(static_cast<size_t>(out * hidden), 0.0);
  m.b2.assign(static_cast<size_t>(out), 0.0);
  return m;
}

Mlp Mlp::random(int in, int hidden, int out, Rng& rng) {
  Mlp m = zeros(in, hidden, out);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& v : m.w1) v = s1 * rng.normal();
  for (double& v : m.w2) v = s2 * rng.normal();
  return m;
}

std::vector<double> Mlp::forward(std::span<const double> x,
                                 std::vector<double>* hidden_out) const {
  std::vector<double> h(static_cast<size_t>(hidden));
  for (int i = 0; i < hidden; ++i) {
    double a = b1[static_cast<size_t>(i)];
    const double* row = &w1[static_cast<size_t>(i * in)];
    for (int k = 0; k < in; ++k) a += row[k] * x[static_cast<size_t>(k)];
    h[static_cast<size_t>(i)] = std::tanh(a);
  }
  std::vector<double> y(static_cast<size_t>(out));
  for (int o = 0; o < out; ++o) {
    double a = b2[static_cast<size_t>(o)];
    const double* row = &w2[static_cast<size_t>(o * hidden)];
    for (int i = 0; i < hidden; ++i) a += row[i] * h[static_cast<size_t>(i)];
    y[static_cast<size_t>(o)] = a;
  }
  if (hidden_out) *hidden_out = std::move(h);
  return y;
}

void Mlp::backward(std::span<const double> x, std::span<const double> h,
                   std::span<const double> d_out, Mlp& grad) const {
  std::vector<double> dh(static_cast<size_t>(hidden), 0.0);
  for (int o = 0; o < out; ++o) {
    const double g = d_out[static_cast<size_t>(o)];
    if (g == 0.0) continue;
    grad.b2[static_cast<size_t>(o)] += g;
    double* grow = &grad.w2[static_cast<size_t>(o * hidden)];
    const double* row = &w2[static_cast<size_t>(o * hidden)];
    for (int i = 0; i < hidden; ++i) {
      grow[i] += g * h[static_cast<size_t>(i)];
      dh[static_cast<size_t>(i)] += g * row[i];
    }
  }
  for (int i = 0; i < hidden; ++i) {
    const double hi = h[static_cast<size_t>(i)];
    const double da = dh[static_cast<size_t>(i)] * (1.0 - hi * hi);
    if (da == 0.0) continue;
    grad.b1[static_cast<size_t>(i)] += da;
    double* grow = &grad.w1[static_cast<size_t>(i * in)];
    for (int k = 0; k < in; ++k) grow[k] += da * x[static_cast<size_t>(k)];
  }
}

void Mlp::axpy(double alpha, const Mlp& o) {
  auto go = [alpha](std::vector<double>& a, const std::vector<double>& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += alpha * b[i];
  };
  go(w1, o.w1);
  go(b1, o.b1);
  go(w2, o.w2);
  go(b2, o.b2);
}

bool Mlp::all_finite() const {
  auto fin = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return fin(w1) && fin(b1) && fin(w2) && fin(b2);
}

HeadParams HeadParams::init(int feature_dim, int num_classes, int hidden, int num_stages,
                            uint64_t seed) {
  if (feature_dim < 1 || num_classes < 1 || hidden < 1 || num_stages < 1) {
    throw InvalidArgumentError("head dimensions must be positive");
  }
  HeadParams p;
  p.feature_dim = feature_dim;
  p.num_classes = num_classes;
  p.hidden = hidden;
  Rng rng(seed);
  for (int l = 0; l < num_stages; ++l) {
    StageHead h;
    h.cls = Mlp::random(feature_dim, hidden, num_classes + 1, rng);
    h.reg = Mlp::random(feature_dim, hidden, 7, rng);
    h.ctr = Mlp::random(feature_dim, hidden, 1, rng);
    p.stages.push_back(std::move(h));
  }
  return p;
}

HeadParams HeadParams::zeros_like(const HeadParams& src) {
  HeadParams p = src;
  for (auto& h : p.stages) {
    h.cls = Mlp::zeros(h.cls.in, h.cls.hidden, h.cls.out);
    h.reg = Mlp::zeros(h.reg.in, h.reg.hidden, h.reg.out);
    h.ctr = Mlp::zeros(h.ctr.in, h.ctr.hidden, h.ctr.out);
  }
  return p;
}

const StageHead& HeadParams::head_for(int stage) const {
  if (stages.empty()) throw InvalidArgumentError("head has no stages");
  const int idx = std::clamp(stage, 1, static_cast<int>(stages.size())) - 1;
  return stages[static_cast<size_t>(idx)];
}

HeadOutput forward(const StageHead& head, std::span<const double> feature) {
  if (static_cast<int>(feature.size()) != head.cls.in) {
    throw DimensionMismatchError("feature length " + std::to_string(feature.size()) +
                                 " does not match head input " + std::to_string(head.cls.in));
  }
  HeadOutput out;
  out.class_logits = head.cls.forward(feature);
  const auto reg = head.reg.forward(feature);
  std::copy(reg.begin(), reg.end(), out.reg.begin());
  out.ctr_logit = head.ctr.forward(feature)[0];
  return out;
}

namespace {

std::vector<double> softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double s = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// BCE(sigmoid(z), y) without forming log(sigmoid).
double bce_with_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

Prediction to_prediction(const HeadOutput& out) {
  Prediction p;
  p.class_probs = softmax(out.class_logits);
  for (size_t k = 0; k < 6; ++k) p.deltas.d[k] = out.reg[k];
  p.deltas.heading = out.reg[6];
  p.centerness = sigmoid(out.ctr_logit);
  return p;
}

double StageLoss::total(const LossConfig& cfg) const {
  return cfg.w_cls * cls + cfg.w_reg * reg + cfg.w_ctr * ctr;
}

StageLoss compute_losses(std::span<const HeadOutput> outputs, const Assignment& assignment,
                         int num_classes, const LossConfig& cfg,
                         std::vector<OutputGrad>* grads) {
  if (outputs.size() != assignment.targets.size()) {
    throw MisalignmentError("predictions and assignment differ in length");
  }
  StageLoss loss;
  size_t matched = 0;
  for (const auto& t : assignment.targets) {
    if (!t.positive()) continue;
    ++matched;
    if (t.is_denoising) {
      ++loss.denoising;
    } else {
      ++loss.positives;
    }
  }
  const double n = static_cast<double>(std::max<size_t>(outputs.size(), 1));
  const double npos = static_cast<double>(std::max<size_t>(matched, 1));
  const double beta = cfg.smooth_l1_beta;
  if (grads) grads->assign(outputs.size(), OutputGrad{});

  for (size_t i = 0; i < outputs.size(); ++i) {
    const HeadOutput& o = outputs[i];
    const ProposalTarget& t = assignment.targets[i];
    if (static_cast<int>(o.class_logits.size()) != num_classes + 1) {
      throw DimensionMismatchError("class logits do not match the class count");
    }
    const size_t target_cls =
        t.positive() ? static_cast<size_t>(std::clamp(t.target_class.value_or(0), 0, num_classes - 1))
                     : static_cast<size_t>(num_classes);
    const auto p = softmax(o.class_logits);
    const double pt = std::max(p[target_cls], 1e-300);
    std::vector<double> dz(p.size());
    if (cfg.focal) {
      const double g = cfg.focal_gamma;
      const double one_m = 1.0 - pt;
      const double logp = std::log(pt);
      loss.cls += -std::pow(one_m, g) * logp / n;
      // dL/dp_t, then through softmax: dp_t/dz_k = p_t (1[k=t] - p_k).
      const double dl_dpt = (g > 0.0 ? g * std::pow(one_m, g - 1.0) * logp : 0.0) -
                            std::pow(one_m, g) / pt;
      for (size_t k = 0; k < p.size(); ++k) {
        dz[k] = dl_dpt * pt * ((k == target_cls ? 1.0 : 0.0) - p[k]) / n;
      }
    } else {
      loss.cls += -std::log(pt) / n;
      for (size_t k = 0; k < p.size(); ++k) {
        dz[k] = (p[k] - (k == target_cls ? 1.0 : 0.0)) / n;
      }
    }
    if (grads) {
      auto& g = (*grads)[i];
      g.class_logits.resize(dz.size());
      for (size_t k = 0; k < dz.size(); ++k) g.class_logits[k] = cfg.w_cls * dz[k];
    }
    if (!t.positive()) continue;

    std::array<double, 7> target{};
    for (size_t k = 0; k < 6; ++k) target[k] = t.target_deltas->d[k];
    target[6] = t.target_deltas->heading;
    for (size_t k = 0; k < 7; ++k) {
      const double e = o.reg[k] - target[k];
      const double ae = std::abs(e);
      double v, dv;
      if (ae < beta) {
        v = 0.5 * e * e / beta;
        dv = e / beta;
      } else {
        v = ae - 0.5 * beta;
        dv = e > 0.0 ? 1.0 : -1.0;
      }
      loss.reg += v / npos;
      if (grads) (*grads)[i].reg[k] = cfg.w_reg * dv / npos;
    }
    const double y = t.target_centerness.value_or(0.0);
    loss.ctr += bce_with_logit(o.ctr_logit, y) / npos;
    if (grads) (*grads)[i].ctr_logit = cfg.w_ctr * (sigmoid(o.ctr_logit) - y) / npos;
  }
  return loss;
}

StageLoss stage_loss_and_grad(const StageHead& head, std::span<const FeatureVec> inputs,
                              const Assignment& assignment, int num_classes,
                              const LossConfig& cfg, StageHead* grad) {
  std::vector<HeadOutput> outs;
  std::vector<std::vector<double>> h_cls, h_reg, h_ctr;
  outs.reserve(inputs.size());
  h_cls.resize(inputs.size());
  h_reg.resize(inputs.size());
  h_ctr.resize(inputs.size());
  for (size_t i = 0; i < inputs.size(); ++i) {
    HeadOutput o;
    o.class_logits = head.cls.forward(inputs[i], &h_cls[i]);
    const auto r = head.reg.forward(inputs[i], &h_reg[i]);
    std::copy(r.begin(), r.end(), o.reg.begin());
    o.ctr_logit = head.ctr.forward(inputs[i], &h_ctr[i])[0];
    outs.push_back(std::move(o));
  }
  std::vector<OutputGrad> dout;
  const StageLoss loss =
      compute_losses(outs, assignment, num_classes, cfg, grad ? &dout : nullptr);
  if (grad) {
    for (size_t i = 0; i < inputs.size(); ++i) {
      head.cls.backward(inputs[i], h_cls[i], dout[i].class_logits, grad->cls);
      head.reg.backward(inputs[i], h_reg[i], dout[i].reg, grad->reg);
      const double dc[1] = {dout[i].ctr_logit};
      head.ctr.backward(inputs[i], h_ctr[i], dc, grad->ctr);
    }
  }
  return loss;
}

namespace {

Assignment assign_proposals(std::span<const Proposal> props, std::span<const OrientedBox> gts,
                            double mu) {
  Assignment a;
  a.mu = mu;
  for (const Proposal& p : props) {
    if (p.is_denoising && p.denoising_gt) {
      a.targets.push_back(make_target(p.point, *p.denoising_gt, gts[*p.denoising_gt], true));
      continue;
    }
    const auto g = match_scaled(p.point, gts, mu);
    a.targets.push_back(g ? make_target(p.point, *g, gts[*g]) : ProposalTarget{});
  }
  return a;
}

std::vector<Proposal> training_proposals(const SyntheticScene& scene, const HeadParams& params,
                                         const TrainConfig& cfg) {
  const StageHead& head = params.head_for(1);
  std::vector<double> score(scene.points.size());
  for (size_t i = 0; i < scene.points.size(); ++i) {
    const Prediction pred = to_prediction(forward(head, scene.features[i]));
    score[i] = best_object_class(pred).second * pred.centerness;
  }
  std::vector<Proposal> props;
  for (size_t i : select_top_b(score, cfg.proposals)) {
    Proposal p;
    p.point = scene.points[i];
    p.feature = scene.features[i];
    p.origin_index = i;
    props.push_back(std::move(p));
  }
  if (cfg.denoising && !scene.gt_boxes.empty()) {
    auto dn = denoising_proposals(scene.points, scene.features, scene.gt_boxes);
    props.insert(props.end(), dn.begin(), dn.end());
  }
  return props;
}

}  // namespace

TrainResult train_cascade(std::span<const SyntheticScene> scenes, const CpaSchedule& sched,
                          const TrainConfig& cfg) {
  sched.validate();
  if (cfg.steps < 1) throw InvalidArgumentError("training needs at least one step");
  if (scenes.empty()) throw EmptyInputError("training needs scenes");
  if (cfg.batch_scenes < 1 || cfg.proposals < 1 || !(cfg.lr > 0.0)) {
    throw InvalidArgumentError("batch size, proposal count and learning rate must be positive");
  }
  const int dim = static_cast<int>(scenes.front().features.empty()
                                       ? 0
                                       : scenes.front().features.front().size());
  const int num_classes = scenes.front().num_classes;
  TrainResult result;
  result.params = HeadParams::init(dim, num_classes, cfg.hidden, sched.num_stages, cfg.seed);
  HeadParams& params = result.params;
  const int L = sched.num_stages;

  Rng order_rng(derive_seed(cfg.seed, {0x5CE7E5ULL}));
  std::vector<size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), size_t{0});
  size_t cursor = order.size();

  for (int step = 1; step <= cfg.steps; ++step) {
    std::vector<std::vector<FeatureVec>> stage_inputs(static_cast<size_t>(L));
    std::vector<Assignment> stage_assign(static_cast<size_t>(L));

    const size_t batch = std::min(static_cast<size_t>(cfg.batch_scenes), scenes.size());
    for (size_t b = 0; b < batch; ++b) {
      if (cursor >= order.size()) {
        for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
        cursor = 0;
      }
      const SyntheticScene& scene = scenes[order[cursor++]];
      std::vector<Proposal> props = training_proposals(scene, params, cfg);

      for (int l = 1; l <= L; ++l) {
        const StageHead& head = params.stages[static_cast<size_t>(l - 1)];
        const Assignment a = assign_proposals(props, scene.gt_boxes, cpa_threshold(l, sched));
        auto& in = stage_inputs[static_cast<size_t>(l - 1)];
        auto& as = stage_assign[static_cast<size_t>(l - 1)];
        as.mu = a.mu;
        for (size_t i = 0; i < props.size(); ++i) {
          in.push_back(props[i].feature);
          as.targets.push_back(a.targets[i]);
        }
        if (l == L) break;

        std::vector<Point3> updated(props.size());
        std::vector<std::optional<OrientedBox>> boxes(props.size());
        std::vector<Point3> src_points(props.size());
        std::vector<FeatureVec> src_features(props.size());
        for (size_t i = 0; i < props.size(); ++i) {
          const Prediction pred = to_prediction(forward(head, props[i].feature));
          updated[i] = update_point(props[i].point, pred.deltas);
          try {
            boxes[i] = decode_box(props[i].point, pred.deltas);
          } catch (const InvalidDeltasError&) {
            boxes[i].reset();
          }
          src_points[i] = props[i].point;
          src_features[i] = props[i].feature;
        }
        auto voted = ia_voting(updated, boxes, src_points, src_features, src_features,
                               cfg.weighting);
        for (size_t i = 0; i < props.size(); ++i) {
          props[i].point = updated[i];
          props[i].feature = std::move(voted[i]);
        }
      }
    }

    LossReport report;
    report.step = step;
    HeadParams grad = HeadParams::zeros_like(params);
    for (int l = 1; l <= L; ++l) {
      const size_t k = static_cast<size_t>(l - 1);
      StageLoss sl = stage_loss_and_grad(params.stages[k], stage_inputs[k], stage_assign[k],
                                         num_classes, cfg.loss, &grad.stages[k]);
      report.total += sl.total(cfg.loss);
      report.stages.push_back(sl);
    }
    if (!std::isfinite(report.total)) {
      throw TrainingDivergedError("loss became non-finite at step " + std::to_string(step));
    }
    for (size_t k = 0; k < params.stages.size(); ++k) {
      params.stages[k].cls.axpy(-cfg.lr, grad.stages[k].cls);
      params.stages[k].reg.axpy(-cfg.lr, grad.stages[k].reg);
      params.stages[k].ctr.axpy(-cfg.lr, grad.stages[k].ctr);
      if (!params.stages[k].cls.all_finite() || !params.stages[k].reg.all_finite() ||
          !params.stages[k].ctr.all_finite()) {
        throw TrainingDivergedError("parameters became non-finite at step " +
                                    std::to_string(step));
      }
    }
    result.history.push_back(std::move(report));
  }
  return result;
}

Prediction HeadPredictor::predict(const Proposal& proposal, int stage) const {
  return to_prediction(forward(params_.head_for(stage), proposal.feature));
}

}  // namespace cascadev
