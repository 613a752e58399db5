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

#include "cascadev/cascade.hpp"

#include <cmath>
#include <string>

#include "cascadev/errors.hpp"

namespace cascadev {

void validate_prediction(const Prediction& pred) {
  if (pred.class_probs.size() < 2) {
    throw PredictorOutputError("class probabilities need an object and a background entry");
  }
  double sum = 0.0;
  for (double p : pred.class_probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw PredictorOutputError("class probability outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw PredictorOutputError("class probabilities sum to " + std::to_string(sum));
  }
  if (!(pred.centerness >= 0.0 && pred.centerness <= 1.0)) {
    throw PredictorOutputError("predicted centerness outside [0, 1]");
  }
  for (double d : pred.deltas.d) {
    if (!std::isfinite(d)) throw PredictorOutputError("non-finite delta");
  }
  if (!std::isfinite(pred.deltas.heading)) throw PredictorOutputError("non-finite heading");
}

std::pair<int, double> best_object_class(const Prediction& pred) {
  int best = 0;
  for (size_t c = 1; c + 1 < pred.class_probs.size(); ++c) {
    if (pred.class_probs[c] > pred.class_probs[static_cast<size_t>(best)]) {
      best = static_cast<int>(c);
    }
  }
  return {best, pred.class_probs[static_cast<size_t>(best)]};
}

namespace {

Assignment assign_stage(std::span<const Proposal> props, std::span<const OrientedBox> gts,
                        double mu) {
  Assignment a;
  a.mu = mu;
  a.targets.reserve(props.size());
  for (const Proposal& p : props) {
    if (p.is_denoising && p.denoising_gt && *p.denoising_gt < gts.size()) {
      a.targets.push_back(make_target(p.point, *p.denoising_gt, gts[*p.denoising_gt], true));
      continue;
    }
    const auto g = match_scaled(p.point, gts, mu);
    a.targets.push_back(g ? make_target(p.point, *g, gts[*g]) : ProposalTarget{});
  }
  return a;
}

}  // namespace

StageTrace run_cascade(std::vector<Proposal> proposals, const Predictor& predictor,
                       const CpaSchedule& sched,
                       std::optional<std::span<const OrientedBox>> gts,
                       const CascadeOptions& options) {
  sched.validate();
  StageTrace trace;
  if (gts) trace.gts.assign(gts->begin(), gts->end());

  for (int l = 1; l <= sched.num_stages; ++l) {
    StageRecord rec;
    rec.stage = l;
    rec.mu = cpa_threshold(l, sched);
    rec.predictions.reserve(proposals.size());
    rec.boxes.reserve(proposals.size());
    rec.updated_points.reserve(proposals.size());

    for (size_t i = 0; i < proposals.size(); ++i) {
      const Proposal& prop = proposals[i];
      Prediction pred = predictor.predict(prop, l);
      validate_prediction(pred);
      std::optional<OrientedBox> box;
      try {
        box = decode_box(prop.point, pred.deltas);
      } catch (const InvalidDeltasError&) {
        box.reset();
      }
      if (box) {
        const auto [cls, prob] = best_object_class(pred);
        Detection det;
        det.box = *box;
        det.box.class_id = cls;
        det.score = prob * pred.centerness;
        det.box.score = det.score;
        det.class_id = cls;
        det.stage = l;
        det.proposal = i;
        rec.detections.push_back(det);
      }
      rec.updated_points.push_back(update_point(prop.point, pred.deltas));
      rec.boxes.push_back(box);
      rec.predictions.push_back(std::move(pred));
    }
    if (gts) rec.assignment = assign_stage(proposals, *gts, rec.mu);

    if (l < sched.num_stages) {
      std::vector<Point3> src_points;
      std::vector<FeatureVec> src_features;
      src_points.reserve(proposals.size());
      src_features.reserve(proposals.size());
      for (const Proposal& p : proposals) {
        src_points.push_back(p.point);
        src_features.push_back(p.feature);
      }
      auto voted = ia_voting(rec.updated_points, rec.boxes, src_points, src_features,
                             src_features, options.weighting);
      std::vector<Proposal> next = proposals;
      for (size_t i = 0; i < next.size(); ++i) {
        next[i].point = rec.updated_points[i];
        next[i].feature = std::move(voted[i]);
      }
      rec.inputs = std::move(proposals);
      proposals = std::move(next);
    } else {
      rec.inputs = std::move(proposals);
    }
    trace.stages.push_back(std::move(rec));
  }
  return trace;
}

std::vector<Detection> ensemble_stages(const StageTrace& trace, int first, int last,
                                       double iou_threshold, IouVariant variant) {
  const int n = static_cast<int>(trace.stages.size());
  if (first < 1 || last < first || last > n) {
    throw StageRangeError("stage range " + std::to_string(first) + ".." +
                          std::to_string(last) + " is empty or outside 1.." +
                          std::to_string(n));
  }
  std::vector<Detection> pool;
  for (int l = first; l <= last; ++l) {
    const auto& dets = trace.stages[static_cast<size_t>(l - 1)].detections;
    pool.insert(pool.end(), dets.begin(), dets.end());
  }
  std::vector<Detection> out;
  for (size_t k : nms(pool, iou_threshold, variant)) out.push_back(pool[k]);
  return out;
}

std::vector<Proposal> initial_proposals(std::span<const Point3> points,
                                        std::span<const FeatureVec> features,
                                        const Predictor& predictor, int b) {
  if (points.size() != features.size()) {
    throw MisalignmentError("points and features are not aligned");
  }
  std::vector<Proposal> all(points.size());
  std::vector<double> score(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    all[i].point = points[i];
    all[i].feature = features[i];
    all[i].origin_index = i;
    Prediction pred = predictor.predict(all[i], 1);
    validate_prediction(pred);
    score[i] = best_object_class(pred).second * pred.centerness;
  }
  std::vector<Proposal> out;
  for (size_t i : select_top_b(score, b)) out.push_back(std::move(all[i]));
  return out;
}

std::vector<Proposal> denoising_proposals(std::span<const Point3> points,
                                          std::span<const FeatureVec> features,
                                          std::span<const OrientedBox> gts) {
  if (points.size() != features.size()) {
    throw MisalignmentError("points and features are not aligned");
  }
  std::vector<Point3> centers;
  centers.reserve(gts.size());
  for (const auto& g : gts) centers.push_back(g.center);
  const auto idx = select_denoising(points, centers);
  std::vector<Proposal> out;
  for (size_t t = 0; t < idx.size(); ++t) {
    Proposal p;
    p.point = points[idx[t]];
    p.feature = features[idx[t]];
    p.is_denoising = true;
    p.origin_index = idx[t];
    p.denoising_gt = t;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cascadev
