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

#include "cascadev/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "cascadev/errors.hpp"

namespace cascadev {

ApInterpolation parse_ap_interpolation(std::string_view name) {
  if (name == "continuous") return ApInterpolation::kContinuous;
  if (name == "11point") return ApInterpolation::kElevenPoint;
  throw ConfigError("unknown AP interpolation '" + std::string(name) + "'");
}

IouVariant parse_iou_variant(std::string_view name) {
  if (name == "rotated") return IouVariant::kRotated;
  if (name == "aabb") return IouVariant::kAxisAligned;
  throw ConfigError("unknown IoU variant '" + std::string(name) + "'");
}

std::string_view to_string(ApInterpolation a) {
  return a == ApInterpolation::kElevenPoint ? "11point" : "continuous";
}

std::string_view to_string(IouVariant v) {
  return v == IouVariant::kAxisAligned ? "aabb" : "rotated";
}

double ApResult::map_at(double t) const {
  for (const auto& th : thresholds) {
    if (std::abs(th.iou_threshold - t) < 1e-12) return th.map;
  }
  throw InvalidArgumentError("threshold " + std::to_string(t) + " was not evaluated");
}

double ap_from_ranked(std::span<const char> is_tp, size_t num_gt, ApInterpolation interp,
                      std::vector<PrPoint>* curve) {
  if (num_gt == 0) return 0.0;
  std::vector<double> rec, prec;
  size_t tp = 0;
  for (size_t k = 0; k < is_tp.size(); ++k) {
    tp += is_tp[k] ? 1 : 0;
    rec.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    prec.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  if (curve) {
    curve->clear();
    for (size_t k = 0; k < rec.size(); ++k) curve->push_back({rec[k], prec[k]});
  }
  if (interp == ApInterpolation::kElevenPoint) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double r = i / 10.0;
      double best = 0.0;
      for (size_t k = 0; k < rec.size(); ++k) {
        if (rec[k] >= r - 1e-12) best = std::max(best, prec[k]);
      }
      sum += best;
    }
    return sum / 11.0;
  }
  // Precision envelope from the right, integrated over recall steps.
  std::vector<double> env(prec);
  for (size_t k = env.size(); k-- > 1;) env[k - 1] = std::max(env[k - 1], env[k]);
  double ap = 0.0;
  double prev_r = 0.0;
  for (size_t k = 0; k < rec.size(); ++k) {
    if (rec[k] > prev_r) {
      ap += (rec[k] - prev_r) * env[k];
      prev_r = rec[k];
    }
  }
  return ap;
}

ApResult average_precision(std::span<const EvalScene> scenes,
                           std::span<const double> iou_thresholds, const ApOptions& options) {
  std::set<int> classes;
  for (const auto& s : scenes) {
    for (const auto& g : s.gts) classes.insert(g.class_id.value_or(0));
  }
  ApResult result;
  for (double thr : iou_thresholds) {
    if (!(thr > 0.0 && thr < 1.0)) throw InvalidArgumentError("IoU threshold must lie in (0, 1)");
    ThresholdAp tap;
    tap.iou_threshold = thr;
    for (int cls : classes) {
      struct Ref {
        size_t scene;
        size_t det;
        double score;
      };
      std::vector<Ref> refs;
      size_t num_gt = 0;
      for (size_t s = 0; s < scenes.size(); ++s) {
        for (size_t d = 0; d < scenes[s].detections.size(); ++d) {
          if (scenes[s].detections[d].class_id == cls) {
            refs.push_back({s, d, scenes[s].detections[d].score});
          }
        }
        for (const auto& g : scenes[s].gts) num_gt += g.class_id.value_or(0) == cls ? 1 : 0;
      }
      std::stable_sort(refs.begin(), refs.end(),
                       [](const Ref& a, const Ref& b) { return a.score > b.score; });
      std::vector<std::vector<char>> used(scenes.size());
      for (size_t s = 0; s < scenes.size(); ++s) used[s].assign(scenes[s].gts.size(), 0);
      std::vector<char> is_tp;
      is_tp.reserve(refs.size());
      for (const Ref& r : refs) {
        const auto& gts = scenes[r.scene].gts;
        const auto& det = scenes[r.scene].detections[r.det];
        double best = -1.0;
        size_t best_g = 0;
        for (size_t g = 0; g < gts.size(); ++g) {
          if (used[r.scene][g] || gts[g].class_id.value_or(0) != cls) continue;
          const double v = iou(det.box, gts[g], options.matcher);
          if (v > best) {
            best = v;
            best_g = g;
          }
        }
        const bool tp = best >= thr;
        if (tp) used[r.scene][best_g] = 1;
        is_tp.push_back(tp ? 1 : 0);
      }
      ClassAp cap;
      cap.class_id = cls;
      cap.num_gt = num_gt;
      cap.num_det = refs.size();
      cap.ap = ap_from_ranked(is_tp, num_gt, options.interpolation, &cap.curve);
      tap.per_class.push_back(std::move(cap));
    }
    double sum = 0.0;
    for (const auto& c : tap.per_class) sum += c.ap;
    tap.map = tap.per_class.empty() ? 0.0 : sum / static_cast<double>(tap.per_class.size());
    result.thresholds.push_back(std::move(tap));
  }
  return result;
}

ApResult average_precision(std::span<const Detection> dets, std::span<const OrientedBox> gts,
                           double iou_threshold, const ApOptions& options) {
  EvalScene scene{{dets.begin(), dets.end()}, {gts.begin(), gts.end()}};
  const double thr[] = {iou_threshold};
  return average_precision(std::span<const EvalScene>(&scene, 1), thr, options);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Linear-interpolated percentile, q in [0, 1].
double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

size_t gained(const StageSamples& s) {
  size_t n = 0;
  for (size_t i = 0; i < s.centerness_before.size(); ++i) {
    n += s.centerness_after[i] > s.centerness_before[i] ? 1 : 0;
  }
  return n;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MisalignmentError("spearman inputs differ in length");
  if (a.size() < 2) return 0.0;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

void CascadeStats::merge(const CascadeStats& other) {
  for (const auto& o : other.stages) {
    auto it = std::find_if(stages.begin(), stages.end(),
                           [&](const StageSamples& s) { return s.stage == o.stage; });
    if (it == stages.end()) {
      stages.push_back(o);
      continue;
    }
    it->positives += o.positives;
    it->centerness_before.insert(it->centerness_before.end(), o.centerness_before.begin(),
                                 o.centerness_before.end());
    it->centerness_after.insert(it->centerness_after.end(), o.centerness_after.begin(),
                                o.centerness_after.end());
    it->iou.insert(it->iou.end(), o.iou.begin(), o.iou.end());
  }
  std::sort(stages.begin(), stages.end(),
            [](const StageSamples& a, const StageSamples& b) { return a.stage < b.stage; });
}

std::vector<StageSummary> CascadeStats::summary() const {
  std::vector<StageSummary> out;
  for (const auto& s : stages) {
    StageSummary r;
    r.stage = s.stage;
    r.mu = s.mu;
    r.positives = s.positives;
    r.samples = s.centerness_before.size();
    r.mean_centerness_before = mean(s.centerness_before);
    r.mean_centerness_after = mean(s.centerness_after);
    r.p10_before = percentile(s.centerness_before, 0.1);
    r.p50_before = percentile(s.centerness_before, 0.5);
    r.p90_before = percentile(s.centerness_before, 0.9);
    r.p10_after = percentile(s.centerness_after, 0.1);
    r.p50_after = percentile(s.centerness_after, 0.5);
    r.p90_after = percentile(s.centerness_after, 0.9);
    r.fraction_gained =
        r.samples == 0 ? 0.0 : static_cast<double>(gained(s)) / static_cast<double>(r.samples);
    r.spearman_rho = spearman(s.centerness_before, s.iou);
    out.push_back(r);
  }
  return out;
}

size_t CascadeStats::sample_count() const {
  size_t n = 0;
  for (const auto& s : stages) n += s.centerness_before.size();
  return n;
}

double CascadeStats::fraction_gained() const {
  size_t g = 0;
  for (const auto& s : stages) g += gained(s);
  const size_t n = sample_count();
  return n == 0 ? 0.0 : static_cast<double>(g) / static_cast<double>(n);
}

double CascadeStats::spearman_rho() const {
  std::vector<double> c, v;
  for (const auto& s : stages) {
    c.insert(c.end(), s.centerness_before.begin(), s.centerness_before.end());
    v.insert(v.end(), s.iou.begin(), s.iou.end());
  }
  return spearman(c, v);
}

CascadeStats cascade_stats(std::span<const StageTrace> traces) {
  if (traces.empty()) throw EmptyInputError("no traces to aggregate");
  CascadeStats stats;
  for (const StageTrace& tr : traces) {
    if (tr.gts.empty()) throw DataError("trace carries no ground truths");
    CascadeStats one;
    for (const StageRecord& rec : tr.stages) {
      StageSamples s;
      s.stage = rec.stage;
      s.mu = rec.mu;
      s.positives = rec.assignment ? rec.assignment->positive_count() : 0;
      for (size_t i = 0; i < rec.inputs.size(); ++i) {
        const Proposal& p = rec.inputs[i];
        if (p.is_denoising) continue;
        const OrientedBox& gt = tr.gts[*responsible_gt(p.point, tr.gts)];
        s.centerness_before.push_back(centerness(encode_deltas(p.point, gt)));
        s.centerness_after.push_back(centerness(encode_deltas(rec.updated_points[i], gt)));
        s.iou.push_back(rec.boxes[i] ? iou_rotated(*rec.boxes[i], gt) : 0.0);
      }
      one.stages.push_back(std::move(s));
    }
    stats.merge(one);
  }
  return stats;
}

}  // namespace cascadev
