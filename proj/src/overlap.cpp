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

#include "cascadev/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cascadev/errors.hpp"
#include "cascadev/rng.hpp"

namespace cascadev {
namespace {

using Vec2 = std::array<double, 2>;

constexpr double kMinArea = 1e-12;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double polygon_area(std::span<const Vec2> poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(twice);
}

double z_overlap(const OrientedBox& a, const OrientedBox& b) {
  const double lo = std::max(a.center.z - 0.5 * a.size.h, b.center.z - 0.5 * b.size.h);
  const double hi = std::min(a.center.z + 0.5 * a.size.h, b.center.z + 0.5 * b.size.h);
  return std::max(0.0, hi - lo);
}

double iou_from_intersection(double inter, const OrientedBox& a, const OrientedBox& b) {
  if (inter <= 0.0) return 0.0;
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace

double convex_intersection_area(std::span<const Vec2> a, std::span<const Vec2> b) {
  // Sutherland-Hodgman: clip `a` successively by every edge of `b`.
  std::vector<Vec2> out(a.begin(), a.end());
  std::vector<Vec2> in;
  for (size_t e = 0; e < b.size() && !out.empty(); ++e) {
    const Vec2& p0 = b[e];
    const Vec2& p1 = b[(e + 1) % b.size()];
    in.swap(out);
    out.clear();
    for (size_t i = 0; i < in.size(); ++i) {
      const Vec2& cur = in[i];
      const Vec2& prev = in[(i + in.size() - 1) % in.size()];
      const double sc = cross(p0, p1, cur);
      const double sp = cross(p0, p1, prev);
      const bool cur_in = sc >= 0.0;
      const bool prev_in = sp >= 0.0;
      if (cur_in != prev_in) {
        const double t = sp / (sp - sc);
        out.push_back({prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])});
      }
      if (cur_in) out.push_back(cur);
    }
  }
  const double area = polygon_area(out);
  return area < kMinArea ? 0.0 : area;
}

double iou_aabb(const OrientedBox& a, const OrientedBox& b) {
  if (a.yaw != 0.0 || b.yaw != 0.0) {
    throw WrongVariantError("iou_aabb requires yaw-free boxes");
  }
  double inter = 1.0;
  const std::array<std::array<double, 4>, 3> axes = {{
      {a.center.x, a.size.w, b.center.x, b.size.w},
      {a.center.y, a.size.l, b.center.y, b.size.l},
      {a.center.z, a.size.h, b.center.z, b.size.h},
  }};
  for (const auto& ax : axes) {
    const double lo = std::max(ax[0] - 0.5 * ax[1], ax[2] - 0.5 * ax[3]);
    const double hi = std::min(ax[0] + 0.5 * ax[1], ax[2] + 0.5 * ax[3]);
    if (hi <= lo) return 0.0;
    inter *= hi - lo;
  }
  return iou_from_intersection(inter, a, b);
}

double iou_rotated(const OrientedBox& a, const OrientedBox& b) {
  const double dz = z_overlap(a, b);
  if (dz <= 0.0) return 0.0;
  const auto ca = a.bev_corners();
  const auto cb = b.bev_corners();
  const double area = convex_intersection_area(ca, cb);
  return iou_from_intersection(area * dz, a, b);
}

OrientedBox enclosing_aabb(const OrientedBox& box) {
  const double c = std::abs(std::cos(box.yaw));
  const double s = std::abs(std::sin(box.yaw));
  OrientedBox out = box;
  out.size.w = c * box.size.w + s * box.size.l;
  out.size.l = s * box.size.w + c * box.size.l;
  out.yaw = 0.0;
  return out;
}

double iou(const OrientedBox& a, const OrientedBox& b, IouVariant variant) {
  if (variant == IouVariant::kAxisAligned) {
    return iou_aabb(enclosing_aabb(a), enclosing_aabb(b));
  }
  return iou_rotated(a, b);
}

MonteCarloIou iou_monte_carlo(const OrientedBox& a, const OrientedBox& b,
                              size_t samples, uint64_t seed) {
  const OrientedBox ea = enclosing_aabb(a);
  const OrientedBox eb = enclosing_aabb(b);
  auto lo = [](const OrientedBox& e, int k) {
    const double c[3] = {e.center.x, e.center.y, e.center.z};
    const double s[3] = {e.size.w, e.size.l, e.size.h};
    return c[k] - 0.5 * s[k];
  };
  auto hi = [](const OrientedBox& e, int k) {
    const double c[3] = {e.center.x, e.center.y, e.center.z};
    const double s[3] = {e.size.w, e.size.l, e.size.h};
    return c[k] + 0.5 * s[k];
  };
  double mn[3], mx[3];
  for (int k = 0; k < 3; ++k) {
    mn[k] = std::min(lo(ea, k), lo(eb, k));
    mx[k] = std::max(hi(ea, k), hi(eb, k));
  }
  Rng rng(seed);
  size_t both = 0;
  size_t either = 0;
  for (size_t i = 0; i < samples; ++i) {
    const Point3 p{rng.uniform(mn[0], mx[0]), rng.uniform(mn[1], mx[1]),
                   rng.uniform(mn[2], mx[2])};
    const bool in_a = point_in_scaled_box(p, a, 0.5);
    const bool in_b = point_in_scaled_box(p, b, 0.5);
    both += in_a && in_b;
    either += in_a || in_b;
  }
  MonteCarloIou r;
  r.samples_in_union = either;
  if (either == 0) return r;
  const double est = static_cast<double>(both) / static_cast<double>(either);
  r.estimate = est;
  r.std_error = std::sqrt(est * (1.0 - est) / static_cast<double>(either));
  return r;
}

std::vector<size_t> nms(std::span<const Detection> dets, double iou_threshold,
                        IouVariant variant) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw InvalidArgumentError("nms threshold must lie in (0, 1)");
  }
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    return dets[i].score > dets[j].score;
  });
  std::vector<size_t> kept;
  std::vector<char> suppressed(dets.size(), 0);
  for (size_t oi = 0; oi < order.size(); ++oi) {
    const size_t i = order[oi];
    if (suppressed[i]) continue;
    kept.push_back(i);
    for (size_t oj = oi + 1; oj < order.size(); ++oj) {
      const size_t j = order[oj];
      if (suppressed[j] || dets[j].class_id != dets[i].class_id) continue;
      if (iou(dets[i].box, dets[j].box, variant) > iou_threshold) suppressed[j] = 1;
    }
  }
  return kept;
}

}  // namespace cascadev
