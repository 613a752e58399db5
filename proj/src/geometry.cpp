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

#include "cascadev/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cascadev/errors.hpp"

namespace cascadev {

double norm(const Point3& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }

double l1_distance(const Point3& a, const Point3& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
}

bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

double normalize_yaw(double yaw) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double y = std::fmod(yaw + std::numbers::pi, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  y -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift back.
  if (y >= std::numbers::pi) y -= kTwoPi;
  return y;
}

Point3 rotate_z(const Point3& p, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

OrientedBox OrientedBox::make(const Point3& center, const BoxSize& size,
                              double yaw, std::optional<int> class_id) {
  const bool ok = std::isfinite(size.w) && std::isfinite(size.l) &&
                  std::isfinite(size.h) && size.w > 0.0 && size.l > 0.0 &&
                  size.h > 0.0;
  if (!ok || !is_finite(center) || !std::isfinite(yaw)) {
    throw InvalidArgumentError("box extents must be finite and positive");
  }
  OrientedBox box;
  box.center = center;
  box.size = size;
  box.yaw = normalize_yaw(yaw);
  box.class_id = class_id;
  return box;
}

Point3 OrientedBox::to_local(const Point3& world) const {
  return rotate_z(world - center, -yaw);
}

Point3 OrientedBox::to_world(const Point3& local) const {
  return center + rotate_z(local, yaw);
}

std::array<std::array<double, 2>, 4> OrientedBox::bev_corners() const {
  const double hw = 0.5 * size.w;
  const double hl = 0.5 * size.l;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const std::array<std::array<double, 2>, 4> local = {
      {{hw, hl}, {-hw, hl}, {-hw, -hl}, {hw, -hl}}};
  std::array<std::array<double, 2>, 4> out{};
  for (size_t i = 0; i < 4; ++i) {
    out[i] = {center.x + c * local[i][0] - s * local[i][1],
              center.y + s * local[i][0] + c * local[i][1]};
  }
  return out;
}

Deltas encode_deltas(const Point3& p, const OrientedBox& box) {
  const Point3 q = box.to_local(p);
  const double hw = 0.5 * box.size.w;
  const double hl = 0.5 * box.size.l;
  const double hh = 0.5 * box.size.h;
  Deltas d;
  d.d = {hw - q.x, q.x + hw, hl - q.y, q.y + hl, hh - q.z, q.z + hh};
  d.heading = box.yaw;
  return d;
}

namespace {

// Offset from the point to the implied center, in the box frame.
Point3 local_center_offset(const Deltas& d) {
  return {0.5 * (d.d[0] - d.d[1]), 0.5 * (d.d[2] - d.d[3]),
          0.5 * (d.d[4] - d.d[5])};
}

}  // namespace

OrientedBox decode_box(const Point3& p, const Deltas& d) {
  const BoxSize size{d.d[0] + d.d[1], d.d[2] + d.d[3], d.d[4] + d.d[5]};
  if (!(size.w > 0.0 && size.l > 0.0 && size.h > 0.0)) {
    throw InvalidDeltasError("deltas imply a non-positive box extent");
  }
  return OrientedBox::make(update_point(p, d), size, d.heading);
}

double centerness(const Deltas& d) {
  for (double v : d.d) {
    if (!(v > 0.0)) return 0.0;
  }
  double prod = 1.0;
  for (size_t axis = 0; axis < 3; ++axis) {
    const double a = d.d[2 * axis];
    const double b = d.d[2 * axis + 1];
    prod *= std::min(a, b) / std::max(a, b);
  }
  return std::sqrt(prod);
}

Point3 update_point(const Point3& p, const Deltas& d) {
  return p + rotate_z(local_center_offset(d), d.heading);
}

bool point_in_scaled_box(const Point3& p, const OrientedBox& box, double mu) {
  const Point3 q = box.to_local(p);
  return std::abs(q.x) <= mu * box.size.w + kGeomEps &&
         std::abs(q.y) <= mu * box.size.l + kGeomEps &&
         std::abs(q.z) <= mu * box.size.h + kGeomEps;
}

ImagePoint project_point(const Point3& p, const CameraMap& cam) {
  const auto& k = cam.psi;
  const double den = k[6] * p.x + k[7] * p.y + k[8] * p.z;
  if (!(std::abs(den) >= 1e-12)) {
    throw BehindCameraError("projection denominator vanishes");
  }
  return {(k[0] * p.x + k[1] * p.y + k[2] * p.z) / den,
          (k[3] * p.x + k[4] * p.y + k[5] * p.z) / den};
}

}  // namespace cascadev
