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

// Oriented 3D boxes and the point-based box parametrization.
//
// A box is regressed from a proposal point as six face distances. For a box
// with heading the point is first expressed in the box's yaw-canonical frame
// (x along the box width, y along its length, z up), so that
//
//   d1 = w/2 - x'   d2 = x' + w/2
//   d3 = l/2 - y'   d4 = y' + l/2
//   d5 = h/2 - z'   d6 = z' + h/2
//
// where (x', y', z') is the point relative to the box center in that frame.

#ifndef CASCADEV_GEOMETRY_HPP_
#define CASCADEV_GEOMETRY_HPP_

#include <array>
#include <optional>

namespace cascadev {

// Absolute tolerance for geometric comparisons, in scene units.
inline constexpr double kGeomEps = 1e-9;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Point3 operator+(const Point3& a, const Point3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Point3 operator-(const Point3& a, const Point3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Point3 operator*(double s, const Point3& p) {
    return {s * p.x, s * p.y, s * p.z};
  }
  friend bool operator==(const Point3&, const Point3&) = default;
};

double norm(const Point3& p);
double l1_distance(const Point3& a, const Point3& b);
bool is_finite(const Point3& p);

// Wraps an angle into [-pi, pi).
double normalize_yaw(double yaw);

// Rotates a point about the z axis by `yaw` radians.
Point3 rotate_z(const Point3& p, double yaw);

struct BoxSize {
  double w = 1.0;  // extent along the box's local x
  double l = 1.0;  // extent along the box's local y
  double h = 1.0;  // extent along z
  friend bool operator==(const BoxSize&, const BoxSize&) = default;
};

// 7-DoF box. Construct through make() to get validation and yaw wrapping.
struct OrientedBox {
  Point3 center;
  BoxSize size;
  double yaw = 0.0;
  std::optional<int> class_id;
  std::optional<double> score;

  // Throws InvalidArgumentError for non-positive or non-finite extents.
  static OrientedBox make(const Point3& center, const BoxSize& size,
                          double yaw = 0.0,
                          std::optional<int> class_id = std::nullopt);

  double volume() const { return size.w * size.l * size.h; }

  // Expresses a world point relative to the center in the box frame.
  Point3 to_local(const Point3& world) const;
  Point3 to_world(const Point3& local) const;

  // BEV footprint corners, counter-clockwise.
  std::array<std::array<double, 2>, 4> bev_corners() const;
};

// Face distances d[0..5] = d1..d6 plus the heading they were taken in.
struct Deltas {
  std::array<double, 6> d{};
  double heading = 0.0;
};

// Parameters psi1..psi9 of the rational 3D -> 2D mapping.
struct CameraMap {
  std::array<double, 9> psi{};
};

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
};

Deltas encode_deltas(const Point3& p, const OrientedBox& box);

// Inverse of encode_deltas. Throws InvalidDeltasError when an implied extent
// (d1+d2, d3+d4 or d5+d6) is not positive.
OrientedBox decode_box(const Point3& p, const Deltas& d);

// Product of the per-axis min/max ratios, square-rooted. Zero as soon as any
// face distance is non-positive.
double centerness(const Deltas& d);

// Center of the box implied by (p, d); defined for any deltas.
Point3 update_point(const Point3& p, const Deltas& d);

// Scaled membership: |x'| <= mu*w, |y'| <= mu*l, |z'| <= mu*h in the box
// frame, inclusive up to kGeomEps. mu = 0.5 is plain point-in-box.
bool point_in_scaled_box(const Point3& p, const OrientedBox& box, double mu);

// Throws BehindCameraError when psi7*x + psi8*y + psi9*z is within 1e-12 of 0.
ImagePoint project_point(const Point3& p, const CameraMap& cam);

}  // namespace cascadev

#endif  // CASCADEV_GEOMETRY_HPP_
