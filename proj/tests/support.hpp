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

// Helpers shared by the unit tests.

#ifndef CASCADEV_TESTS_SUPPORT_HPP_
#define CASCADEV_TESTS_SUPPORT_HPP_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cascadev/geometry.hpp"
#include "cascadev/rng.hpp"

namespace cascadev::testing {

inline OrientedBox random_box(Rng& rng, bool rotated = true, double extent = 3.0) {
  const Point3 c{rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                 rng.uniform(-extent, extent)};
  const BoxSize s{rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)};
  const double yaw = rotated ? rng.uniform(-4.0, 4.0) : 0.0;
  return OrientedBox::make(c, s, yaw);
}

inline Point3 random_point(Rng& rng, double extent = 4.0) {
  return {rng.uniform(-extent, extent), rng.uniform(-extent, extent),
          rng.uniform(-extent, extent)};
}

// Point inside the box, expressed via an independent cos/sin evaluation.
inline Point3 point_inside(Rng& rng, const OrientedBox& b, double frac = 0.5) {
  const double lx = rng.uniform(-frac, frac) * b.size.w;
  const double ly = rng.uniform(-frac, frac) * b.size.l;
  const double lz = rng.uniform(-frac, frac) * b.size.h;
  return {b.center.x + std::cos(b.yaw) * lx - std::sin(b.yaw) * ly,
          b.center.y + std::sin(b.yaw) * lx + std::cos(b.yaw) * ly, b.center.z + lz};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("cascadev_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace cascadev::testing

#endif  // CASCADEV_TESTS_SUPPORT_HPP_
