/*
 * Copyright (c) 2026, The shapesig Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Object-centred coordinate frames and centro-symmetric shape completion.

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "shapesig/error.hpp"

namespace shapesig {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

enum class Frame { sensor, canonical };

/// Object points. `sensor` clouds are in the lidar frame (meters);
/// `canonical` clouds are centred on the box with its heading on +x.
struct PointCloud3 {
  std::vector<Point3> points;
  Frame frame = Frame::sensor;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Box extents: `w` across (y), `l` along the heading (x), `h` vertical (z).
struct BoxSize {
  double w = 0.0;
  double l = 0.0;
  double h = 0.0;

  friend bool operator==(const BoxSize&, const BoxSize&) = default;
};

/// Wraps an angle into [-pi, pi).
inline double normalize_angle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::remainder(radians, kTwoPi);
  if (r >= std::numbers::pi) r -= kTwoPi;
  if (r < -std::numbers::pi) r += kTwoPi;
  return r;
}

/// Oriented ground-truth box. `yaw` is counterclockwise about +z seen from
/// above; the heading direction is (cos yaw, sin yaw, 0).
struct Box3D {
  Point3 center;
  BoxSize size;
  double yaw = 0.0;

  /// Builds a box with yaw wrapped into [-pi, pi).
  static Box3D make(Point3 center, BoxSize size, double yaw) {
    return Box3D{center, size, normalize_angle(yaw)};
  }

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

inline void validate(const Box3D& box) {
  if (!is_finite(box.center)) throw ValidationError("box center is not finite");
  const auto& s = box.size;
  if (!(std::isfinite(s.w) && std::isfinite(s.l) && std::isfinite(s.h)) || s.w <= 0.0 ||
      s.l <= 0.0 || s.h <= 0.0) {
    throw ValidationError("box size must be finite and positive");
  }
  if (!std::isfinite(box.yaw) || box.yaw < -std::numbers::pi || box.yaw >= std::numbers::pi) {
    throw ValidationError("box yaw must lie in [-pi, pi)");
  }
}

inline void validate(std::span<const Point3> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!is_finite(points[i])) {
      throw ValidationError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

inline void validate(const PointCloud3& cloud) { validate(std::span<const Point3>(cloud.points)); }

enum class SymmetryMode {
  planar,  ///< (x, y, z) -> (-x, -y, z)
  full3d,  ///< (x, y, z) -> (-x, -y, -z)
};

/// Moves a sensor-frame cloud into the box frame: p' = R(-yaw) (p - center).
inline PointCloud3 canonicalize(const PointCloud3& cloud, const Box3D& box) {
  if (cloud.frame != Frame::sensor) throw FrameError("canonicalize expects a sensor-frame cloud");
  validate(box);
  validate(cloud);

  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  PointCloud3 out;
  out.frame = Frame::canonical;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    const double dx = p.x - box.center.x;
    const double dy = p.y - box.center.y;
    out.points.push_back({c * dx + s * dy, -s * dx + c * dy, p.z - box.center.z});
  }
  return out;
}

/// Appends the mirror image of every point. Duplicates are kept, so the
/// output always holds twice as many points as the input.
inline PointCloud3 centro_symmetrize(const PointCloud3& cloud, SymmetryMode mode = SymmetryMode::planar) {
  if (cloud.frame != Frame::canonical) {
    throw FrameError("centro_symmetrize expects a canonical-frame cloud");
  }
  PointCloud3 out;
  out.frame = Frame::canonical;
  out.points.reserve(2 * cloud.size());
  out.points = cloud.points;
  const double zsign = mode == SymmetryMode::full3d ? -1.0 : 1.0;
  for (const auto& p : cloud.points) out.points.push_back({-p.x, -p.y, zsign * p.z});
  return out;
}

/// Keeps canonical points within the box grown by `margin` (a fraction of
/// each half-extent).
inline PointCloud3 clip_to_box(const PointCloud3& cloud, const BoxSize& size, double margin = 0.1) {
  if (cloud.frame != Frame::canonical) throw FrameError("clip_to_box expects a canonical-frame cloud");
  const double hx = 0.5 * size.l * (1.0 + margin);
  const double hy = 0.5 * size.w * (1.0 + margin);
  const double hz = 0.5 * size.h * (1.0 + margin);
  PointCloud3 out;
  out.frame = Frame::canonical;
  for (const auto& p : cloud.points) {
    if (std::abs(p.x) <= hx && std::abs(p.y) <= hy && std::abs(p.z) <= hz) out.points.push_back(p);
  }
  return out;
}

}  // namespace shapesig
