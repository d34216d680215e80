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

// Tri-view projection, planar convex hulls and the angle-radius function.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "shapesig/error.hpp"
#include "shapesig/geometry.hpp"

namespace shapesig {

/// bird keeps (x, y), side keeps (x, z), front keeps (y, z).
enum class View { bird, side, front };

inline std::string_view to_string(View v) {
  switch (v) {
    case View::bird: return "bird";
    case View::side: return "side";
    case View::front: return "front";
  }
  return "?";
}

struct Point2 {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend auto operator<=>(const Point2&, const Point2&) = default;
};

namespace detail {

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
}

}  // namespace detail

/// Strictly convex, counterclockwise polygon with at least three vertices.
class ConvexPolygon {
 public:
  /// Checks the invariant and throws ValidationError if it does not hold.
  static ConvexPolygon from_ccw(std::vector<Point2> vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw ValidationError("convex polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = vertices[i];
      const auto& b = vertices[(i + 1) % n];
      const auto& c = vertices[(i + 2) % n];
      if (!(std::isfinite(a.u) && std::isfinite(a.v))) throw ValidationError("non-finite vertex");
      if (detail::cross(a, b, c) <= 0.0) {
        throw ValidationError("vertices are not a strictly convex counterclockwise loop");
      }
    }
    // Winding number of one guards against loops that turn left but wrap twice.
    double turn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = vertices[i];
      const auto& b = vertices[(i + 1) % n];
      const auto& c = vertices[(i + 2) % n];
      turn += std::atan2(detail::cross(a, b, c),
                         (b.u - a.u) * (c.u - b.u) + (b.v - a.v) * (c.v - b.v));
    }
    if (std::abs(turn - 2.0 * std::numbers::pi) > 1e-6) {
      throw ValidationError("vertex loop is not simple");
    }
    return ConvexPolygon(std::move(vertices));
  }

  std::span<const Point2> vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

  friend bool operator==(const ConvexPolygon&, const ConvexPolygon&) = default;

 private:
  explicit ConvexPolygon(std::vector<Point2> v) : vertices_(std::move(v)) {}
  friend ConvexPolygon convex_hull(std::span<const Point2>, double);

  std::vector<Point2> vertices_;
};

/// Width used to inflate collinear or single-point inputs into a thin
/// rectangle, meters.
inline constexpr double kDegenerateHullEpsilon = 1e-3;

inline std::vector<Point2> project(const PointCloud3& cloud, View view) {
  if (cloud.frame != Frame::canonical) throw FrameError("project expects a canonical-frame cloud");
  std::vector<Point2> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    switch (view) {
      case View::bird: out.push_back({p.x, p.y}); break;
      case View::side: out.push_back({p.x, p.z}); break;
      case View::front: out.push_back({p.y, p.z}); break;
    }
  }
  return out;
}

namespace detail {

/// Drops points strictly inside the polygon spanned by the extreme points in
/// eight directions (Akl-Toussaint). Such points cannot be hull vertices.
inline void discard_interior(std::vector<Point2>& pts) {
  if (pts.size() < 64) return;
  // Directions in counterclockwise order starting from -v.
  constexpr std::array<std::array<double, 2>, 8> dirs{
      {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};
  std::array<std::size_t, 8> best{};
  std::array<double, 8> score;
  score.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t d = 0; d < 8; ++d) {
      const double s = dirs[d][0] * pts[i].u + dirs[d][1] * pts[i].v;
      if (s > score[d]) {
        score[d] = s;
        best[d] = i;
      }
    }
  }
  std::vector<Point2> ring;
  for (std::size_t idx : best) {
    if (ring.empty() || !(pts[idx] == ring.back())) ring.push_back(pts[idx]);
  }
  while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3) return;

  std::erase_if(pts, [&](const Point2& p) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
      if (!(cross(ring[i], ring[i + 1 == ring.size() ? 0 : i + 1], p) > 0.0)) return false;
    }
    return true;
  });
}

}  // namespace detail

/// Minimal convex polygon around `points` (Andrew's monotone chain).
///
/// Vertices come out counterclockwise starting from the lexicographically
/// smallest point, with collinear boundary points dropped. Inputs whose hull
/// has no area are inflated by `epsilon` perpendicular to their axis (a
/// square of half-side `epsilon` for a single distinct point).
inline ConvexPolygon convex_hull(std::span<const Point2> points,
                                 double epsilon = kDegenerateHullEpsilon) {
  if (points.empty()) throw NoShapeError("convex hull of an empty point set");

  std::vector<Point2> pts(points.begin(), points.end());
  for (const auto& p : pts) {
    if (!(std::isfinite(p.u) && std::isfinite(p.v))) throw ValidationError("non-finite 2D point");
  }
  detail::discard_interior(pts);
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.u < b.u || (a.u == b.u && a.v < b.v);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const std::size_t n = pts.size();
  if (n == 1) {
    const auto& p = pts.front();
    return ConvexPolygon({{p.u - epsilon, p.v - epsilon},
                          {p.u + epsilon, p.v - epsilon},
                          {p.u + epsilon, p.v + epsilon},
                          {p.u - epsilon, p.v + epsilon}});
  }

  std::vector<Point2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);

  if (hull.size() < 3) {
    const Point2 a = pts.front();
    const Point2 b = pts.back();
    const double du = b.u - a.u;
    const double dv = b.v - a.v;
    const double len = std::hypot(du, dv);
    const double nu = -dv / len * epsilon;
    const double nv = du / len * epsilon;
    return ConvexPolygon({{a.u - nu, a.v - nv},
                          {b.u - nu, b.v - nv},
                          {b.u + nu, b.v + nv},
                          {a.u + nu, a.v + nv}});
  }
  return ConvexPolygon(std::move(hull));
}

/// Distance from the origin along direction `theta` to the farthest point
/// of the polygon on that ray, or 0 when the ray misses it.
///
/// Clips the ray t * (cos, sin), t >= 0, against every edge half-plane;
/// the far end of the surviving interval is the answer.
inline double radial_profile_at(const ConvexPolygon& poly, double theta) {
  const double du = std::cos(theta);
  const double dv = std::sin(theta);
  const auto v = poly.vertices();
  const std::size_t n = v.size();

  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[i + 1 == n ? 0 : i + 1];
    // Outward normal of a counterclockwise edge.
    const double nu = b.v - a.v;
    const double nv = a.u - b.u;
    const double offset = nu * a.u + nv * a.v;
    const double along = nu * du + nv * dv;
    if (along > 0.0) {
      t_hi = std::min(t_hi, offset / along);
    } else if (along < 0.0) {
      t_lo = std::max(t_lo, offset / along);
    } else if (offset < 0.0) {
      return 0.0;
    }
  }
  if (!(t_lo <= t_hi) || !std::isfinite(t_hi)) return 0.0;
  return t_hi;
}

/// f(theta) sampled on a uniform grid starting at the +u axis.
struct RadialProfile {
  std::vector<double> angles;
  std::vector<double> radii;
  Point2 origin{};
};

inline RadialProfile radial_profile(const ConvexPolygon& poly, std::size_t n_angles = 360) {
  RadialProfile out;
  out.angles.reserve(n_angles);
  out.radii.reserve(n_angles);
  for (std::size_t i = 0; i < n_angles; ++i) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_angles);
    out.angles.push_back(theta);
    out.radii.push_back(radial_profile_at(poly, theta));
  }
  return out;
}

}  // namespace shapesig
