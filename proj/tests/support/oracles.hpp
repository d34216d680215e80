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

// Test-only reference routines, independent of the library code paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "shapesig/hull.hpp"

namespace shapesig::testing {

/// O(n^3) hull vertex set: (i, j) is a hull edge when every other point is
/// strictly to its left or on the segment between them. Exact for inputs
/// whose orientation tests round correctly (lattice points, generic floats).
inline std::vector<Point2> brute_force_hull_vertices(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  std::vector<bool> keep(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool edge = true;
      for (std::size_t k = 0; k < n && edge; ++k) {
        if (k == i || k == j) continue;
        const auto& a = pts[i];
        const auto& b = pts[j];
        const auto& c = pts[k];
        const double cr = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
        if (cr < 0.0) {
          edge = false;
        } else if (cr == 0.0) {
          const double dot = (c.u - a.u) * (b.u - a.u) + (c.v - a.v) * (b.v - a.v);
          const double len2 = (b.u - a.u) * (b.u - a.u) + (b.v - a.v) * (b.v - a.v);
          if (dot <= 0.0 || dot >= len2) edge = false;
        }
      }
      if (edge) keep[i] = keep[j] = true;
    }
  }
  std::vector<Point2> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(pts[i]);
  }
  return out;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// |a - b| / max(|a|, |b|), or |a - b| when both are tiny.
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale < 1e-8 ? std::abs(analytic - numeric) : std::abs(analytic - numeric) / scale;
}

}  // namespace shapesig::testing
