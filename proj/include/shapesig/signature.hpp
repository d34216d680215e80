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

// End-to-end shape signature: canonical frame, centro-symmetry, per-view
// hull, angle-radius sampling at Chebyshev nodes, leading coefficients.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapesig/chebyshev.hpp"
#include "shapesig/error.hpp"
#include "shapesig/geometry.hpp"
#include "shapesig/hull.hpp"
#include "shapesig/parallel.hpp"

namespace shapesig {

struct SignatureConfig {
  SymmetryMode symmetry = SymmetryMode::planar;
  FitConfig fit{};
  std::size_t n_angles = 360;  ///< diagnostics grid only; the fit samples node angles
  std::size_t min_points = 5;  ///< clouds with this many points or fewer are degenerate
  std::array<View, 3> views{View::bird, View::side, View::front};
  bool clip_to_box = false;
  double clip_margin = 0.1;

  friend bool operator==(const SignatureConfig&, const SignatureConfig&) = default;
};

inline void validate(const SignatureConfig& cfg) {
  validate(cfg.fit);
  if (cfg.n_angles == 0) throw ValidationError("n_angles must be positive");
  if (cfg.clip_margin < 0.0) throw ValidationError("clip margin must be non-negative");
}

/// Per-view coefficient blocks laid out in `views` order:
/// [view0 a_0..a_{k-1} | view1 ... | view2 ...].
struct Signature {
  std::vector<double> values;
  std::size_t k = 0;

  std::span<const double> view(std::size_t i) const {
    return std::span<const double>(values).subspan(i * k, k);
  }

  friend bool operator==(const Signature&, const Signature&) = default;
};

inline void validate(const Signature& s) {
  if (s.values.size() != 3 * s.k) throw ValidationError("signature length must be 3k");
  for (double v : s.values) {
    if (!std::isfinite(v)) throw ValidationError("signature has a non-finite component");
  }
}

/// Radii at the node angles of a degree-N fit over [0, 2pi).
inline std::vector<double> sample_at_nodes(const ConvexPolygon& poly, std::size_t degree,
                                           const AngleDomain& domain = {}) {
  const auto nodes = cheb_nodes(degree);
  std::vector<double> f(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) f[n] = radial_profile_at(poly, domain.from_unit(nodes[n]));
  return f;
}

/// Full Chebyshev expansion of a polygon's angle-radius function.
inline ChebyshevFit fit_polygon(const ConvexPolygon& poly, std::size_t degree) {
  return cheb_fit(sample_at_nodes(poly, degree), degree);
}

/// Hull of one view of an already completed canonical cloud.
inline ConvexPolygon view_hull(const PointCloud3& completed, View view) {
  const auto pts = project(completed, view);
  return convex_hull(pts);
}

/// Canonicalized, optionally clipped and symmetrized cloud the views are
/// built from.
inline PointCloud3 complete_shape(const PointCloud3& cloud, const Box3D& box, const SignatureConfig& cfg) {
  auto canonical = canonicalize(cloud, box);
  if (cfg.clip_to_box) canonical = clip_to_box(canonical, box.size, cfg.clip_margin);
  return centro_symmetrize(canonical, cfg.symmetry);
}

/// Signature of one annotated object, or std::nullopt when the box holds
/// `min_points` points or fewer (callers fall back to a class prototype).
inline std::optional<Signature> compute_signature(const PointCloud3& cloud, const Box3D& box,
                                                  const SignatureConfig& cfg = {}) {
  validate(cfg);
  auto canonical = canonicalize(cloud, box);
  if (cfg.clip_to_box) canonical = clip_to_box(canonical, box.size, cfg.clip_margin);
  if (canonical.size() <= cfg.min_points) return std::nullopt;
  const auto completed = centro_symmetrize(canonical, cfg.symmetry);

  Signature sig;
  sig.k = cfg.fit.k;
  sig.values.reserve(3 * cfg.fit.k);
  for (View view : cfg.views) {
    const auto hull = view_hull(completed, view);
    const auto samples = sample_at_nodes(hull, cfg.fit.degree);
    const auto alpha = cheb_leading(samples, cfg.fit.degree, cfg.fit.k);
    sig.values.insert(sig.values.end(), alpha.begin(), alpha.end());
  }
  return sig;
}

struct LabeledObject {
  std::string label;
  PointCloud3 cloud;
  Box3D box;
};

/// compute_signature over many objects; result[i] belongs to objects[i]
/// regardless of `jobs`.
inline std::vector<std::optional<Signature>> compute_signatures(std::span<const LabeledObject> objects,
                                                                const SignatureConfig& cfg, std::size_t jobs = 1) {
  validate(cfg);
  std::vector<std::optional<Signature>> out(objects.size());
  parallel_for(objects.size(), jobs,
               [&](std::size_t i) { out[i] = compute_signature(objects[i].cloud, objects[i].box, cfg); });
  return out;
}

struct PrototypeEntry {
  Signature signature;
  std::size_t count = 0;  ///< non-degenerate samples averaged
};

/// Per-class mean signatures, tied to the config they were built with.
struct PrototypeTable {
  SignatureConfig config{};
  std::map<std::string, PrototypeEntry> entries;
  std::map<std::string, std::size_t> degenerate_counts;  ///< samples skipped per class

  const Signature* find(const std::string& label) const {
    auto it = entries.find(label);
    return it == entries.end() ? nullptr : &it->second.signature;
  }

  /// Classes seen only through degenerate samples.
  std::vector<std::string> omitted_classes() const {
    std::vector<std::string> out;
    for (const auto& [label, n] : degenerate_counts) {
      if (!entries.contains(label)) out.push_back(label);
    }
    return out;
  }
};

/// Averages per-class signatures in input order; nullopt entries count as
/// degenerate samples and are left out of the mean.
inline PrototypeTable average_prototypes(std::span<const std::string> labels,
                                         std::span<const std::optional<Signature>> signatures,
                                         const SignatureConfig& cfg) {
  if (labels.size() != signatures.size()) throw ValidationError("labels and signatures differ in count");
  PrototypeTable table;
  table.config = cfg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& label = labels[i];
    if (!signatures[i]) {
      ++table.degenerate_counts[label];
      continue;
    }
    const auto& sig = *signatures[i];
    auto& entry = table.entries[label];
    if (entry.count == 0) {
      entry.signature = sig;
    } else {
      if (sig.values.size() != entry.signature.values.size()) throw ValidationError("signatures differ in length");
      for (std::size_t j = 0; j < sig.values.size(); ++j) entry.signature.values[j] += sig.values[j];
    }
    ++entry.count;
  }
  for (auto& [label, entry] : table.entries) {
    const double n = static_cast<double>(entry.count);
    for (double& v : entry.signature.values) v /= n;
  }
  return table;
}

/// Arithmetic mean of the non-degenerate signatures of each class. The sum
/// runs in dataset order, so the table is bit-stable for any `jobs`.
inline PrototypeTable build_prototypes(std::span<const LabeledObject> dataset, const SignatureConfig& cfg,
                                       std::size_t jobs = 1) {
  if (dataset.empty()) throw ValidationError("cannot build prototypes from an empty dataset");
  const auto sigs = compute_signatures(dataset, cfg, jobs);
  std::vector<std::string> labels;
  labels.reserve(dataset.size());
  for (const auto& o : dataset) labels.push_back(o.label);
  return average_prototypes(labels, sigs, cfg);
}

struct ResolvedSignature {
  Signature signature;
  bool from_prototype = false;
};

inline ResolvedSignature resolve_signature_ex(const PointCloud3& cloud, const Box3D& box, const std::string& label,
                                              const PrototypeTable& prototypes, const SignatureConfig& cfg) {
  if (!(prototypes.config == cfg)) {
    throw ValidationError("prototype table was built with a different signature config");
  }
  if (auto sig = compute_signature(cloud, box, cfg)) return {std::move(*sig), false};
  if (const auto* proto = prototypes.find(label)) return {*proto, true};
  throw UnresolvableError("degenerate sample of class '" + label + "' has no prototype");
}

/// compute_signature, with the class prototype standing in for degenerate
/// boxes.
inline Signature resolve_signature(const PointCloud3& cloud, const Box3D& box, const std::string& label,
                                   const PrototypeTable& prototypes, const SignatureConfig& cfg) {
  return resolve_signature_ex(cloud, box, label, prototypes, cfg).signature;
}

inline std::vector<ResolvedSignature> resolve_signatures(std::span<const LabeledObject> objects,
                                                         const PrototypeTable& prototypes,
                                                         const SignatureConfig& cfg, std::size_t jobs = 1) {
  std::vector<ResolvedSignature> out(objects.size());
  parallel_for(objects.size(), jobs, [&](std::size_t i) {
    const auto& o = objects[i];
    out[i] = resolve_signature_ex(o.cloud, o.box, o.label, prototypes, cfg);
  });
  return out;
}

}  // namespace shapesig
