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

// Class-separation and robustness measurements over signatures, plus the
// CSV export consumed by external embedding/plotting tools.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shapesig/error.hpp"
#include "shapesig/parallel.hpp"
#include "shapesig/signature.hpp"

namespace shapesig {

struct LabeledSignatureSet {
  std::vector<Signature> signatures;
  std::vector<std::string> labels;
  /// Range from the sensor per sample, meters. Empty, or one entry per sample.
  std::vector<std::optional<double>> distances;

  std::size_t size() const noexcept { return signatures.size(); }
};

inline void validate(const LabeledSignatureSet& set) {
  if (set.labels.size() != set.signatures.size()) throw ValidationError("labels and signatures differ in count");
  if (!set.distances.empty() && set.distances.size() != set.signatures.size()) {
    throw ValidationError("distances and signatures differ in count");
  }
  for (std::size_t i = 1; i < set.signatures.size(); ++i) {
    if (set.signatures[i].values.size() != set.signatures[0].values.size()) {
      throw ValidationError("signatures differ in length");
    }
  }
}

struct SeparationResult {
  double value = 0.0;      ///< mean silhouette coefficient in [-1, 1]
  bool degenerate = false; ///< some sample had zero distance to everything
};

namespace detail {

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace detail

/// Mean silhouette coefficient under Euclidean distance. Needs at least two
/// classes with at least two samples each.
inline SeparationResult silhouette_separation(const LabeledSignatureSet& set) {
  validate(set);
  const std::size_t n = set.size();

  std::vector<std::string> classes(set.labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw ValidationError("silhouette needs at least two classes");

  std::vector<std::size_t> cls(n);
  std::vector<std::size_t> counts(classes.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    cls[i] = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), set.labels[i]) -
                                      classes.begin());
    ++counts[cls[i]];
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (counts[c] < 2) throw ValidationError("class '" + classes[c] + "' has fewer than two samples");
  }

  SeparationResult out;
  std::vector<double> dist_sum(classes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist_sum[cls[j]] += detail::euclidean(set.signatures[i].values, set.signatures[j].values);
    }
    const double a = dist_sum[cls[i]] / static_cast<double>(counts[cls[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (c != cls[i]) b = std::min(b, dist_sum[c] / static_cast<double>(counts[c]));
    }
    const double m = std::max(a, b);
    if (m == 0.0) {
      out.degenerate = true;
    } else {
      total += (b - a) / m;
    }
  }
  out.value = total / static_cast<double>(n);
  return out;
}

struct PerturbationSpec {
  double gaussian_sigma = 0.0;  ///< per-coordinate jitter, meters
  double drop_fraction = 0.0;   ///< probability of removing each point
  std::uint64_t seed = 0;
};

inline void validate(const PerturbationSpec& spec) {
  if (!(spec.gaussian_sigma >= 0.0) || !std::isfinite(spec.gaussian_sigma)) {
    throw ValidationError("gaussian_sigma must be >= 0");
  }
  if (!(spec.drop_fraction >= 0.0 && spec.drop_fraction < 1.0)) {
    throw ValidationError("drop_fraction must lie in [0, 1)");
  }
}

struct SensitivityStats {
  double mean = 0.0;  ///< over non-degenerate trials
  double p99 = 0.0;
  std::size_t degenerate_trials = 0;  ///< perturbed clouds left with too few points
  std::vector<double> changes;        ///< relative L2 change per trial, NaN if degenerate
};

/// Linear-interpolated percentile of an unsorted sample, q in [0, 100].
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

/// Applies `spec` to the cloud for one trial. Jitter comes first, then
/// dropout; each trial draws from its own (seed, trial) stream.
inline PointCloud3 perturb(const PointCloud3& cloud, const PerturbationSpec& spec, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::mt19937_64 rng(seq);
  PointCloud3 out = cloud;
  if (spec.gaussian_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.gaussian_sigma);
    for (auto& p : out.points) {
      p.x += noise(rng);
      p.y += noise(rng);
      p.z += noise(rng);
    }
  }
  if (spec.drop_fraction > 0.0) {
    std::bernoulli_distribution drop(spec.drop_fraction);
    std::erase_if(out.points, [&](const Point3&) { return drop(rng); });
  }
  return out;
}

/// Statistics of ||s' - s|| / ||s|| over `trials` perturbed copies.
inline SensitivityStats perturbation_sensitivity(const PointCloud3& cloud, const Box3D& box, const SignatureConfig& cfg,
                                                 const PerturbationSpec& spec, std::size_t trials,
                                                 std::size_t jobs = 1) {
  validate(spec);
  const auto base = compute_signature(cloud, box, cfg);
  if (!base) throw ValidationError("base signature is degenerate");
  const double base_norm = std::sqrt(std::inner_product(base->values.begin(), base->values.end(),
                                                        base->values.begin(), 0.0));
  if (base_norm == 0.0) throw ValidationError("base signature has zero norm");

  SensitivityStats stats;
  stats.changes.assign(trials, std::numeric_limits<double>::quiet_NaN());
  parallel_for(trials, jobs, [&](std::size_t t) {
    const auto sig = compute_signature(perturb(cloud, spec, t), box, cfg);
    if (sig) stats.changes[t] = detail::euclidean(sig->values, base->values) / base_norm;
  });

  std::vector<double> valid;
  valid.reserve(trials);
  for (double c : stats.changes) {
    if (std::isnan(c)) {
      ++stats.degenerate_trials;
    } else {
      valid.push_back(c);
    }
  }
  double sum = 0.0;
  for (double c : valid) sum += c;
  stats.mean = valid.empty() ? 0.0 : sum / static_cast<double>(valid.size());
  stats.p99 = percentile(valid, 99.0);
  return stats;
}

// ---------------------------------------------------------------------------
// Embedding / signature-table CSV

/// Boundary between near and far samples, meters.
inline constexpr double kDistanceBucketMeters = 40.0;

inline std::string distance_bucket(std::optional<double> distance) {
  if (!distance) return "";
  return *distance < kDistanceBucketMeters ? "<40" : ">=40";
}

/// Shortest decimal with 9 significant digits, locale independent.
inline std::string format_sig9(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 9);
  return std::string(buf.data(), res.ptr);
}

inline char view_prefix(View v) {
  switch (v) {
    case View::bird: return 'b';
    case View::side: return 's';
    case View::front: return 'f';
  }
  return '?';
}

/// Column names of the value block, e.g. b0,b1,b2,s0,...,f2 for k = 3.
inline std::vector<std::string> signature_columns(std::size_t k,
                                                  const std::array<View, 3>& views = {View::bird, View::side,
                                                                                      View::front}) {
  std::vector<std::string> cols;
  for (View v : views) {
    for (std::size_t j = 0; j < k; ++j) cols.push_back(view_prefix(v) + std::to_string(j));
  }
  return cols;
}

/// One CSV row: label, dist_bucket, values, then any trailing extras.
inline void write_embedding_row(std::ostream& os, std::string_view label, std::string_view bucket,
                                std::span<const double> values, std::span<const std::string> extras = {}) {
  os << label << ',' << bucket;
  for (double v : values) os << ',' << format_sig9(v);
  for (const auto& e : extras) os << ',' << e;
  os << '\n';
}

inline void write_embedding_header(std::ostream& os, std::size_t k,
                                   std::span<const std::string> extras = {},
                                   const std::array<View, 3>& views = {View::bird, View::side, View::front}) {
  os << "label,dist_bucket";
  for (const auto& c : signature_columns(k, views)) os << ',' << c;
  for (const auto& e : extras) os << ',' << e;
  os << '\n';
}

/// Writes header plus one row per sample and returns the number of data rows.
/// Throws IoError carrying the rows already written if the sink fails.
inline std::size_t export_embedding(const LabeledSignatureSet& set, std::ostream& sink,
                                    const std::array<View, 3>& views = {View::bird, View::side, View::front}) {
  validate(set);
  const std::size_t k = set.signatures.empty() ? 3 : set.signatures.front().k;
  write_embedding_header(sink, k, {}, views);
  if (!sink) throw IoError("failed writing embedding header", 0);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto dist = set.distances.empty() ? std::nullopt : set.distances[i];
    write_embedding_row(sink, set.labels[i], distance_bucket(dist), set.signatures[i].values);
    if (!sink) throw IoError("failed writing embedding row " + std::to_string(i), rows);
    ++rows;
  }
  sink.flush();
  if (!sink) throw IoError("failed flushing embedding", rows);
  return rows;
}

}  // namespace shapesig
