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

// Multi-task loss arithmetic: focal classification loss, smooth-L1
// localization and shape regression, and their weighted sum. Every term is
// a per-element scalar; batching and averaging belong to the caller.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shapesig/error.hpp"
#include "shapesig/signature.hpp"

namespace shapesig {

struct LossGrad {
  double value = 0.0;
  double grad = 0.0;  ///< derivative with respect to the single input
};

struct FocalParams {
  double alpha_t = 0.25;
  double gamma = 2.0;
};

inline void validate(const FocalParams& p) {
  if (!(p.alpha_t > 0.0 && p.alpha_t <= 1.0)) throw ValidationError("focal alpha_t must lie in (0, 1]");
  if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) throw ValidationError("focal gamma must be >= 0");
}

/// Smallest probability accepted when the caller opts into clamping.
inline constexpr double kFocalClamp = 1e-7;

/// -alpha_t (1 - p)^gamma ln(p) and its derivative in p.
inline LossGrad focal_loss(double p_t, const FocalParams& params = {}, bool clamp = false) {
  validate(params);
  if (clamp && p_t < kFocalClamp) p_t = kFocalClamp;
  if (!(p_t > 0.0 && p_t <= 1.0)) throw DomainError("focal loss needs p_t in (0, 1]");

  const double a = params.alpha_t;
  const double g = params.gamma;
  const double q = 1.0 - p_t;
  const double log_p = std::log(p_t);
  const double value = -a * std::pow(q, g) * log_p;

  double grad;
  if (q == 0.0) {
    // (1-p)^(g-1) ln p -> 0 as p -> 1 for every g >= 0.
    grad = g == 0.0 ? -a : 0.0;
  } else {
    grad = a * (g * std::pow(q, g - 1.0) * log_p - std::pow(q, g) / p_t);
  }
  return {value, grad};
}

/// 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
inline LossGrad smooth_l1(double x) {
  const double ax = std::abs(x);
  if (ax < 1.0) return {0.5 * x * x, x};
  return {ax - 0.5, x > 0.0 ? 1.0 : -1.0};
}

/// Residual order: x, y, z, w, h, l, theta.
inline constexpr std::size_t kBoxResiduals = 7;

inline double localization_loss(std::span<const double> residuals) {
  if (residuals.size() != kBoxResiduals) {
    throw ValidationError("localization loss expects 7 residuals, got " + std::to_string(residuals.size()));
  }
  double sum = 0.0;
  for (double r : residuals) sum += smooth_l1(r).value;
  return sum;
}

inline std::vector<double> localization_loss_grad(std::span<const double> residuals) {
  if (residuals.size() != kBoxResiduals) throw ValidationError("localization loss expects 7 residuals");
  std::vector<double> g;
  g.reserve(residuals.size());
  for (double r : residuals) g.push_back(smooth_l1(r).grad);
  return g;
}

/// How the per-component shape terms are combined.
enum class ShapeReduction { sum, mean };

inline double shape_loss(std::span<const double> pred, std::span<const double> target,
                         ShapeReduction reduction = ShapeReduction::sum) {
  if (pred.size() != target.size()) throw ValidationError("shape loss operands differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += smooth_l1(pred[i] - target[i]).value;
  if (reduction == ShapeReduction::mean && !pred.empty()) sum /= static_cast<double>(pred.size());
  return sum;
}

inline double shape_loss(const Signature& pred, const Signature& target,
                         ShapeReduction reduction = ShapeReduction::sum) {
  return shape_loss(pred.values, target.values, reduction);
}

/// Gradient of shape_loss with respect to `pred`.
inline std::vector<double> shape_loss_grad(std::span<const double> pred, std::span<const double> target,
                                           ShapeReduction reduction = ShapeReduction::sum) {
  if (pred.size() != target.size()) throw ValidationError("shape loss operands differ in length");
  const double scale =
      reduction == ShapeReduction::mean && !pred.empty() ? 1.0 / static_cast<double>(pred.size()) : 1.0;
  std::vector<double> g;
  g.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) g.push_back(scale * smooth_l1(pred[i] - target[i]).grad);
  return g;
}

struct LossWeights {
  double cls = 1.0;
  double loc = 1.0;
  double shape = 0.5;
};

inline double total_loss(double cls, double loc, double shape, const LossWeights& w = {}) {
  if (w.cls < 0.0 || w.loc < 0.0 || w.shape < 0.0) throw ValidationError("loss weights must be non-negative");
  return w.cls * cls + w.loc * loc + w.shape * shape;
}

}  // namespace shapesig
