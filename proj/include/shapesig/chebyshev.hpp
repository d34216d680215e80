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

// First-kind Chebyshev polynomials and discrete Chebyshev-Gauss fitting.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "shapesig/error.hpp"

namespace shapesig {

/// Slack allowed beyond [-1, 1] for arguments produced by rounding.
inline constexpr double kChebDomainSlack = 1e-12;

/// T_n(x) by the three-term recurrence T_{n+1} = 2x T_n - T_{n-1}.
inline double cheb_eval(int n, double x) {
  if (n < 0) throw DomainError("Chebyshev index must be non-negative, got " + std::to_string(n));
  if (!(std::abs(x) <= 1.0 + kChebDomainSlack)) throw DomainError("Chebyshev argument outside [-1, 1]");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int i = 1; i < n; ++i) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Chebyshev-Gauss nodes x_n = cos(pi (n + 1/2) / (N + 1)), n = 0..N.
inline std::vector<double> cheb_nodes(std::size_t degree) {
  const double m = static_cast<double>(degree + 1);
  std::vector<double> x(degree + 1);
  for (std::size_t n = 0; n <= degree; ++n) {
    x[n] = std::cos(std::numbers::pi * (static_cast<double>(n) + 0.5) / m);
  }
  return x;
}

/// Affine map between an angle interval [lo, hi) and the Chebyshev interval.
struct AngleDomain {
  double lo = 0.0;
  double hi = 2.0 * std::numbers::pi;

  double to_unit(double theta) const { return (2.0 * theta - (lo + hi)) / (hi - lo); }
  double from_unit(double x) const { return 0.5 * ((hi - lo) * x + (lo + hi)); }

  friend bool operator==(const AngleDomain&, const AngleDomain&) = default;
};

struct ChebyshevFit {
  std::vector<double> coefficients;  ///< alpha_0 .. alpha_N
  AngleDomain domain{};

  std::size_t degree() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }
};

struct FitConfig {
  std::size_t degree = 179;  ///< N; the fit uses N + 1 nodes
  std::size_t k = 3;         ///< coefficients kept per view

  friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

inline void validate(const FitConfig& cfg) {
  if (cfg.k < 1) throw ValidationError("fit must keep at least one coefficient");
  if (cfg.degree + 1 < cfg.k) throw ValidationError("fit degree must be at least k - 1");
}

namespace detail {

// Shared by the full fit and the leading-terms shortcut so both produce
// bit-identical coefficients.
inline std::vector<double> cheb_project(std::span<const double> values, std::size_t degree,
                                        std::size_t n_terms) {
  if (values.size() != degree + 1) {
    throw ValidationError("expected " + std::to_string(degree + 1) + " samples, got " +
                          std::to_string(values.size()));
  }
  for (double f : values) {
    if (!std::isfinite(f)) throw ValidationError("non-finite sample in Chebyshev fit");
  }
  const auto nodes = cheb_nodes(degree);
  std::vector<double> alpha(n_terms, 0.0);
  for (std::size_t n = 0; n <= degree; ++n) {
    const double x = nodes[n];
    const double f = values[n];
    double prev = 1.0;
    double cur = x;
    if (n_terms > 0) alpha[0] += f;
    if (n_terms > 1) alpha[1] += f * x;
    for (std::size_t j = 2; j < n_terms; ++j) {
      const double next = 2.0 * x * cur - prev;
      prev = cur;
      cur = next;
      alpha[j] += f * cur;
    }
  }
  const double m = static_cast<double>(degree + 1);
  for (std::size_t j = 0; j < n_terms; ++j) alpha[j] *= (j == 0 ? 1.0 : 2.0) / m;
  return alpha;
}

}  // namespace detail

/// Coefficients from samples taken at cheb_nodes(degree):
///   alpha_0 = 1/(N+1) sum f(x_n),  alpha_j = 2/(N+1) sum f(x_n) T_j(x_n).
inline ChebyshevFit cheb_fit(std::span<const double> values, std::size_t degree) {
  return ChebyshevFit{detail::cheb_project(values, degree, degree + 1), {}};
}

/// Same numbers as truncate(cheb_fit(values, degree), k) without computing
/// the discarded tail.
inline std::vector<double> cheb_leading(std::span<const double> values, std::size_t degree, std::size_t k) {
  if (k > degree + 1) throw ValidationError("cannot keep more coefficients than the fit has");
  return detail::cheb_project(values, degree, k);
}

/// Sum of alpha_n T_n(x) by Clenshaw's recurrence.
inline double cheb_reconstruct(const ChebyshevFit& fit, double x) {
  if (!(std::abs(x) <= 1.0 + kChebDomainSlack)) throw DomainError("Chebyshev argument outside [-1, 1]");
  const auto& a = fit.coefficients;
  if (a.empty()) return 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t j = a.size() - 1; j >= 1; --j) {
    const double b0 = 2.0 * x * b1 - b2 + a[j];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + a[0];
}

/// First `k` coefficients in index order.
inline std::vector<double> truncate(const ChebyshevFit& fit, std::size_t k) {
  if (k > fit.coefficients.size()) {
    throw ValidationError("cannot keep " + std::to_string(k) + " of " +
                          std::to_string(fit.coefficients.size()) + " coefficients");
  }
  return {fit.coefficients.begin(), fit.coefficients.begin() + static_cast<std::ptrdiff_t>(k)};
}

}  // namespace shapesig
