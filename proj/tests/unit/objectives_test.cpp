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

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "shapesig/objectives.hpp"

namespace shapesig {
namespace {

using testing::central_difference;
using testing::relative_error;

constexpr double kGradTol = 1e-4;

TEST(FocalLoss, Examples) {
  EXPECT_EQ(focal_loss(1.0).value, 0.0);
  EXPECT_NEAR(focal_loss(0.5).value, 0.0433217, 1e-6);
  EXPECT_NEAR(focal_loss(0.5).value, 0.0625 * std::log(2.0), 1e-15);
  EXPECT_NEAR(focal_loss(0.1, {1.0, 0.0}).value, 2.302585, 1e-6);
}

TEST(FocalLoss, GradientAtOne) {
  EXPECT_EQ(focal_loss(1.0).grad, 0.0);
  EXPECT_EQ(focal_loss(1.0, {0.5, 0.0}).grad, -0.5);
}

TEST(FocalLoss, DomainAndClamp) {
  EXPECT_THROW(focal_loss(0.0), DomainError);
  EXPECT_THROW(focal_loss(-0.1), DomainError);
  EXPECT_THROW(focal_loss(1.5), DomainError);
  EXPECT_THROW(focal_loss(NAN), DomainError);
  EXPECT_EQ(focal_loss(0.0, {}, true).value, focal_loss(kFocalClamp).value);
  EXPECT_EQ(focal_loss(-3.0, {}, true).value, focal_loss(kFocalClamp).value);
  EXPECT_THROW(focal_loss(0.5, {0.0, 2.0}), ValidationError);
  EXPECT_THROW(focal_loss(0.5, {0.25, -1.0}), ValidationError);
}

TEST(SmoothL1, Examples) {
  EXPECT_EQ(smooth_l1(0.0).value, 0.0);
  EXPECT_EQ(smooth_l1(0.5).value, 0.125);
  EXPECT_EQ(smooth_l1(2.0).value, 1.5);
  EXPECT_EQ(smooth_l1(-2.0).value, 1.5);
  EXPECT_EQ(smooth_l1(-2.0).grad, -1.0);
  EXPECT_EQ(smooth_l1(0.3).grad, 0.3);
}

TEST(LocalizationLoss, Examples) {
  EXPECT_EQ(localization_loss(std::vector<double>(7, 0.0)), 0.0);
  EXPECT_EQ(localization_loss(std::vector<double>{0.5, 0, 0, 0, 0, 0, 0}), 0.125);
  EXPECT_EQ(localization_loss(std::vector<double>{2, 2, 0, 0, 0, 0, 0}), 3.0);
  EXPECT_THROW(localization_loss(std::vector<double>(6, 0.0)), ValidationError);
  EXPECT_THROW(localization_loss_grad(std::vector<double>(8, 0.0)), ValidationError);
}

TEST(ShapeLoss, Examples) {
  const Signature t{std::vector<double>(9, 1.0), 3};
  EXPECT_EQ(shape_loss(t, t), 0.0);
  Signature p = t;
  p.values[0] += 1.0;
  EXPECT_EQ(shape_loss(p, t), 0.5);
  for (auto& v : p.values) v = 1.2;
  EXPECT_NEAR(shape_loss(p, t), 0.18, 1e-15);
  EXPECT_NEAR(shape_loss(p, t, ShapeReduction::mean), 0.02, 1e-15);
  EXPECT_THROW(shape_loss(std::vector<double>(9), std::vector<double>(6)), ValidationError);
}

TEST(TotalLoss, Examples) {
  EXPECT_EQ(total_loss(1, 2, 4), 5.0);
  EXPECT_EQ(total_loss(0, 0, 0), 0.0);
  EXPECT_EQ(total_loss(3, 5, 7, {0, 0, 1}), 7.0);
  EXPECT_THROW(total_loss(1, 1, 1, {-1, 1, 1}), ValidationError);
}

TEST(LossProperty, FocalGradientMatchesFiniteDifference) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> p(0.01, 0.99), a(0.05, 1.0), g(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const FocalParams params{a(rng), g(rng)};
    const double x = p(rng);
    const double fd = central_difference([&](double v) { return focal_loss(v, params).value; }, x);
    EXPECT_LT(relative_error(focal_loss(x, params).grad, fd), kGradTol) << x;
  }
}

TEST(LossProperty, SmoothL1GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    double v = x(rng);
    if (std::abs(std::abs(v) - 1.0) < 1e-3) v += 0.01;
    const double fd = central_difference([](double u) { return smooth_l1(u).value; }, v);
    EXPECT_LT(relative_error(smooth_l1(v).grad, fd), kGradTol) << v;
  }
}

TEST(LossProperty, VectorGradientsMatchFiniteDifference) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> r(7), pred(9), target(9);
    for (auto& v : r) v = x(rng);
    for (auto& v : pred) v = x(rng);
    for (auto& v : target) v = x(rng);
    const auto gl = localization_loss_grad(r);
    const std::size_t j = static_cast<std::size_t>(i) % 7;
    if (std::abs(std::abs(r[j]) - 1.0) < 1e-3) continue;
    auto rl = r;
    const double fd_l = central_difference([&](double u) { rl[j] = u; return localization_loss(rl); }, r[j]);
    EXPECT_LT(relative_error(gl[j], fd_l), kGradTol);

    for (auto red : {ShapeReduction::sum, ShapeReduction::mean}) {
      const auto gs = shape_loss_grad(pred, target, red);
      const std::size_t m = static_cast<std::size_t>(i) % 9;
      if (std::abs(std::abs(pred[m] - target[m]) - 1.0) < 1e-3) continue;
      auto ps = pred;
      const double fd_s =
          central_difference([&](double u) { ps[m] = u; return shape_loss(ps, target, red); }, pred[m]);
      EXPECT_LT(relative_error(gs[m], fd_s), kGradTol);
    }

    const double c = std::abs(x(rng)), l = std::abs(x(rng)), s = std::abs(x(rng));
    const double fd_t = central_difference([&](double u) { return total_loss(c, l, u); }, s);
    EXPECT_LT(relative_error(0.5, fd_t), kGradTol);
  }
}

TEST(LossProperty, SmoothL1ContinuousAtBranch) {
  for (double side : {1.0, -1.0}) {
    const double below = std::nextafter(side, 0.0);
    EXPECT_NEAR(smooth_l1(below).value, smooth_l1(side).value, 1e-12);
    EXPECT_NEAR(smooth_l1(below).grad, smooth_l1(side).grad, 1e-12);
  }
}

TEST(LossProperty, FocalMonotoneDecreasing) {
  for (const FocalParams params : {FocalParams{}, FocalParams{1.0, 0.0}, FocalParams{0.5, 4.5}}) {
    double prev = focal_loss(1e-6, params).value;
    for (int i = 1; i <= 1000; ++i) {
      const double v = focal_loss(i / 1000.0, params).value;
      EXPECT_LE(v, prev);
      prev = v;
    }
  }
}

TEST(LossProperty, TotalLinearInEachComponent) {
  const LossWeights w{0.7, 1.3, 0.5};
  const std::array<double, 3> base{1.0, 2.0, 3.0};
  for (std::size_t c = 0; c < 3; ++c) {
    auto at = [&](double v) {
      auto x = base;
      x[c] = v;
      return total_loss(x[0], x[1], x[2], w);
    };
    EXPECT_NEAR(at(5.0) - at(2.0), 3.0 * (at(1.0) - at(0.0)), 1e-12);
  }
}

}  // namespace
}  // namespace shapesig
