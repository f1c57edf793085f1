/*
 * Copyright 2026 The BMC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "bmc/common.h"
#include "bmc/geometry_bounds.h"

namespace bmc {
namespace {

TEST(ContractionTest, SpectralNorm) {
  Eigen::MatrixXd a(2, 2);
  a << 3, 0, 0, -4;
  EXPECT_NEAR(spectral_norm(a), 4.0, 1e-12);
  a << 1, 1, 0, 0;
  EXPECT_NEAR(spectral_norm(a), std::sqrt(2.0), 1e-12);
}

TEST(ContractionTest, RandomOperatorHasRequestedRate) {
  for (double kappa : {0.0, 0.25, 0.5, 0.9}) {
    const auto op = ContractionOperator::random(6, kappa, 17);
    EXPECT_NEAR(spectral_norm(op.matrix()), kappa, 1e-12);
    EXPECT_EQ(op.kappa(), kappa);
    EXPECT_EQ(op.apply(op.fixed_point()), op.fixed_point());
  }
}

TEST(ContractionTest, DeclaredKappaBelowNormIsRejected) {
  const Eigen::MatrixXd a = 0.5 * Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(ContractionOperator(Eigen::VectorXd::Zero(3), a, 0.4), Error);
  EXPECT_NO_THROW(ContractionOperator(Eigen::VectorXd::Zero(3), a, 0.6));
  EXPECT_THROW(ContractionOperator(Eigen::VectorXd::Zero(2), a), Error);
}

TEST(BoundTest, ScalarContractionIsTight) {
  Eigen::VectorXd z_star(3);
  z_star << 1, -2, 0.5;
  for (double kappa : {0.0, 0.25, 0.5, 0.9}) {
    const auto op = ContractionOperator::scalar(z_star, kappa);
    const auto r = verify_bound(op, 2000, 3);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_LE(r.max_gap, 1e-9) << kappa;
  }
}

TEST(BoundTest, RandomOperatorsNeverViolate) {
  for (double kappa : {0.0, 0.25, 0.5, 0.9}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto op = ContractionOperator::random(8, kappa, seed);
      const auto r = verify_bound(op, 2000, seed + 100, 3.0);
      EXPECT_EQ(r.samples, 2000u);
      EXPECT_EQ(r.violations, 0u);
      EXPECT_LE(r.max_violation, kBoundTolerance);
    }
  }
}

TEST(BoundTest, BrokenRateIsDetected) {
  // Claims kappa 0.5 for an operator that only contracts by 0.9.
  const Eigen::MatrixXd a = 0.9 * Eigen::MatrixXd::Identity(2, 2);
  const ContractionOperator honest(Eigen::VectorXd::Zero(2), a);
  const auto p = evaluate_bound(honest, Eigen::VectorXd::Ones(2));
  EXPECT_NEAR(p.distance, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(p.residual, 0.1 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(p.bound, std::sqrt(2.0), 1e-12);
  // Bound with a too-small kappa is violated for every point.
  const double loose = p.residual / (1.0 - 0.5);
  EXPECT_LT(loose, p.distance);
}

TEST(BoundTest, RequiresContraction) {
  const auto op = ContractionOperator::scalar(Eigen::VectorXd::Zero(2), 1.0);
  EXPECT_THROW(verify_bound(op, 10, 0), Error);
}

}  // namespace
}  // namespace bmc
