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

#include "bmc/geometry_bounds.h"

#include <algorithm>
#include <cmath>

#include "bmc/common.h"

namespace bmc {

namespace {

Eigen::VectorXd gaussian_vector(std::size_t d, Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

Eigen::MatrixXd random_orthogonal(std::size_t d, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) g.col(j) = gaussian_vector(d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

// Relative difference that is 0 when both sides are 0.
double relative(double excess, double a, double b) {
  const double scale = std::max(a, b);
  return scale > 0.0 ? excess / scale : 0.0;
}

}  // namespace

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()[0];
}

ContractionOperator::ContractionOperator(Eigen::VectorXd fixed_point, Eigen::MatrixXd a)
    : fixed_point_(std::move(fixed_point)), a_(std::move(a)), kappa_(0.0) {
  check_arg(fixed_point_.size() >= 1, "contraction: dimension must be >= 1");
  check_arg(a_.rows() == fixed_point_.size() && a_.cols() == fixed_point_.size(),
            "contraction: A must be d x d");
  kappa_ = spectral_norm(a_);
}

ContractionOperator::ContractionOperator(Eigen::VectorXd fixed_point, Eigen::MatrixXd a,
                                         double kappa)
    : ContractionOperator(std::move(fixed_point), std::move(a)) {
  check_arg(std::isfinite(kappa) && kappa >= 0.0, "contraction: kappa must be non-negative");
  // Slack for the SVD's rounding.
  check_arg(kappa_ <= kappa * (1.0 + 1e-12) + 1e-15,
            "contraction: declared kappa is below the spectral norm of A");
  kappa_ = kappa;
}

ContractionOperator ContractionOperator::scalar(Eigen::VectorXd fixed_point, double kappa) {
  const auto d = fixed_point.size();
  Eigen::MatrixXd a = kappa * Eigen::MatrixXd::Identity(d, d);
  return ContractionOperator(std::move(fixed_point), std::move(a), kappa);
}

ContractionOperator ContractionOperator::random(std::size_t dimension, double kappa,
                                                std::uint64_t seed) {
  check_arg(dimension >= 1, "contraction: dimension must be >= 1");
  check_arg(kappa >= 0.0, "contraction: kappa must be non-negative");
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(dimension);
  Eigen::VectorXd s(n);
  s[0] = kappa;
  for (Eigen::Index i = 1; i < n; ++i) s[i] = kappa * rng.uniform();
  const Eigen::MatrixXd u = random_orthogonal(dimension, rng);
  const Eigen::MatrixXd v = random_orthogonal(dimension, rng);
  Eigen::VectorXd center = gaussian_vector(dimension, rng);
  Eigen::MatrixXd a = u * s.asDiagonal() * v.transpose();
  return ContractionOperator(std::move(center), std::move(a), kappa);
}

Eigen::VectorXd ContractionOperator::apply(const Eigen::VectorXd& z) const {
  check_arg(z.size() == fixed_point_.size(), "contraction: dimension mismatch");
  return fixed_point_ + a_ * (z - fixed_point_);
}

BoundPoint evaluate_bound(const ContractionOperator& op, const Eigen::VectorXd& z) {
  check_arg(op.kappa() < 1.0, "bound: kappa must be < 1");
  BoundPoint p;
  p.distance = (z - op.fixed_point()).norm();
  p.residual = (z - op.apply(z)).norm();
  p.bound = p.residual / (1.0 - op.kappa());
  return p;
}

BoundReport verify_bound(const ContractionOperator& op, std::size_t samples,
                         std::uint64_t seed, double scale) {
  check_arg(op.kappa() < 1.0, "verify_bound: kappa must be < 1");
  check_arg(samples >= 1, "verify_bound: need at least one sample");
  Rng rng(seed);
  BoundReport report;
  report.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::VectorXd z = op.fixed_point() + scale * gaussian_vector(op.dimension(), rng);
    const BoundPoint p = evaluate_bound(op, z);
    const double over = relative(p.distance - p.bound, p.distance, p.bound);
    report.max_violation = std::max(report.max_violation, over);
    report.max_gap = std::max(report.max_gap, -over);
    if (over > kBoundTolerance) ++report.violations;
  }
  return report;
}

}  // namespace bmc
