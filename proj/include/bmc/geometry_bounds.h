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

// Affine contractions T(z) = z* + A (z - z*) and a check of the residual
// bound ||z - z*|| <= ||z - T(z)|| / (1 - kappa).

#ifndef BMC_GEOMETRY_BOUNDS_H_
#define BMC_GEOMETRY_BOUNDS_H_

#include <cstdint>

#include <Eigen/Dense>

namespace bmc {

class ContractionOperator {
 public:
  // kappa defaults to the spectral norm of A. A larger declared kappa is
  // allowed (it is still a valid rate); a smaller one is rejected.
  ContractionOperator(Eigen::VectorXd fixed_point, Eigen::MatrixXd a);
  ContractionOperator(Eigen::VectorXd fixed_point, Eigen::MatrixXd a, double kappa);

  // A = kappa * I.
  static ContractionOperator scalar(Eigen::VectorXd fixed_point, double kappa);

  // A = U diag(s) V^T with random orthogonal U, V and singular values drawn
  // in [0, kappa], the largest equal to kappa.
  static ContractionOperator random(std::size_t dimension, double kappa, std::uint64_t seed);

  std::size_t dimension() const { return static_cast<std::size_t>(fixed_point_.size()); }
  const Eigen::VectorXd& fixed_point() const { return fixed_point_; }
  const Eigen::MatrixXd& matrix() const { return a_; }
  double kappa() const { return kappa_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& z) const;

 private:
  Eigen::VectorXd fixed_point_;
  Eigen::MatrixXd a_;
  double kappa_;
};

double spectral_norm(const Eigen::MatrixXd& a);

struct BoundPoint {
  double distance = 0.0;  // ||z - z*||
  double residual = 0.0;  // ||z - T(z)||
  double bound = 0.0;     // residual / (1 - kappa)
};

BoundPoint evaluate_bound(const ContractionOperator& op, const Eigen::VectorXd& z);

struct BoundReport {
  std::size_t samples = 0;
  // max over samples of (distance - bound) / max(distance, bound), floored
  // at 0; 0 for a point where both sides vanish.
  double max_violation = 0.0;
  std::size_t violations = 0;  // samples above the tolerance
  double max_gap = 0.0;        // max of (bound - distance) / max(distance, bound)
};

inline constexpr double kBoundTolerance = 1e-9;

// Samples z ~ z* + scale * N(0, I). Throws unless kappa < 1.
BoundReport verify_bound(const ContractionOperator& op, std::size_t samples,
                         std::uint64_t seed, double scale = 1.0);

}  // namespace bmc

#endif  // BMC_GEOMETRY_BOUNDS_H_
