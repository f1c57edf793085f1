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

#include "bmc/schedule.h"

#include <string>

#include "bmc/common.h"

namespace bmc {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  check_arg(!betas_.empty(), "noise schedule needs at least one step");
  alpha_bar_.resize(betas_.size() + 1);
  alpha_bar_[0] = 1.0;
  for (std::size_t t = 1; t <= betas_.size(); ++t) {
    const double beta = betas_[t - 1];
    check_arg(beta >= 0.0 && beta <= 1.0,
              "beta_" + std::to_string(t) + " outside [0, 1]");
    alpha_bar_[t] = alpha_bar_[t - 1] * (1.0 - beta);
  }
  check_arg(alpha_bar_.back() < 1.0, "schedule never masks: alpha_bar_T must be < 1");
}

NoiseSchedule NoiseSchedule::linear(int steps) {
  check_arg(steps >= 1, "schedule steps must be >= 1");
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int t = 1; t <= steps; ++t) {
    betas[static_cast<std::size_t>(t - 1)] = 1.0 / static_cast<double>(steps - t + 1);
  }
  return NoiseSchedule(std::move(betas));
}

double NoiseSchedule::beta(int t) const {
  check_arg(t >= 1 && t <= steps(), "beta index out of range");
  return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
  check_arg(t >= 0 && t <= steps(), "alpha_bar index out of range");
  return alpha_bar_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::reveal_probability(int from, int to) const {
  check_arg(to < from, "reverse step must go backwards in time");
  const double denom = 1.0 - alpha_bar(from);
  if (denom <= 0.0) return 1.0;
  const double p = (alpha_bar(to) - alpha_bar(from)) / denom;
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

int NoiseSchedule::start_step_for_gamma(double gamma) const {
  check_arg(gamma >= 0.0 && gamma <= 1.0, "gamma outside [0, 1]");
  int best = 0;
  for (int t = 0; t <= steps(); ++t) {
    // Slack absorbs rounding in the cumulative product.
    if (alpha_bar_[static_cast<std::size_t>(t)] >= 1.0 - gamma - 1e-12) best = t;
  }
  return best;
}

}  // namespace bmc
