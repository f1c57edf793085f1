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

#ifndef BMC_SCHEDULE_H_
#define BMC_SCHEDULE_H_

#include <vector>

namespace bmc {

// Per-step mask probabilities beta_t (t = 1..T) and the cumulative signal
// alpha_bar_t = prod_{s<=t} (1 - beta_s), with alpha_bar_0 = 1.
class NoiseSchedule {
 public:
  // betas[t-1] is beta_t. Requires every beta in [0, 1] and alpha_bar_T < 1.
  explicit NoiseSchedule(std::vector<double> betas);

  // alpha_bar_t = 1 - t/T, realized through beta_t = 1/(T - t + 1).
  static NoiseSchedule linear(int steps);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;
  double alpha_bar(int t) const;

  // Probability that a position masked at `from` is revealed by `to`
  // under the forward posterior: (abar_to - abar_from) / (1 - abar_from).
  double reveal_probability(int from, int to) const;

  // Largest t with alpha_bar_t >= 1 - gamma: the step whose forward
  // marginal masks a fraction gamma of the tokens in expectation.
  int start_step_for_gamma(double gamma) const;

 private:
  std::vector<double> betas_;      // index t-1
  std::vector<double> alpha_bar_;  // index t, size T+1
};

}  // namespace bmc

#endif  // BMC_SCHEDULE_H_
