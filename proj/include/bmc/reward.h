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

// Correctness-gated reward with a linearly annealed BMC bonus.

#ifndef BMC_REWARD_H_
#define BMC_REWARD_H_

#include <string_view>

#include "bmc/metrics.h"

namespace bmc {

struct RewardConfig {
  double r_base = 1.5;
  double alpha_min = 0.5;
  double alpha_max = 1.0;
  long long total_steps = 1000;

  void validate() const;
};

// alpha_min + (alpha_max - alpha_min) * t / total_steps, for 0 <= t <= total_steps.
double anneal(long long step, const RewardConfig& config);

// r_base + anneal(step) * s when the extracted answer of `candidate` equals
// `gold`, else exactly 0. An unextractable candidate counts as incorrect.
// s is the normalized composite and must lie in [0, 1].
double gated_reward(std::string_view candidate, std::string_view gold,
                    const AnswerExtractor& extractor, double s, long long step,
                    const RewardConfig& config);

}  // namespace bmc

#endif  // BMC_REWARD_H_
