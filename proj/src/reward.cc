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

#include "bmc/reward.h"

#include <cmath>

#include "bmc/common.h"

namespace bmc {

void RewardConfig::validate() const {
  check_arg(std::isfinite(r_base), "reward: r_base must be finite");
  check_arg(alpha_min >= 0.0 && alpha_min <= alpha_max && std::isfinite(alpha_max),
            "reward: need 0 <= alpha_min <= alpha_max");
  check_arg(total_steps >= 1, "reward: total_steps must be >= 1");
}

double anneal(long long step, const RewardConfig& config) {
  config.validate();
  check_arg(step >= 0 && step <= config.total_steps, "anneal: step outside [0, total_steps]");
  if (step == config.total_steps) return config.alpha_max;
  return config.alpha_min + (config.alpha_max - config.alpha_min) *
                                static_cast<double>(step) /
                                static_cast<double>(config.total_steps);
}

double gated_reward(std::string_view candidate, std::string_view gold,
                    const AnswerExtractor& extractor, double s, long long step,
                    const RewardConfig& config) {
  check_arg(s >= 0.0 && s <= 1.0, "gated_reward: composite must lie in [0, 1]");
  const double alpha = anneal(step, config);

  const Extraction got = extractor.extract(candidate);
  if (!got.answer) return 0.0;
  const Extraction want = extractor.extract(gold);
  // A bare gold value is compared as written when it is not itself a
  // recognizable answer.
  const std::string expected = want.answer ? *want.answer : std::string(gold);
  if (*got.answer != expected) return 0.0;
  return config.r_base + alpha * s;
}

}  // namespace bmc
