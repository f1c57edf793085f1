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
#include "bmc/reward.h"

namespace bmc {
namespace {

TEST(AnnealTest, EndpointsAndMidpoint) {
  const RewardConfig c;
  EXPECT_EQ(anneal(0, c), 0.5);
  EXPECT_EQ(anneal(c.total_steps, c), 1.0);
  EXPECT_EQ(anneal(500, c), 0.75);
  RewardConfig odd;
  odd.alpha_min = 0.1;
  odd.alpha_max = 0.7;
  odd.total_steps = 7;
  EXPECT_EQ(anneal(7, odd), 0.7);
  EXPECT_EQ(anneal(0, odd), 0.1);
  for (long long t = 1; t <= 7; ++t) EXPECT_GT(anneal(t, odd), anneal(t - 1, odd));
  EXPECT_THROW(anneal(-1, c), Error);
  EXPECT_THROW(anneal(1001, c), Error);
}

TEST(AnnealTest, RejectsBadConfig) {
  RewardConfig c;
  c.alpha_min = 0.9;
  c.alpha_max = 0.5;
  EXPECT_THROW(anneal(0, c), Error);
  c = {};
  c.alpha_min = -0.1;
  EXPECT_THROW(anneal(0, c), Error);
  c = {};
  c.total_steps = 0;
  EXPECT_THROW(anneal(0, c), Error);
}

TEST(GatedRewardTest, Examples) {
  const AnswerExtractor ex;
  const RewardConfig c;
  EXPECT_EQ(gated_reward("a = 9 ; ANSWER 8", "9", ex, 0.99, 0, c), 0.0);
  EXPECT_EQ(gated_reward("a = 9 ; ANSWER 9", "9", ex, 0.0, 0, c), 1.5);
  EXPECT_EQ(gated_reward("a = 9 ; ANSWER 9", "9", ex, 0.0, 1000, c), 1.5);
  EXPECT_EQ(gated_reward("a = 9 ; ANSWER 9", "9", ex, 0.5, 1000, c), 2.0);
  // Gold given as a full chain is extracted too.
  EXPECT_EQ(gated_reward("#### 9.0", "c = 9 ; ANSWER 9", ex, 0.5, 1000, c), 2.0);
  EXPECT_EQ(gated_reward("no answer here", "9", ex, 1.0, 0, c), 0.0);
  EXPECT_THROW(gated_reward("ANSWER 9", "9", ex, 1.5, 0, c), Error);
  EXPECT_THROW(gated_reward("ANSWER 9", "9", ex, -0.1, 0, c), Error);
}

TEST(GatedRewardTest, HierarchyRangeAndMonotonicity) {
  const AnswerExtractor ex;
  const RewardConfig c;
  for (long long t = 0; t <= c.total_steps; t += 50) {
    double prev = -1.0;
    for (int k = 0; k <= 100; ++k) {
      const double s = k / 100.0;
      const double right = gated_reward("ANSWER 12", "12", ex, s, t, c);
      const double wrong = gated_reward("ANSWER 13", "12", ex, s, t, c);
      EXPECT_EQ(wrong, 0.0);
      EXPECT_GE(right, 1.5);
      EXPECT_LE(right, 2.5);
      EXPECT_GT(right, prev);
      prev = right;
    }
  }
}

}  // namespace
}  // namespace bmc
