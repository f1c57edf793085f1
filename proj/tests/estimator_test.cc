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

#include <cmath>

#include <gtest/gtest.h>

#include "bmc/common.h"
#include "bmc/estimator.h"
#include "bmc/evaluation.h"
#include "oracles.h"

namespace bmc {
namespace {

class EstimatorTest : public ::testing::Test {
 protected:
  Vocabulary vocab{{"1", "2", "3"}};
  MetricSuite metrics{vocab};
  OracleDenoiser oracle = oracle::tiny_oracle();
};

TEST_F(EstimatorTest, GammaZeroIsIdentity) {
  BmcConfig c;
  c.gamma = 0.0;
  const auto r = bmc_score(TokenSequence{0, 1, 2}, {}, oracle, metrics, c);
  EXPECT_NEAR(r.mean_composite, 1.0, 1e-15);
  EXPECT_EQ(r.reconstruction_steps, 0);
  for (const auto& rep : r.repetitions) EXPECT_EQ(rep.reconstruction, (TokenSequence{0, 1, 2}));
}

TEST_F(EstimatorTest, PerfectAttractorScoresOne) {
  const TokenSequence x0 = {2, 0, 1, 1, 0, 2, 2, 1, 0, 0};
  OracleDenoiser point(3, {{x0, 1.0}});
  for (double gamma : {0.5, 0.9, 1.0}) {
    BmcConfig c;
    c.gamma = gamma;
    c.seed = 7;
    const auto r = bmc_score(x0, {}, point, metrics, c);
    // Number retention divides by count + epsilon.
    EXPECT_NEAR(r.mean_composite, 1.0, 1e-9) << gamma;
  }
}

TEST_F(EstimatorTest, DeterministicAndMeanOfRepetitions) {
  BmcConfig c;
  c.seed = 11;
  c.n_ensemble = 6;
  c.steps_k = 2;
  c.schedule_steps = 4;
  const TokenSequence x0 = {0, 1, 2};
  const auto a = bmc_score(x0, {}, oracle, metrics, c);
  c.workers = 4;
  const auto b = bmc_score(x0, {}, oracle, metrics, c);
  ASSERT_EQ(a.repetitions.size(), 6u);
  double sum = 0.0;
  for (std::size_t r = 0; r < 6; ++r) {
    EXPECT_EQ(a.repetitions[r].reconstruction, b.repetitions[r].reconstruction);
    EXPECT_EQ(a.repetitions[r].score.composite, b.repetitions[r].score.composite);
    sum += a.repetitions[r].score.composite;
  }
  EXPECT_DOUBLE_EQ(a.mean_composite, sum / 6.0);
  EXPECT_EQ(a.reconstruction_steps, 6 * 2);
}

TEST_F(EstimatorTest, EmptyMaskIsRetriedThenFails) {
  BmcConfig c;
  c.gamma = 0.01;
  c.n_ensemble = 40;
  const TokenSequence x0 = {0, 1, 2};
  // With 3 positions at gamma 0.01 the mask is almost always empty, so some
  // repetition fails its retry too.
  EXPECT_THROW(bmc_score(x0, {}, oracle, metrics, c), Error);
  try {
    bmc_score(x0, {}, oracle, metrics, c);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
  // Low gamma on a long sequence: some repetitions need the retry and pass.
  Vocabulary big({"a"});
  MetricSuite m(big);
  const auto uni = TableDenoiser::uniform(1);
  BmcConfig d;
  d.gamma = 0.05;
  d.n_ensemble = 50;
  const auto r = bmc_score(TokenSequence(60, 0), {}, uni, m, d);
  int retried = 0;
  for (const auto& rep : r.repetitions) {
    retried += rep.retried;
    EXPECT_GT(rep.pattern.masked_count(), 0u);
  }
  EXPECT_GT(retried, 0);
}

TEST_F(EstimatorTest, RejectsBadInput) {
  BmcConfig c;
  EXPECT_THROW(bmc_score(TokenSequence{}, {}, oracle, metrics, c), Error);
  EXPECT_THROW(bmc_score(TokenSequence{0, 3}, {}, oracle, metrics, c), Error);
  c.gamma = 1.5;
  EXPECT_THROW(bmc_score(TokenSequence{0, 1}, {}, oracle, metrics, c), Error);
  c = {};
  c.steps_k = 0;
  EXPECT_THROW(bmc_score(TokenSequence{0, 1}, {}, oracle, metrics, c), Error);
  c = {};
  c.n_ensemble = 0;
  EXPECT_THROW(bmc_score(TokenSequence{0, 1}, {}, oracle, metrics, c), Error);
}

TEST_F(EstimatorTest, EnsembleReducesVariance) {
  const TokenSequence x0 = {0, 1, 2};
  auto variance = [&](int n) {
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 200; ++s) {
      BmcConfig c;
      c.n_ensemble = n;
      c.seed = s;
      c.steps_k = 2;
      c.schedule_steps = 4;
      c.gamma = 0.7;
      v.push_back(bmc_score(x0, {}, oracle, metrics, c).mean_composite);
    }
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x / v.size();
    for (double x : v) var += (x - mean) * (x - mean) / (v.size() - 1);
    return var;
  };
  EXPECT_LT(variance(4), variance(1));
}

TEST(KlTest, CertainDenoiserGivesZero) {
  const TokenSequence x0 = {1, 0, 1};
  const auto d = TableDenoiser::deterministic(2, x0);
  const auto s = NoiseSchedule::linear(4);
  EXPECT_EQ(bmc_kl_exact(x0, {}, d, s).value, 0.0);
  EXPECT_EQ(bmc_kl_sampled(x0, {}, d, s, 100, 1).value, 0.0);
}

TEST(KlTest, SingleTokenClosedForm) {
  const TableDenoiser d(2, {{0.3, 0.7}});
  const auto s = NoiseSchedule::linear(1);
  EXPECT_DOUBLE_EQ(bmc_kl_exact(TokenSequence{1}, {}, d, s).value, std::log(0.7));
  EXPECT_DOUBLE_EQ(bmc_kl_exact(TokenSequence{0}, {}, d, s).value, std::log(0.3));
}

TEST(KlTest, ExactMatchesBruteForce) {
  const auto o = oracle::tiny_oracle();
  for (int T : {1, 2, 3, 4}) {
    const auto s = NoiseSchedule::linear(T);
    for (const TokenSequence& x0 : {TokenSequence{0, 1, 2}, TokenSequence{2, 2, 0}}) {
      EXPECT_NEAR(bmc_kl_exact(x0, {}, o, s).value, oracle::kl_linear(o, x0, T), 1e-9);
    }
  }
}

TEST(KlTest, SampledConvergesToExact) {
  const auto o = oracle::tiny_oracle();
  const auto s = NoiseSchedule::linear(4);
  const TokenSequence x0 = {1, 1, 2};
  const double exact = bmc_kl_exact(x0, {}, o, s).value;
  const auto est = bmc_kl_sampled(x0, {}, o, s, 100000, 3);
  EXPECT_EQ(est.samples, 100000u);
  EXPECT_GT(est.standard_error, 0.0);
  EXPECT_LT(std::fabs(est.value - exact), 3.0 * est.standard_error);
}

TEST(KlTest, Limits) {
  const auto uni = TableDenoiser::uniform(2);
  const auto s = NoiseSchedule::linear(2);
  EXPECT_THROW(bmc_kl_exact(TokenSequence(kMaxExactKlLength + 1, 0), {}, uni, s), Error);
  EXPECT_THROW(bmc_kl_exact(TokenSequence{}, {}, uni, s), Error);
  EXPECT_THROW(bmc_kl_sampled(TokenSequence{0}, {}, uni, s, 1, 0), Error);
}

// With everything masked and one reverse step, the reconstruction draws each
// position from the same distributions the one-step likelihood reads, so
// token accuracy and the likelihood rank sequences alike. Checked on a
// dependent joint, a random joint and a product joint.
TEST_F(EstimatorTest, KlAndTokenAccuracyRankAgree) {
  Weights tok{};
  tok.lambda[static_cast<std::size_t>(Component::kToken)] = 1.0;
  Rng rng(3);
  std::vector<double> random_weights(27);
  for (double& w : random_weights) w = std::exp(2.0 * rng.uniform());
  const double marginals[3][3] = {{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.1, 0.1, 0.8}};
  const std::vector<OracleDenoiser> family = [&] {
    std::vector<OracleDenoiser> f;
    f.push_back(oracle::tiny_oracle());
    f.push_back(OracleDenoiser::from_function(3, 3, [&](const TokenSequence& x) {
      return random_weights[static_cast<std::size_t>(x[0] * 9 + x[1] * 3 + x[2])];
    }));
    f.push_back(OracleDenoiser::from_function(3, 3, [&](const TokenSequence& x) {
      return marginals[0][x[0]] * marginals[1][x[1]] * marginals[2][x[2]];
    }));
    return f;
  }();
  const auto s = NoiseSchedule::linear(1);
  for (const auto& o : family) {
    std::vector<double> kl, score;
    for (TokenId a = 0; a < 3; ++a) {
      for (TokenId b = 0; b < 3; ++b) {
        for (TokenId c = 0; c < 3; ++c) {
          const TokenSequence x0 = {a, b, c};
          BmcConfig cfg;
          cfg.gamma = 1.0;
          cfg.steps_k = 1;
          cfg.schedule_steps = 1;
          cfg.n_ensemble = 2000;
          cfg.weights = tok;
          cfg.seed = 5;
          score.push_back(bmc_score(x0, {}, o, metrics, cfg).mean_composite);
          kl.push_back(bmc_kl_exact(x0, {}, o, s).value);
        }
      }
    }
    EXPECT_GT(spearman(kl, score), 0.9);
  }
}

}  // namespace
}  // namespace bmc
