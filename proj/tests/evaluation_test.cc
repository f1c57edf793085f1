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
#include <sstream>

#include <gtest/gtest.h>

#include "bmc/common.h"
#include "bmc/evaluation.h"
#include "fixtures.h"
#include "oracles.h"

namespace bmc {
namespace {

using Scores = std::vector<double>;
using Labels = std::vector<int>;

TEST(AurocTest, Examples) {
  EXPECT_EQ(auroc(Scores{0.9, 0.8, 0.2, 0.1}, Labels{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(auroc(Scores{0.5, 0.5, 0.5, 0.5}, Labels{1, 0, 1, 0}), 0.5);
  EXPECT_EQ(auroc(Scores{0.8, 0.4, 0.6, 0.2}, Labels{1, 1, 0, 0}), 0.75);
  EXPECT_EQ(auroc(Scores{0.1, 0.2}, Labels{1, 0}), 0.0);
}

TEST(AurocTest, SingleClassIsDegenerate) {
  try {
    auroc(Scores{0.1, 0.2}, Labels{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
  EXPECT_THROW(auroc(Scores{0.1}, Labels{1, 0}), Error);
}

TEST(AuprTest, Examples) {
  EXPECT_EQ(aupr(Scores{0.9, 0.8, 0.2, 0.1}, Labels{1, 1, 0, 0}), 1.0);
  // Staircase: t=0.8 -> (R .5, P 1), t=0.6 -> (.5, .5), t=0.4 -> (1, 2/3).
  EXPECT_DOUBLE_EQ(aupr(Scores{0.8, 0.4, 0.6, 0.2}, Labels{1, 1, 0, 0}), 0.5 + 0.5 * 2.0 / 3.0);
  EXPECT_THROW(aupr(Scores{0.1, 0.2}, Labels{0, 0}), Error);
}

TEST(AuprTest, RandomScoresApproachPositiveRate) {
  Rng rng(12);
  Scores s;
  Labels y;
  for (int i = 0; i < 2000; ++i) {
    s.push_back(rng.uniform());
    y.push_back(rng.uniform() < 0.3 ? 1 : 0);
  }
  double rate = 0.0;
  for (int v : y) rate += v / 2000.0;
  EXPECT_NEAR(aupr(s, y), rate, 0.05);
}

TEST(RankingTest, MatchesBruteForceOnRandomFixtures) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(199);
    // Coarse scores produce plenty of ties.
    const std::uint64_t levels = 1 + rng.uniform_index(20);
    Scores s(n);
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_index(levels)) / static_cast<double>(levels);
      y[i] = rng.uniform() < 0.5 ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_EQ(auroc(s, y), oracle::auroc(s, y));
    EXPECT_EQ(aupr(s, y), oracle::aupr(s, y));
  }
}

TEST(AurocTest, InvariantUnderMonotoneTransform) {
  Rng rng(5);
  Scores s, t;
  Labels y;
  for (int i = 0; i < 100; ++i) {
    s.push_back(rng.uniform());
    t.push_back(std::exp(3.0 * s.back()) - 7.0);
    y.push_back(i % 3 == 0);
  }
  EXPECT_EQ(auroc(s, y), auroc(t, y));
}

TEST(RecordScoresTest, NamedScores) {
  std::vector<VerificationRecord> r(3);
  r[0].label = 1;
  r[0].scores["bmc"] = 0.9;
  r[1].label = 0;
  r[1].scores["bmc"] = 0.1;
  r[2].label = 1;
  r[2].scores["bmc"] = 0.5;
  EXPECT_EQ(auroc(r, "bmc"), 1.0);
  EXPECT_EQ(aupr(r, "bmc"), 1.0);
  EXPECT_THROW(auroc(r, "confidence"), Error);
}

TEST(SampleEfficiencyTest, Examples) {
  EXPECT_EQ(sample_efficiency(70.5, 70.5, 3.0), 0.0);
  EXPECT_NEAR(sample_efficiency(74.3, 70.5, 3.0), 1.9, 0.05);
  EXPECT_NEAR(sample_efficiency(79.5, 70.5, 3.26), 3.98, 0.005);
  EXPECT_THROW(sample_efficiency(80, 70, 1.0), Error);
}

TEST(CrossEntropyTest, Examples) {
  auto step = [](std::size_t pos, std::vector<double> dist) {
    StepRecord s;
    RevealedToken r;
    r.position = pos;
    r.distribution = std::move(dist);
    s.revealed.push_back(r);
    return s;
  };
  const TokenSequence x0 = {1, 0};
  std::vector<StepRecord> certain = {step(0, {0, 1}), step(1, {1, 0})};
  EXPECT_EQ(cross_entropy_score(x0, certain), 1.0);
  std::vector<StepRecord> uniform = {step(0, {0.25, 0.25, 0.25, 0.25}),
                                     step(1, {0.25, 0.25, 0.25, 0.25})};
  EXPECT_NEAR(cross_entropy_score(x0, uniform), 0.25, 1e-15);
  std::vector<StepRecord> mixed = {step(0, {0.5, 0.5}), step(1, {0.25, 0.75})};
  // exp(-(log 2 + log 4) / 2) = 2^(-3/2).
  EXPECT_NEAR(cross_entropy_score(x0, mixed), std::pow(2.0, -1.5), 1e-15);
  EXPECT_THROW(cross_entropy_score(x0, std::vector<StepRecord>{}), Error);
  std::vector<StepRecord> bare = {step(0, {})};
  EXPECT_THROW(cross_entropy_score(x0, bare), Error);
}

TEST(CorrelationTest, Examples) {
  const Scores x = {1, 2, 3, 4, 5};
  EXPECT_NEAR(spearman(x, Scores{2, 4, 8, 16, 32}), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, Scores{5, 4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(pearson(x, Scores{3, 5, 7, 9, 11}), 1.0, 1e-15);
  // Ties take average ranks: y ranks {1.5, 1.5, 3, 4, 5}.
  const double r = pearson(Scores{1, 2, 3, 4, 5}, Scores{1.5, 1.5, 3, 4, 5});
  EXPECT_NEAR(spearman(x, Scores{7, 7, 8, 9, 10}), r, 1e-15);
  EXPECT_THROW(spearman(x, Scores{1, 1, 1, 1, 1}), Error);
}

TEST(PercentileTest, Interpolates) {
  const Scores v = {4, 1, 3, 2};
  EXPECT_EQ(percentile(v, 0), 1.0);
  EXPECT_EQ(percentile(v, 100), 4.0);
  EXPECT_DOUBLE_EQ(percentile(v, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile(v, 75), 3.25);
}

TEST(ChiSquaredTest, TwoByTwoByHand) {
  // Expected counts 12, 18, 28, 42.
  const auto c = chi_squared_independence({{10, 20}, {30, 40}});
  const double want = 4.0 / 12 + 4.0 / 18 + 4.0 / 28 + 4.0 / 42;
  EXPECT_NEAR(c.statistic, want, 1e-12);
  EXPECT_EQ(c.df, 1);
  EXPECT_NEAR(c.p_value, std::erfc(std::sqrt(want / 2.0)), 1e-12);
  EXPECT_THROW(chi_squared_independence({{0, 0}, {1, 2}}), Error);
}

TEST(KdeTest, MatchesDirectFormula) {
  std::vector<std::array<double, kNumComponents>> p = {
      {0, 0, 1, 0.5, 0.1, 0.2}, {1, 0, 1, 0.2, 0.4, 0.3}, {0.5, 0, 1, 0.9, 0.3, 0.1}};
  const auto d = kde_scott(p);
  // Dimensions 1 and 2 are constant and left out: d = 4.
  const double n = 3;
  std::array<double, kNumComponents> h{};
  for (std::size_t k : {0u, 3u, 4u, 5u}) {
    double m = 0, ss = 0;
    for (const auto& x : p) m += x[k] / n;
    for (const auto& x : p) ss += (x[k] - m) * (x[k] - m);
    h[k] = std::pow(n, -1.0 / 8.0) * std::sqrt(ss / (n - 1));
  }
  for (std::size_t a = 0; a < 3; ++a) {
    double sum = 0;
    for (std::size_t b = 0; b < 3; ++b) {
      double prod = 1;
      for (std::size_t k : {0u, 3u, 4u, 5u}) {
        const double z = (p[a][k] - p[b][k]) / h[k];
        prod *= std::exp(-0.5 * z * z) / (h[k] * std::sqrt(2 * M_PI));
      }
      sum += prod;
    }
    EXPECT_NEAR(d[a], sum / n, 1e-12 * sum);
  }
  std::vector<std::array<double, kNumComponents>> flat(4, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  EXPECT_THROW(kde_scott(flat), Error);
}

TEST(GeometryTest, ConstructedMonotoneDataset) {
  const auto records = fixture::constructed_geometry();
  const auto g = geometric_validation(records);
  EXPECT_NEAR(g.spearman_rho, 1.0, 1e-9);
  EXPECT_EQ(g.n, 364u);
  EXPECT_EQ(g.chi_squared.df, 4);
  EXPECT_EQ(g.bin_counts.size(), 5u);
  double total = 0;
  for (const auto& b : g.bin_counts) {
    EXPECT_GE(b[0] + b[1], 72.0);
    EXPECT_LE(b[0] + b[1], 73.0);
    total += b[0] + b[1];
  }
  EXPECT_EQ(total, 364.0);
  for (const auto& p : g.points) EXPECT_DOUBLE_EQ(p.quality, p.features[0]);
  // Deterministic.
  const auto again = geometric_validation(records);
  EXPECT_EQ(again.spearman_rho, g.spearman_rho);
  EXPECT_EQ(again.chi_squared.statistic, g.chi_squared.statistic);
}

TEST(GeometryTest, DegenerateInputs) {
  auto records = fixture::constructed_geometry();
  for (auto& r : records) r.components->values.fill(0.5);
  try {
    geometric_validation(records);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
  try {
    geometric_validation(fixture::constructed_geometry(4));  // 40 records
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kData);
  }
}

TEST(RecordsJsonlTest, RoundTrip) {
  auto records = fixture::constructed_geometry(2);  // 1 + 3 records
  records[1].scores["confidence"] = 0.25;
  records[2].components.reset();
  records[0].candidate = "a = \"x\"";
  std::ostringstream out;
  write_records_jsonl(out, records);
  std::istringstream in(out.str());
  const auto back = read_records_jsonl(in);
  ASSERT_EQ(back.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(back[i].query_id, records[i].query_id);
    EXPECT_EQ(back[i].candidate, records[i].candidate);
    EXPECT_EQ(back[i].label, records[i].label);
    EXPECT_EQ(back[i].scores, records[i].scores);
    EXPECT_EQ(back[i].components.has_value(), records[i].components.has_value());
  }
  EXPECT_EQ(back[0].components->values, records[0].components->values);
  std::istringstream bad("{\"query_id\": \"1\", \"label\": 3, \"scores\": {\"bmc\": 1}}\n");
  EXPECT_THROW(read_records_jsonl(bad), Error);
}

TEST(FitWeightsTest, FindsTheInformativeComponent) {
  std::vector<VerificationRecord> r(40);
  Rng rng(1);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i].label = i % 2;
    ComponentScores c;
    for (double& v : c.values) v = rng.uniform();
    c.values[2] = r[i].label == 1 ? 0.6 + 0.4 * rng.uniform() : 0.4 * rng.uniform();
    r[i].components = c;
  }
  const auto fit = fit_weights(r, 4);
  EXPECT_EQ(fit.auroc, 1.0);
  EXPECT_NEAR(fit.weights.normalized().sum(), 1.0, 1e-12);
  EXPECT_GT(fit.weights.lambda[2], 0.0);
}

class DiagnoseTest : public ::testing::Test {
 protected:
  const fixture::DeskModel& model = fixture::desk_model();
  MetricSuite metrics{model.vocab};
  fixture::EvalSet set = fixture::eval_set(40, 0.5, 8);
};

TEST_F(DiagnoseTest, DeterministicAcrossWorkers) {
  DiagnosisOptions o;
  o.bmc.seed = 4;
  o.self_consistency_samples = 3;
  o.cross_entropy = true;
  const auto a = diagnose(set.items, model.denoiser, metrics, o);
  o.workers = 3;
  const auto b = diagnose(set.items, model.denoiser, metrics, o);
  ASSERT_EQ(a.records.size(), set.items.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].scores, b.records[i].scores);
    EXPECT_EQ(a.records[i].components->values, b.records[i].components->values);
    EXPECT_EQ(a.records[i].scores.size(), 4u);
  }
  EXPECT_EQ(a.reconstruction_steps, 40LL * o.bmc.n_ensemble * o.bmc.steps_k);
}

TEST_F(DiagnoseTest, AblationShapes) {
  DiagnosisOptions o;
  const std::vector<std::uint64_t> seeds = {0, 1};
  const std::vector<double> grid = {0.5, 0.9};
  const auto g = ablation_suite(set.items, model.denoiser, metrics, o, AblationAxis::kGamma, grid,
                                seeds);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0].setting, "gamma=0.5");
  EXPECT_EQ(g[3].seed, 1u);
  EXPECT_EQ(g[1].step_cost, o.generation.steps + o.bmc.n_ensemble * o.bmc.steps_k);
  const auto c = ablation_suite(set.items, model.denoiser, metrics, o, AblationAxis::kComponents,
                                {}, seeds);
  EXPECT_EQ(c.size(), 2u * (kNumComponents + 2));
  EXPECT_EQ(c[7].setting, "uniform+s_ce");
  std::ostringstream csv;
  write_ablation_csv(csv, g);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "setting,seed,auroc,aupr,step_cost");
  EXPECT_THROW(ablation_suite(set.items, model.denoiser, metrics, o, AblationAxis::kSteps,
                              std::vector<double>{2.5}, seeds),
               Error);
}

}  // namespace
}  // namespace bmc
