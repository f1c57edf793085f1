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

// Diagnosis statistics, ablation grids and the density/quality analysis of
// BMC feature vectors.
//
// Label 1 marks a correct candidate and is the positive class throughout.

#ifndef BMC_EVALUATION_H_
#define BMC_EVALUATION_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmc/estimator.h"
#include "bmc/inference.h"

namespace bmc {

struct VerificationRecord {
  std::string query_id;
  std::string query;
  std::string candidate;
  int label = 0;
  std::map<std::string, double> scores;  // method name -> score
  std::optional<ComponentScores> components;
};

// Score names written by diagnose().
inline constexpr const char* kScoreBmc = "bmc";
inline constexpr const char* kScoreConfidence = "confidence";
inline constexpr const char* kScoreSelfConsistency = "self_consistency";
inline constexpr const char* kScoreCrossEntropy = "cross_entropy";

// P(score of a random positive > score of a random negative), ties 1/2,
// from average ranks. Throws kDegenerate unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);
double auroc(std::span<const VerificationRecord> records, const std::string& score);

// Average precision: sum over descending distinct thresholds of
// (recall_k - recall_{k-1}) * precision_k. Throws kDegenerate without
// positives.
double aupr(std::span<const double> scores, std::span<const int> labels);
double aupr(std::span<const VerificationRecord> records, const std::string& score);

// Accuracy gain per extra sample, (acc - acc_std) / (n_avg - 1).
double sample_efficiency(double acc, double acc_std, double n_avg);

// exp(-mean_i -log p(x0^(i))) over the positions revealed in `steps`, each
// read from the distribution recorded at its reveal step.
double cross_entropy_score(std::span<const TokenId> x0, std::span<const StepRecord> steps);

struct DiagnosisItem {
  std::string query_id;
  TokenSequence query;
  TokenSequence candidate;
  int label = 0;
};

struct DiagnosisOptions {
  BmcConfig bmc;
  GenerationConfig generation;  // schedule replayed for model confidence
  bool confidence = true;
  bool cross_entropy = false;
  int self_consistency_samples = 0;  // 0 disables the baseline
  int workers = 1;
};

struct Diagnosis {
  std::vector<VerificationRecord> records;
  // Reverse steps spent on BMC reconstructions, summed over all records.
  long long reconstruction_steps = 0;
};

// Scores every candidate. Record i uses BMC seed
// derive_seed(options.bmc.seed, seed_tag::kQuery, i), so results do not
// depend on the worker count. The self-consistency score of a candidate is
// the fraction of fresh samples for its query whose answer equals the
// candidate's.
Diagnosis diagnose(std::span<const DiagnosisItem> items, const Denoiser& denoiser,
                   const MetricSuite& metrics, const DiagnosisOptions& options);

enum class AblationAxis { kSteps, kGamma, kEnsemble, kComponents };

const char* ablation_axis_name(AblationAxis axis);

struct AblationRow {
  std::string setting;
  std::uint64_t seed = 0;
  double auroc = 0.0;
  double aupr = 0.0;
  // Per-candidate cost T + mean reverse steps of the BMC ensemble.
  double step_cost = 0.0;
};

// One diagnosis per (grid value, seed). For kComponents the grid is ignored
// and the settings are each single component, the uniform composite, and the
// uniform composite with the cross-entropy score added as a seventh term.
std::vector<AblationRow> ablation_suite(std::span<const DiagnosisItem> items,
                                        const Denoiser& denoiser, const MetricSuite& metrics,
                                        const DiagnosisOptions& base, AblationAxis axis,
                                        std::span<const double> grid,
                                        std::span<const std::uint64_t> seeds);

struct WeightFit {
  Weights weights;
  double auroc = 0.0;
};

// Exhaustive search over the simplex grid {k / resolution}; the best AUROC
// of the weighted composite wins, first grid point on ties.
WeightFit fit_weights(std::span<const VerificationRecord> records, int resolution = 5);

double pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of average ranks. Throws kDegenerate on constant input.
double spearman(std::span<const double> x, std::span<const double> y);

// Linear-interpolated percentile, p in [0, 100].
double percentile(std::span<const double> values, double p);

struct ChiSquared {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Pearson chi-squared test of independence on a contingency table without
// continuity correction.
ChiSquared chi_squared_independence(const std::vector<std::vector<double>>& table);

// Product Gaussian KDE evaluated at every point, bandwidth
// h_d = n^(-1/(d+4)) * sigma_d per dimension (Scott's rule). Dimensions with
// zero spread are left out; if all are constant the input is degenerate.
std::vector<double> kde_scott(std::span<const std::array<double, kNumComponents>> points);

struct GeometryOptions {
  std::size_t bins = 5;
  bool absolute_density = false;
  // Percentiles when absolute_density is false, raw densities otherwise.
  double density_high = 75.0;
  double density_low = 25.0;
  double quality_low = 0.5;
  double quality_high = 0.8;
  std::size_t min_records = 50;
};

struct GeometryPoint {
  std::array<double, kNumComponents> features{};
  double density = 0.0;
  double quality = 0.0;
  int label = 0;
};

struct GeometryReport {
  std::size_t n = 0;
  double spearman_rho = 0.0;
  double r_squared = 0.0;
  double high_density_low_quality = 0.0;  // fraction of all records
  double low_density_high_quality = 0.0;
  double density_high_threshold = 0.0;
  double density_low_threshold = 0.0;
  ChiSquared chi_squared;
  std::vector<std::array<double, 2>> bin_counts;  // {correct, incorrect} per bin
  std::vector<GeometryPoint> points;
};

// Density of each record's six-component feature vector against its quality
// (the component mean), plus a test of correctness against density bins.
GeometryReport geometric_validation(std::span<const VerificationRecord> records,
                                    const GeometryOptions& options = {});

// One JSON object per line.
void write_records_jsonl(std::ostream& out, std::span<const VerificationRecord> records);
std::vector<VerificationRecord> read_records_jsonl(std::istream& in);

// setting,seed,auroc,aupr,step_cost
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);

}  // namespace bmc

#endif  // BMC_EVALUATION_H_
