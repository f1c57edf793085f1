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

// Mask-and-reconstruct consistency scoring of a single sequence, and the
// likelihood form of the same quantity.

#ifndef BMC_ESTIMATOR_H_
#define BMC_ESTIMATOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "bmc/denoiser.h"
#include "bmc/diffusion.h"
#include "bmc/metrics.h"
#include "bmc/schedule.h"

namespace bmc {

struct BmcConfig {
  double gamma = 0.9;
  int steps_k = 16;
  int n_ensemble = 4;
  // Length T of the linear schedule the reconstruction chain lives on.
  int schedule_steps = 32;
  Weights weights = Weights::uniform();
  bool precision_penalty = false;
  UnmaskPolicy policy = UnmaskPolicy::kConfidenceOrdered;
  std::uint64_t seed = 0;
  bool transcripts = false;
  // Keep full denoiser rows in transcripts; needed for cross-entropy.
  bool keep_distributions = false;
  int workers = 1;

  void validate() const;
};

struct Repetition {
  BmcScore score;
  MaskPattern pattern;
  TokenSequence reconstruction;
  AnswerMatch answer;
  bool retried = false;
  int steps_run = 0;
  std::vector<StepRecord> steps;  // with transcripts
};

struct BmcResult {
  std::vector<Repetition> repetitions;
  double mean_composite = 0.0;
  ComponentScores component_means;
  // Reverse steps executed across all repetitions (N * K, or 0 at gamma 0).
  long long reconstruction_steps = 0;
};

// Scores x0 by n_ensemble independent mask/reconstruct cycles. `context` is
// the query, visible to the denoiser but never masked. At gamma = 0 the
// reconstruction is x0 itself and every component is 1. A repetition whose
// mask hides nothing is redrawn once; a second empty mask is an error.
BmcResult bmc_score(std::span<const TokenId> x0, std::span<const TokenId> context,
                    const Denoiser& denoiser, const MetricSuite& metrics,
                    const BmcConfig& config);

// Exact enumeration limit for bmc_kl: 2^L mask patterns.
inline constexpr std::size_t kMaxExactKlLength = 16;

struct KlEstimate {
  double value = 0.0;
  double standard_error = 0.0;  // 0 in exact mode
  std::size_t samples = 0;
};

// (1/T) sum_t E_{q(x_t | x0)} [ sum_{i masked} log p(x0^(i) | x_t) ].
// Exact mode enumerates every mask pattern per t. Sampled mode draws
// (t, x_t) pairs with t uniform on 1..T.
KlEstimate bmc_kl_exact(std::span<const TokenId> x0, std::span<const TokenId> context,
                        const Denoiser& denoiser, const NoiseSchedule& schedule);

KlEstimate bmc_kl_sampled(std::span<const TokenId> x0, std::span<const TokenId> context,
                          const Denoiser& denoiser, const NoiseSchedule& schedule,
                          std::size_t samples, std::uint64_t seed);

}  // namespace bmc

#endif  // BMC_ESTIMATOR_H_
