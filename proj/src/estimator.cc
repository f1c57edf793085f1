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

#include "bmc/estimator.h"

#include <cmath>
#include <string>

#include "bmc/common.h"

namespace bmc {

void BmcConfig::validate() const {
  check_arg(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  check_arg(steps_k >= 1, "K must be >= 1");
  check_arg(n_ensemble >= 1, "the ensemble size must be >= 1");
  check_arg(schedule_steps >= steps_k, "the schedule must have at least K steps");
  check_arg(workers >= 1, "workers must be >= 1");
  for (double w : weights.lambda) check_arg(w >= 0.0, "weights must be non-negative");
}

namespace {

Repetition identity_repetition(std::span<const TokenId> x0, const BmcConfig& config) {
  Repetition rep;
  rep.pattern.gamma = 0.0;
  rep.pattern.kept.assign(x0.size(), true);
  rep.reconstruction.assign(x0.begin(), x0.end());
  rep.score.components.values.fill(1.0);
  rep.score.composite = composite(rep.score.components, config.weights);
  rep.answer.score = 1.0;
  return rep;
}

Repetition run_repetition(std::span<const TokenId> x0, std::span<const TokenId> context,
                          const Denoiser& denoiser, const MetricSuite& metrics,
                          const BmcConfig& config, const NoiseSchedule& schedule,
                          int start_step, std::size_t index) {
  const TokenId mask = denoiser.mask_id();
  Repetition rep;
  auto masked = apply_mask(x0, config.gamma, mask,
                           derive_seed(config.seed, seed_tag::kMask, index));
  if (masked.second.masked_count() == 0) {
    rep.retried = true;
    masked = apply_mask(x0, config.gamma, mask,
                        derive_seed(config.seed, seed_tag::kRetry, index));
    if (masked.second.masked_count() == 0) {
      fail(ErrorCode::kDegenerate, "bmc_score: repetition " + std::to_string(index) +
                                       " masked no positions after one retry");
    }
  }
  rep.pattern = std::move(masked.second);

  ReconstructOptions options;
  options.reverse.policy = config.policy;
  options.reverse.context = context;
  options.reverse.keep_distributions = config.keep_distributions;
  options.start_step = start_step;
  options.transcripts = config.transcripts || config.keep_distributions;
  Reconstruction rec =
      reconstruct(masked.first, denoiser, config.steps_k, schedule,
                  derive_seed(config.seed, seed_tag::kReconstruct, index), options);

  rep.score.components = metrics.score(x0, rec.sequence, rep.pattern, rec.confidences,
                                       config.precision_penalty, &rep.answer);
  rep.score.composite = composite(rep.score.components, config.weights);
  rep.reconstruction = std::move(rec.sequence);
  rep.steps_run = rec.steps_run;
  rep.steps = std::move(rec.steps);
  return rep;
}

}  // namespace

BmcResult bmc_score(std::span<const TokenId> x0, std::span<const TokenId> context,
                    const Denoiser& denoiser, const MetricSuite& metrics,
                    const BmcConfig& config) {
  config.validate();
  check_arg(!x0.empty(), "bmc_score: empty sequence");
  validate_sequence(x0, denoiser.vocab_size());
  check_arg(!contains_mask(x0, denoiser.mask_id()), "bmc_score: x0 contains the mask");

  const auto n = static_cast<std::size_t>(config.n_ensemble);
  BmcResult result;
  result.repetitions.resize(n);
  if (config.gamma == 0.0) {
    for (auto& rep : result.repetitions) rep = identity_repetition(x0, config);
  } else {
    const NoiseSchedule schedule = NoiseSchedule::linear(config.schedule_steps);
    const int start = schedule.start_step_for_gamma(config.gamma);
    const int workers = denoiser.concurrent() ? config.workers : 1;
    parallel_for(n, workers, [&](std::size_t r) {
      result.repetitions[r] = run_repetition(x0, context, denoiser, metrics, config, schedule,
                                             start, r);
    });
  }

  for (const auto& rep : result.repetitions) {
    result.mean_composite += rep.score.composite;
    for (std::size_t k = 0; k < kNumComponents; ++k) {
      result.component_means.values[k] += rep.score.components.values[k];
    }
    result.reconstruction_steps += rep.steps_run;
  }
  result.mean_composite /= static_cast<double>(n);
  for (double& v : result.component_means.values) v /= static_cast<double>(n);
  return result;
}

namespace {

// Sum over masked positions of log p(x0^(i) | state).
double masked_log_likelihood(std::span<const TokenId> x0, std::span<const TokenId> context,
                             const TokenSequence& state, const Denoiser& denoiser) {
  if (!contains_mask(state, denoiser.mask_id())) return 0.0;
  const DenoiserOutput out = denoiser(context, state);
  double total = 0.0;
  for (std::size_t k = 0; k < out.rows(); ++k) {
    const std::size_t pos = out.positions[k];
    total += std::log(out.row(k)[static_cast<std::size_t>(x0[pos])]);
  }
  return total;
}

void check_kl_input(std::span<const TokenId> x0, const Denoiser& denoiser) {
  check_arg(!x0.empty(), "bmc_kl: empty sequence");
  validate_sequence(x0, denoiser.vocab_size());
  check_arg(!contains_mask(x0, denoiser.mask_id()), "bmc_kl: x0 contains the mask");
}

}  // namespace

KlEstimate bmc_kl_exact(std::span<const TokenId> x0, std::span<const TokenId> context,
                        const Denoiser& denoiser, const NoiseSchedule& schedule) {
  check_kl_input(x0, denoiser);
  const std::size_t length = x0.size();
  if (length > kMaxExactKlLength) {
    fail(ErrorCode::kInvalidArgument,
         "bmc_kl: exact mode supports at most " + std::to_string(kMaxExactKlLength) +
             " positions");
  }
  const TokenId mask = denoiser.mask_id();
  const std::size_t patterns = std::size_t{1} << length;
  const int steps = schedule.steps();

  double total = 0.0;
  for (int t = 1; t <= steps; ++t) {
    const double keep = schedule.alpha_bar(t);
    double expectation = 0.0;
    for (std::size_t bits = 0; bits < patterns; ++bits) {
      double weight = 1.0;
      TokenSequence state(x0.begin(), x0.end());
      for (std::size_t i = 0; i < length; ++i) {
        if (bits & (std::size_t{1} << i)) {
          state[i] = mask;
          weight *= 1.0 - keep;
        } else {
          weight *= keep;
        }
      }
      if (weight == 0.0) continue;
      expectation += weight * masked_log_likelihood(x0, context, state, denoiser);
    }
    total += expectation;
  }
  return {total / static_cast<double>(steps), 0.0, 0};
}

KlEstimate bmc_kl_sampled(std::span<const TokenId> x0, std::span<const TokenId> context,
                          const Denoiser& denoiser, const NoiseSchedule& schedule,
                          std::size_t samples, std::uint64_t seed) {
  check_kl_input(x0, denoiser);
  check_arg(samples >= 2, "bmc_kl: sampled mode needs at least two samples");
  Rng rng(seed);
  const auto steps = static_cast<std::uint64_t>(schedule.steps());
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const int t = 1 + static_cast<int>(rng.uniform_index(steps));
    const TokenSequence state =
        forward_marginal(x0, t, schedule, denoiser.mask_id(), rng.next());
    const double value = masked_log_likelihood(x0, context, state, denoiser);
    // Welford update.
    const double delta = value - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (value - mean);
  }
  const double variance = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(variance / static_cast<double>(samples)), samples};
}

}  // namespace bmc
