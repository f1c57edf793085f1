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

#include "bmc/diffusion.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bmc/common.h"

namespace bmc {

std::size_t MaskPattern::masked_count() const {
  return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), false));
}

TokenSequence forward_marginal(std::span<const TokenId> x0, int t,
                               const NoiseSchedule& schedule, TokenId mask_id,
                               std::uint64_t seed) {
  check_arg(t >= 1 && t <= schedule.steps(),
            "forward_marginal: t=" + std::to_string(t) + " outside [1, T]");
  check_arg(!contains_mask(x0, mask_id), "forward_marginal: x0 already contains the mask");
  const double keep = schedule.alpha_bar(t);
  Rng rng(seed);
  TokenSequence out(x0.begin(), x0.end());
  for (auto& token : out) {
    if (!rng.bernoulli(keep)) token = mask_id;
  }
  return out;
}

std::pair<TokenSequence, MaskPattern> apply_mask(std::span<const TokenId> x0,
                                                 double gamma, TokenId mask_id,
                                                 std::uint64_t seed) {
  check_arg(gamma >= 0.0 && gamma <= 1.0, "apply_mask: gamma outside [0, 1]");
  Rng rng(seed);
  TokenSequence out(x0.begin(), x0.end());
  MaskPattern pattern;
  pattern.gamma = gamma;
  pattern.kept.assign(x0.size(), true);
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Draw for every position so the stream does not depend on gamma's
    // boundary cases.
    const double u = rng.uniform();
    if (u < gamma) {
      out[i] = mask_id;
      pattern.kept[i] = false;
    }
  }
  return {std::move(out), std::move(pattern)};
}

namespace {

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(
      std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

TokenSequence reverse_step(std::span<const TokenId> x_from, const Denoiser& denoiser,
                           int from, int to, const NoiseSchedule& schedule,
                           std::uint64_t seed, const ReverseOptions& options,
                           StepRecord* record) {
  check_arg(to < from, "reverse_step: to_step must be smaller than from_step");
  check_arg(to >= 0 && from <= schedule.steps(), "reverse_step: step outside schedule");
  const TokenId mask = denoiser.mask_id();
  if (options.forced != nullptr) {
    check_arg(options.forced->size() == x_from.size(),
              "reverse_step: forced sequence has the wrong length");
  }

  TokenSequence out(x_from.begin(), x_from.end());
  if (record != nullptr) {
    *record = StepRecord{};
    record->from = from;
    record->to = to;
  }
  if (!contains_mask(x_from, mask)) return out;

  const DenoiserOutput pred = denoiser(options.context, x_from);
  const std::size_t masked = pred.rows();
  const double reveal = schedule.reveal_probability(from, to);
  Rng rng(seed);

  std::vector<double> max_probs(masked);
  double max_sum = 0.0;
  for (std::size_t k = 0; k < masked; ++k) {
    const auto row = pred.row(k);
    max_probs[k] = row[argmax(row)];
    max_sum += max_probs[k];
  }

  // Rows (indices into pred) revealed by this step, ascending position order.
  std::vector<std::size_t> chosen;
  if (options.policy == UnmaskPolicy::kPosterior) {
    for (std::size_t k = 0; k < masked; ++k) {
      if (rng.uniform() < reveal) chosen.push_back(k);
    }
  } else {
    std::size_t count;
    if (options.steps_left > 0) {
      const auto left = static_cast<std::size_t>(options.steps_left);
      count = (masked + left - 1) / left;
    } else {
      // The epsilon keeps exact products such as 3 * (1/3) from rounding up.
      const double expected = static_cast<double>(masked) * reveal;
      count = static_cast<std::size_t>(std::ceil(expected - 1e-9));
    }
    count = std::min(count, masked);
    std::vector<std::size_t> order(masked);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return max_probs[a] > max_probs[b];
    });
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(chosen.begin(), chosen.end());
  }

  for (std::size_t k : chosen) {
    const auto row = pred.row(k);
    const std::size_t pos = pred.positions[k];
    TokenId token;
    if (options.forced != nullptr) {
      token = (*options.forced)[pos];
      check_arg(token >= 0 && static_cast<std::size_t>(token) < pred.vocab_size,
                "reverse_step: forced token is not a content token");
    } else {
      token = static_cast<TokenId>(rng.categorical(row));
    }
    out[pos] = token;
    if (record != nullptr) {
      RevealedToken r;
      r.position = pos;
      r.token = token;
      r.max_prob = max_probs[k];
      r.token_prob = row[static_cast<std::size_t>(token)];
      if (options.keep_distributions) r.distribution.assign(row.begin(), row.end());
      record->revealed.push_back(std::move(r));
    }
  }

  if (record != nullptr) {
    record->masked_before = masked;
    record->mean_max_prob = max_sum / static_cast<double>(masked);
  }
  return out;
}

std::vector<int> reconstruction_timesteps(int start, int steps) {
  check_arg(steps >= 1, "reconstruction needs K >= 1");
  check_arg(start >= steps, "reconstruction start step must be >= K");
  std::vector<int> taus(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    taus[static_cast<std::size_t>(k)] = static_cast<int>(
        std::llround(static_cast<double>(k) * start / static_cast<double>(steps)));
  }
  return taus;
}

Reconstruction reconstruct(std::span<const TokenId> x_tilde, const Denoiser& denoiser,
                           int steps_k, const NoiseSchedule& schedule,
                           std::uint64_t seed, const ReconstructOptions& options) {
  check_arg(steps_k >= 1, "reconstruct: K must be >= 1");
  check_arg(steps_k <= schedule.steps(), "reconstruct: K exceeds the schedule length");
  int start = options.start_step.value_or(schedule.steps());
  check_arg(start >= 0 && start <= schedule.steps(), "reconstruct: start step outside schedule");
  start = std::max(start, steps_k);
  const auto taus = reconstruction_timesteps(start, steps_k);

  Reconstruction result;
  result.sequence.assign(x_tilde.begin(), x_tilde.end());
  for (int k = steps_k; k >= 1; --k) {
    const int from = taus[static_cast<std::size_t>(k)];
    const int to = taus[static_cast<std::size_t>(k - 1)];
    StepRecord record;
    ReverseOptions reverse = options.reverse;
    reverse.steps_left = k;
    result.sequence =
        reverse_step(result.sequence, denoiser, from, to, schedule,
                     derive_seed(seed, seed_tag::kStep, static_cast<std::uint64_t>(k)),
                     reverse, &record);
    ++result.steps_run;
    if (record.masked_before > 0) result.confidences.push_back(record.mean_max_prob);
    if (options.transcripts) result.steps.push_back(std::move(record));
  }
  if (contains_mask(result.sequence, denoiser.mask_id())) {
    fail(ErrorCode::kInternal, "reconstruct: mask remains after the final step");
  }
  return result;
}

}  // namespace bmc
