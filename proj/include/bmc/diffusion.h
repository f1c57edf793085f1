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

// Absorbing-state discrete diffusion: forward corruption toward [MASK] and
// x0-parameterized reverse steps over an arbitrary Denoiser.

#ifndef BMC_DIFFUSION_H_
#define BMC_DIFFUSION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bmc/denoiser.h"
#include "bmc/schedule.h"
#include "bmc/tokens.h"

namespace bmc {

// kept[i] == false marks position i as replaced by the mask.
struct MaskPattern {
  std::vector<bool> kept;
  double gamma = 0.0;

  std::size_t masked_count() const;
};

// Samples q(x_t | x0): each token survives with probability alpha_bar_t.
TokenSequence forward_marginal(std::span<const TokenId> x0, int t,
                               const NoiseSchedule& schedule, TokenId mask_id,
                               std::uint64_t seed);

// Masks each position independently with probability gamma.
std::pair<TokenSequence, MaskPattern> apply_mask(std::span<const TokenId> x0,
                                                 double gamma, TokenId mask_id,
                                                 std::uint64_t seed);

enum class UnmaskPolicy {
  // Each masked position is revealed independently with the forward
  // posterior probability; this is the exact ancestral sampler.
  kPosterior,
  // Reveals ceil(remaining / steps_left) positions per step inside
  // reconstruct (ceil(remaining * reveal_probability) for a bare
  // reverse_step), taking the positions with the highest denoiser
  // max-probability first (lowest index on ties).
  kConfidenceOrdered,
};

struct RevealedToken {
  std::size_t position = 0;
  TokenId token = 0;
  double max_prob = 0.0;    // max_v p(v | state) at the reveal step
  double token_prob = 0.0;  // probability of the revealed token
  std::vector<double> distribution;  // only with keep_distributions
};

// What happened during one reverse step.
struct StepRecord {
  int from = 0;
  int to = 0;
  std::size_t masked_before = 0;
  double mean_max_prob = 0.0;  // over positions masked before the step
  std::vector<RevealedToken> revealed;
};

struct ReverseOptions {
  UnmaskPolicy policy = UnmaskPolicy::kConfidenceOrdered;
  // Query tokens shown to the denoiser; never masked or modified.
  std::span<const TokenId> context;
  // When set, revealed positions take these tokens instead of samples
  // (teacher forcing for scoring a fixed candidate).
  const TokenSequence* forced = nullptr;
  bool keep_distributions = false;
  // Confidence-ordered only: when positive, reveal ceil(masked / steps_left)
  // positions instead of the schedule's expected count.
  int steps_left = 0;
};

// Samples p_theta(x_to | x_from). Revealed positions never return to the
// mask. A step from an unmasked state returns it unchanged without calling
// the denoiser.
TokenSequence reverse_step(std::span<const TokenId> x_from, const Denoiser& denoiser,
                           int from, int to, const NoiseSchedule& schedule,
                           std::uint64_t seed, const ReverseOptions& options = {},
                           StepRecord* record = nullptr);

// tau_K = start > ... > tau_0 = 0, linearly spaced integers. Requires
// 1 <= steps <= start.
std::vector<int> reconstruction_timesteps(int start, int steps);

struct Reconstruction {
  TokenSequence sequence;
  // Mean max-probability over the masked positions of every step that still
  // had masked positions.
  std::vector<double> confidences;
  std::vector<StepRecord> steps;  // filled when transcripts are requested
  int steps_run = 0;
};

struct ReconstructOptions {
  ReverseOptions reverse;
  // First timestep of the chain. Defaults to T; raised to K when smaller so
  // that the K steps are distinct.
  std::optional<int> start_step;
  bool transcripts = false;
};

// Runs exactly K reverse steps from x_tilde down to t = 0. The result
// contains no mask tokens.
Reconstruction reconstruct(std::span<const TokenId> x_tilde, const Denoiser& denoiser,
                           int steps_k, const NoiseSchedule& schedule,
                           std::uint64_t seed, const ReconstructOptions& options = {});

}  // namespace bmc

#endif  // BMC_DIFFUSION_H_
