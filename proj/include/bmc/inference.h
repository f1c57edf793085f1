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

// Sampling from the denoiser and the selection rules built on top of it:
// best-of-N, self-consistency voting and manifold-guided rejection sampling.

#ifndef BMC_INFERENCE_H_
#define BMC_INFERENCE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmc/estimator.h"

namespace bmc {

struct GenerationConfig {
  int steps = 32;           // T
  std::size_t length = 18;  // tokens generated after the query
  UnmaskPolicy policy = UnmaskPolicy::kConfidenceOrdered;

  void validate() const;
};

struct Generation {
  TokenSequence sequence;
  // Mean over positions of the probability the final token had when its
  // position was unmasked.
  double confidence = 0.0;
  int steps_run = 0;
};

// A full T-step reverse run from the all-mask state. The query is shown to
// the denoiser at every step and never masked.
Generation generate(std::span<const TokenId> query, const Denoiser& denoiser,
                    const GenerationConfig& config, std::uint64_t seed);

// Model confidence of a fixed candidate: the generation schedule is replayed
// with every revealed position forced to the candidate's token.
double model_confidence(std::span<const TokenId> query, std::span<const TokenId> candidate,
                        const Denoiser& denoiser, const GenerationConfig& config);

enum class Selector { kComposite, kConfidence };

struct ScoredCandidate {
  Generation generation;
  double score = 0.0;
};

struct Selection {
  std::vector<ScoredCandidate> candidates;
  std::size_t chosen = 0;
  long long generation_steps = 0;
  long long reconstruction_steps = 0;

  const ScoredCandidate& best() const { return candidates[chosen]; }
};

// n independent generations; the highest score wins, lowest index on ties.
// Candidate i uses the same seed as in mgrs, so both see the same samples.
Selection best_of_n(std::span<const TokenId> query, const Denoiser& denoiser,
                    const MetricSuite& metrics, int n, Selector selector,
                    const GenerationConfig& generation, const BmcConfig& bmc,
                    std::uint64_t seed);

struct Vote {
  std::optional<std::string> answer;  // empty when no sample was extractable
  double vote_ratio = 0.0;
};

// Majority over extracted answers; ties go to the answer seen first.
// Unextractable entries count toward n but never win.
Vote majority_vote(std::span<const std::optional<std::string>> answers);

struct SelfConsistency {
  Vote vote;
  std::vector<std::optional<std::string>> answers;
  std::vector<Generation> samples;
};

SelfConsistency self_consistency(std::span<const TokenId> query, const Denoiser& denoiser,
                                 const MetricSuite& metrics, int n,
                                 const GenerationConfig& generation, std::uint64_t seed);

struct MgrsConfig {
  double tau = 0.75;
  int n_max = 10;
  BmcConfig bmc;
  GenerationConfig generation;

  void validate() const;
};

struct MgrsOutcome {
  TokenSequence chosen;
  std::size_t chosen_index = 0;
  double score = 0.0;
  int samples_used = 0;
  bool early_exit = false;
  std::vector<double> scores;  // one per generated candidate
  long long generation_steps = 0;
  long long reconstruction_steps = 0;
};

// Generates and scores candidates until one scores strictly above tau, or
// returns the best of n_max candidates.
MgrsOutcome mgrs(std::span<const TokenId> query, const Denoiser& denoiser,
                 const MetricSuite& metrics, const MgrsConfig& config, std::uint64_t seed);

// Seeds of candidate i: one for its generation, one for its BMC ensemble.
std::uint64_t candidate_seed(std::uint64_t seed, std::size_t i);
std::uint64_t candidate_bmc_seed(std::uint64_t seed, std::size_t i);

}  // namespace bmc

#endif  // BMC_INFERENCE_H_
