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

#include "bmc/inference.h"

#include <map>

#include "bmc/common.h"

namespace bmc {

void GenerationConfig::validate() const {
  check_arg(steps >= 1, "generation needs T >= 1");
  check_arg(length >= 1, "generation length must be >= 1");
}

void MgrsConfig::validate() const {
  check_arg(n_max >= 1, "the sample budget must be >= 1");
  check_arg(tau >= 0.0, "tau must be non-negative");
  bmc.validate();
  generation.validate();
}

std::uint64_t candidate_seed(std::uint64_t seed, std::size_t i) {
  return derive_seed(seed, seed_tag::kCandidate, i);
}

std::uint64_t candidate_bmc_seed(std::uint64_t seed, std::size_t i) {
  return derive_seed(seed, seed_tag::kRepetition, i);
}

namespace {

// Replays the generation schedule over `length` masked positions.
Generation run_schedule(std::span<const TokenId> query, const Denoiser& denoiser,
                        const GenerationConfig& config, std::size_t length,
                        const TokenSequence* forced, std::uint64_t seed) {
  const NoiseSchedule schedule = NoiseSchedule::linear(config.steps);
  const TokenSequence start(length, denoiser.mask_id());
  ReconstructOptions options;
  options.reverse.policy = config.policy;
  options.reverse.context = query;
  options.reverse.forced = forced;
  options.start_step = config.steps;
  options.transcripts = true;
  Reconstruction rec = reconstruct(start, denoiser, config.steps, schedule, seed, options);

  double total = 0.0;
  std::size_t revealed = 0;
  for (const auto& step : rec.steps) {
    for (const auto& r : step.revealed) {
      total += r.token_prob;
      ++revealed;
    }
  }
  Generation g;
  g.sequence = std::move(rec.sequence);
  g.confidence = revealed > 0 ? total / static_cast<double>(revealed) : 0.0;
  g.steps_run = rec.steps_run;
  return g;
}

}  // namespace

Generation generate(std::span<const TokenId> query, const Denoiser& denoiser,
                    const GenerationConfig& config, std::uint64_t seed) {
  config.validate();
  return run_schedule(query, denoiser, config, config.length, nullptr, seed);
}

double model_confidence(std::span<const TokenId> query, std::span<const TokenId> candidate,
                        const Denoiser& denoiser, const GenerationConfig& config) {
  config.validate();
  check_arg(!candidate.empty(), "model_confidence: empty candidate");
  validate_sequence(candidate, denoiser.vocab_size());
  check_arg(!contains_mask(candidate, denoiser.mask_id()),
            "model_confidence: candidate contains the mask");
  const TokenSequence forced(candidate.begin(), candidate.end());
  return run_schedule(query, denoiser, config, forced.size(), &forced, 0).confidence;
}

Selection best_of_n(std::span<const TokenId> query, const Denoiser& denoiser,
                    const MetricSuite& metrics, int n, Selector selector,
                    const GenerationConfig& generation, const BmcConfig& bmc,
                    std::uint64_t seed) {
  check_arg(n >= 1, "best_of_n: n must be >= 1");
  Selection s;
  for (int i = 0; i < n; ++i) {
    const auto index = static_cast<std::size_t>(i);
    ScoredCandidate c;
    c.generation = generate(query, denoiser, generation, candidate_seed(seed, index));
    s.generation_steps += c.generation.steps_run;
    if (selector == Selector::kComposite) {
      BmcConfig config = bmc;
      config.seed = candidate_bmc_seed(seed, index);
      const BmcResult r = bmc_score(c.generation.sequence, query, denoiser, metrics, config);
      c.score = r.mean_composite;
      s.reconstruction_steps += r.reconstruction_steps;
    } else {
      c.score = c.generation.confidence;
    }
    if (c.score > (s.candidates.empty() ? -1.0 : s.candidates[s.chosen].score)) s.chosen = index;
    s.candidates.push_back(std::move(c));
  }
  return s;
}

Vote majority_vote(std::span<const std::optional<std::string>> answers) {
  check_arg(!answers.empty(), "majority_vote: no samples");
  std::map<std::string, std::size_t> counts;
  std::optional<std::string> best;
  std::size_t best_count = 0;
  for (const auto& a : answers) {
    if (a) ++counts[*a];
  }
  // First-seen order decides ties.
  for (const auto& a : answers) {
    if (!a) continue;
    const std::size_t c = counts[*a];
    if (c > best_count) {
      best = a;
      best_count = c;
    }
  }
  Vote v;
  v.answer = best;
  v.vote_ratio = static_cast<double>(best_count) / static_cast<double>(answers.size());
  return v;
}

SelfConsistency self_consistency(std::span<const TokenId> query, const Denoiser& denoiser,
                                 const MetricSuite& metrics, int n,
                                 const GenerationConfig& generation, std::uint64_t seed) {
  check_arg(n >= 1, "self_consistency: n must be >= 1");
  SelfConsistency sc;
  for (int i = 0; i < n; ++i) {
    Generation g = generate(query, denoiser, generation,
                            candidate_seed(seed, static_cast<std::size_t>(i)));
    const std::string text = metrics.vocabulary().render(g.sequence);
    sc.answers.push_back(metrics.extractor().extract(text).answer);
    sc.samples.push_back(std::move(g));
  }
  sc.vote = majority_vote(sc.answers);
  return sc;
}

MgrsOutcome mgrs(std::span<const TokenId> query, const Denoiser& denoiser,
                 const MetricSuite& metrics, const MgrsConfig& config, std::uint64_t seed) {
  config.validate();
  MgrsOutcome out;
  double best = -1.0;
  for (int i = 0; i < config.n_max; ++i) {
    const auto index = static_cast<std::size_t>(i);
    Generation g = generate(query, denoiser, config.generation, candidate_seed(seed, index));
    out.generation_steps += g.steps_run;
    BmcConfig bmc = config.bmc;
    bmc.seed = candidate_bmc_seed(seed, index);
    const BmcResult r = bmc_score(g.sequence, query, denoiser, metrics, bmc);
    out.reconstruction_steps += r.reconstruction_steps;
    out.scores.push_back(r.mean_composite);
    ++out.samples_used;
    if (r.mean_composite > best) {
      best = r.mean_composite;
      out.chosen = g.sequence;
      out.chosen_index = index;
      out.score = r.mean_composite;
    }
    if (r.mean_composite > config.tau) {
      out.early_exit = true;
      break;
    }
  }
  return out;
}

}  // namespace bmc
