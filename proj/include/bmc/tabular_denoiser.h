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

#ifndef BMC_TABULAR_DENOISER_H_
#define BMC_TABULAR_DENOISER_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "bmc/corpus.h"
#include "bmc/denoiser.h"

namespace bmc {

struct TabularOptions {
  // The slot prior adds `smoothing` to every token count (Laplace). Each
  // conditional table is backed off to the slot prior with total
  // pseudo-mass `smoothing`.
  double smoothing = 0.1;
  bool neighbor_features = true;
  bool pairwise_features = true;
  bool query_memory = true;
  // Total log-linear weight shared by the pairwise features present at a
  // slot, capped at 1 per feature. 0 multiplies them unweighted.
  double pairwise_pool = 8.0;
};

struct TrainingChain {
  TokenSequence context;
  TokenSequence chain;
};

// Encodes the correct (label 1) rows of a corpus.
std::vector<TrainingChain> training_chains(std::span<const JsonlRecord> records,
                                           const Vocabulary& vocab);

// Count-based denoiser fitted on correct chains.
//
// A masked slot i is scored by a product of count tables, each divided by
// the slot prior so that only the evidence it adds is counted:
//
//   p(v) ∝ prior_i(v) * prod_e [p_e(v | feature_e) / prior_i(v)]^w_e
//
// w_e is 1 except for the pairwise family (see pairwise_pool).
// The feature families are
//   - neighbors: (nearest visible token to the left, nearest to the right),
//   - pairwise:  the token at one visible chain or context position,
//   - memory:    the full query context.
// Tables with no counts for a feature abstain. All tables are immutable
// after fitting.
class TabularDenoiser : public Denoiser {
 public:
  static TabularDenoiser fit(std::span<const TrainingChain> corpus, std::size_t vocab_size,
                             const TabularOptions& options = {});

  std::size_t vocab_size() const override { return vocab_size_; }
  bool concurrent() const override { return true; }

  const TabularOptions& options() const { return options_; }
  std::size_t max_length() const { return max_length_; }

  void save(std::ostream& out) const;
  static TabularDenoiser load(std::istream& in);

  // Sparse counts for one conditioning context.
  struct CountRow {
    double total = 0.0;
    std::vector<std::pair<TokenId, double>> counts;  // sorted by token
  };

 protected:
  DenoiserOutput predict(std::span<const TokenId> context,
                         std::span<const TokenId> sequence) const override;

 private:
  TabularDenoiser() = default;

  double prior(std::size_t slot, std::size_t token) const;
  std::uint64_t pair_key(std::size_t slot, std::size_t source, TokenId token) const;
  std::uint64_t neighbor_key(std::size_t slot, TokenId left, TokenId right) const;

  std::size_t vocab_size_ = 0;
  std::size_t max_length_ = 0;
  std::size_t max_context_ = 0;
  TabularOptions options_;

  std::vector<double> slot_counts_;  // max_length_ x vocab_size_
  std::vector<double> slot_totals_;  // max_length_
  std::unordered_map<std::uint64_t, CountRow> pairwise_;
  std::unordered_map<std::uint64_t, CountRow> neighbors_;
  std::map<TokenSequence, std::vector<CountRow>> memory_;
};

}  // namespace bmc

#endif  // BMC_TABULAR_DENOISER_H_
