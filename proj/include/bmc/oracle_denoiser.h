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

#ifndef BMC_ORACLE_DENOISER_H_
#define BMC_ORACLE_DENOISER_H_

#include <functional>
#include <vector>

#include "bmc/denoiser.h"

namespace bmc {

inline constexpr std::size_t kMaxOracleStates = 10000;

struct WeightedSequence {
  TokenSequence tokens;
  double weight = 0.0;
};

// Exact posterior p(x0^(i) | visible tokens) under an explicit joint
// distribution over fixed-length sequences. The query context is ignored.
// Observations with zero probability under the joint fall back to the
// uniform distribution.
class OracleDenoiser : public Denoiser {
 public:
  // Weights need not be normalized; they must be non-negative with a
  // positive sum. At most kMaxOracleStates support sequences.
  OracleDenoiser(std::size_t vocab_size, std::vector<WeightedSequence> joint);

  // Enumerates all vocab_size^length sequences and weights them with
  // `weight`. Throws when the state space exceeds kMaxOracleStates.
  static OracleDenoiser from_function(
      std::size_t vocab_size, std::size_t length,
      const std::function<double(const TokenSequence&)>& weight);

  std::size_t vocab_size() const override { return vocab_size_; }
  bool concurrent() const override { return true; }

  std::size_t length() const { return length_; }
  const std::vector<WeightedSequence>& joint() const { return joint_; }

  // Probability of the full sequence under the normalized joint.
  double probability(const TokenSequence& sequence) const;

 protected:
  DenoiserOutput predict(std::span<const TokenId> context,
                         std::span<const TokenId> sequence) const override;

 private:
  std::size_t vocab_size_;
  std::size_t length_;
  std::vector<WeightedSequence> joint_;
  double total_weight_ = 0.0;
};

}  // namespace bmc

#endif  // BMC_ORACLE_DENOISER_H_
