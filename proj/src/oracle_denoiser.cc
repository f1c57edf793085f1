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

#include "bmc/oracle_denoiser.h"

#include <string>

#include "bmc/common.h"

namespace bmc {

OracleDenoiser::OracleDenoiser(std::size_t vocab_size,
                               std::vector<WeightedSequence> joint)
    : vocab_size_(vocab_size), joint_(std::move(joint)) {
  check_arg(vocab_size_ > 0, "oracle: empty vocabulary");
  check_arg(!joint_.empty(), "oracle: empty joint distribution");
  if (joint_.size() > kMaxOracleStates) {
    fail(ErrorCode::kInvalidArgument,
         "oracle: state space of " + std::to_string(joint_.size()) +
             " sequences exceeds the enumeration limit");
  }
  length_ = joint_.front().tokens.size();
  check_arg(length_ > 0, "oracle: sequences must be non-empty");
  for (const auto& entry : joint_) {
    check_arg(entry.tokens.size() == length_, "oracle: sequences differ in length");
    check_arg(entry.weight >= 0.0, "oracle: negative weight");
    for (TokenId t : entry.tokens) {
      check_arg(t >= 0 && static_cast<std::size_t>(t) < vocab_size_,
                "oracle: token outside the content vocabulary");
    }
    total_weight_ += entry.weight;
  }
  check_arg(total_weight_ > 0.0, "oracle: weights sum to zero");
}

OracleDenoiser OracleDenoiser::from_function(
    std::size_t vocab_size, std::size_t length,
    const std::function<double(const TokenSequence&)>& weight) {
  double states = 1.0;
  for (std::size_t i = 0; i < length; ++i) states *= static_cast<double>(vocab_size);
  if (states > static_cast<double>(kMaxOracleStates)) {
    fail(ErrorCode::kInvalidArgument,
         "oracle: |V|^L = " + std::to_string(states) + " exceeds the enumeration limit");
  }
  std::vector<WeightedSequence> joint;
  TokenSequence current(length, 0);
  const auto n = static_cast<std::size_t>(states);
  for (std::size_t index = 0; index < n; ++index) {
    std::size_t rest = index;
    for (std::size_t i = length; i-- > 0;) {
      current[i] = static_cast<TokenId>(rest % vocab_size);
      rest /= vocab_size;
    }
    const double w = weight(current);
    if (w > 0.0) joint.push_back({current, w});
  }
  return OracleDenoiser(vocab_size, std::move(joint));
}

double OracleDenoiser::probability(const TokenSequence& sequence) const {
  double w = 0.0;
  for (const auto& entry : joint_) {
    if (entry.tokens == sequence) w += entry.weight;
  }
  return w / total_weight_;
}

DenoiserOutput OracleDenoiser::predict(std::span<const TokenId> /*context*/,
                                       std::span<const TokenId> sequence) const {
  check_arg(sequence.size() == length_, "oracle: sequence length mismatch");
  DenoiserOutput out = empty_output(sequence);
  const TokenId mask = mask_id();
  double evidence = 0.0;
  for (const auto& entry : joint_) {
    bool consistent = true;
    for (std::size_t i = 0; i < length_ && consistent; ++i) {
      if (sequence[i] != mask && sequence[i] != entry.tokens[i]) consistent = false;
    }
    if (!consistent || entry.weight == 0.0) continue;
    evidence += entry.weight;
    for (std::size_t k = 0; k < out.rows(); ++k) {
      out.row(k)[static_cast<std::size_t>(entry.tokens[out.positions[k]])] += entry.weight;
    }
  }
  for (std::size_t k = 0; k < out.rows(); ++k) {
    auto row = out.row(k);
    if (evidence > 0.0) {
      for (double& p : row) p /= evidence;
    } else {
      for (double& p : row) p = 1.0 / static_cast<double>(vocab_size_);
    }
  }
  return out;
}

}  // namespace bmc
