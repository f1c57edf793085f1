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

#ifndef BMC_DENOISER_H_
#define BMC_DENOISER_H_

#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "bmc/tokens.h"

namespace bmc {

inline constexpr double kDistributionTolerance = 1e-9;

// Categorical predictions p(x0^(i) | visible tokens) for every masked
// position i of the input, one row per position in ascending order.
struct DenoiserOutput {
  std::size_t vocab_size = 0;
  std::vector<std::size_t> positions;
  std::vector<double> probs;  // positions.size() x vocab_size, row-major

  std::size_t rows() const { return positions.size(); }

  std::span<const double> row(std::size_t k) const {
    return {probs.data() + k * vocab_size, vocab_size};
  }
  std::span<double> row(std::size_t k) {
    return {probs.data() + k * vocab_size, vocab_size};
  }
};

// Throws kInvalidArgument unless every row is non-negative and sums to 1
// within `tolerance`.
void validate_output(const DenoiserOutput& output,
                     double tolerance = kDistributionTolerance);

// The x0-parameterized model f_theta. `context` holds query tokens that stay
// visible throughout; `sequence` is the partially masked state being
// denoised. Implementations fill `positions` with exactly the masked indices
// of `sequence`.
//
// Callers go through operator(), which validates the output and serializes
// access for implementations that are not safe to call concurrently.
class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(const Denoiser&) = delete;
  Denoiser& operator=(const Denoiser&) = delete;
  // The call mutex is per object; a moved-to denoiser gets a fresh one.
  Denoiser(Denoiser&&) noexcept {}
  Denoiser& operator=(Denoiser&&) noexcept { return *this; }
  virtual ~Denoiser() = default;

  virtual std::size_t vocab_size() const = 0;
  TokenId mask_id() const { return static_cast<TokenId>(vocab_size()); }

  // True when predict() may run on several threads at once.
  virtual bool concurrent() const { return false; }

  DenoiserOutput operator()(std::span<const TokenId> context,
                            std::span<const TokenId> sequence) const;

 protected:
  virtual DenoiserOutput predict(std::span<const TokenId> context,
                                 std::span<const TokenId> sequence) const = 0;

  // Output skeleton with positions set to the masked indices of `sequence`
  // and zeroed probabilities.
  DenoiserOutput empty_output(std::span<const TokenId> sequence) const;

 private:
  mutable std::mutex call_mutex_;
};

// Fixed per-position distributions, independent of the visible tokens except
// for their count. Handy as a test double and as a limit-case model.
class TableDenoiser : public Denoiser {
 public:
  // rows[i] is the distribution used for position i (the last row repeats
  // for longer sequences).
  TableDenoiser(std::size_t vocab_size, std::vector<std::vector<double>> rows);

  static TableDenoiser uniform(std::size_t vocab_size);
  // Probability 1 on `tokens[i]` at position i.
  static TableDenoiser deterministic(std::size_t vocab_size,
                                     std::span<const TokenId> tokens);

  std::size_t vocab_size() const override { return vocab_size_; }
  bool concurrent() const override { return true; }

 protected:
  DenoiserOutput predict(std::span<const TokenId> context,
                         std::span<const TokenId> sequence) const override;

 private:
  std::size_t vocab_size_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace bmc

#endif  // BMC_DENOISER_H_
