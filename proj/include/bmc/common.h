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

#ifndef BMC_COMMON_H_
#define BMC_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace bmc {

// Error categories. The CLI maps them onto process exit codes.
enum class ErrorCode {
  kInvalidArgument,  // bad configuration or precondition violation
  kData,             // malformed or inconsistent input data
  kDegenerate,       // a statistic is undefined on the given input
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void check_arg(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::kInvalidArgument, what);
}

const char* error_code_name(ErrorCode code);

// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic child seed for stream `index` under `tag`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t index = 0) {
  return mix64(mix64(seed ^ mix64(tag)) + index);
}

// Seed-stream tags. Distinct constants keep the streams of different
// consumers independent even when they share a parent seed.
namespace seed_tag {
inline constexpr std::uint64_t kRepetition = 0x7265700000000001ULL;
inline constexpr std::uint64_t kMask = 0x6d61736b00000002ULL;
inline constexpr std::uint64_t kReconstruct = 0x7265636f00000003ULL;
inline constexpr std::uint64_t kStep = 0x7374657000000004ULL;
inline constexpr std::uint64_t kCandidate = 0x63616e6400000005ULL;
inline constexpr std::uint64_t kQuery = 0x7175657200000006ULL;
inline constexpr std::uint64_t kRetry = 0x7265747200000007ULL;
inline constexpr std::uint64_t kSample = 0x73616d7000000008ULL;
}  // namespace seed_tag

// Small xoshiro256** generator. The sampling routines below are written out
// by hand so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller.
  double normal();

  // Index drawn from an unnormalized non-negative weight vector.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::uint64_t s_[4];
};

// Runs body(i) for i in [0, n) on up to `workers` threads. Results must be
// written to pre-sized, index-addressed storage so ordering is stable.
// Exceptions from workers are rethrown on the calling thread (first index
// wins).
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace bmc

#endif  // BMC_COMMON_H_
