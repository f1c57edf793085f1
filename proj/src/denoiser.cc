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

#include "bmc/denoiser.h"

#include <cmath>
#include <string>

#include "bmc/common.h"

namespace bmc {

void validate_output(const DenoiserOutput& output, double tolerance) {
  check_arg(output.probs.size() == output.rows() * output.vocab_size,
            "denoiser output has inconsistent shape");
  for (std::size_t k = 0; k < output.rows(); ++k) {
    double sum = 0.0;
    for (double p : output.row(k)) {
      if (!(p >= 0.0)) {
        fail(ErrorCode::kInvalidArgument,
             "denoiser output has a negative or NaN entry at position " +
                 std::to_string(output.positions[k]));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      fail(ErrorCode::kInvalidArgument,
           "denoiser row for position " + std::to_string(output.positions[k]) +
               " sums to " + std::to_string(sum));
    }
  }
}

DenoiserOutput Denoiser::operator()(std::span<const TokenId> context,
                                    std::span<const TokenId> sequence) const {
  DenoiserOutput out;
  if (concurrent()) {
    out = predict(context, sequence);
  } else {
    std::lock_guard<std::mutex> lock(call_mutex_);
    out = predict(context, sequence);
  }
  check_arg(out.vocab_size == vocab_size(), "denoiser output vocabulary mismatch");
  std::size_t k = 0;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (sequence[i] != mask_id()) continue;
    check_arg(k < out.rows() && out.positions[k] == i,
              "denoiser output does not cover the masked positions");
    ++k;
  }
  check_arg(k == out.rows(), "denoiser output has extra rows");
  validate_output(out);
  return out;
}

DenoiserOutput Denoiser::empty_output(std::span<const TokenId> sequence) const {
  DenoiserOutput out;
  out.vocab_size = vocab_size();
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (sequence[i] == mask_id()) out.positions.push_back(i);
  }
  out.probs.assign(out.positions.size() * out.vocab_size, 0.0);
  return out;
}

TableDenoiser::TableDenoiser(std::size_t vocab_size,
                             std::vector<std::vector<double>> rows)
    : vocab_size_(vocab_size), rows_(std::move(rows)) {
  check_arg(vocab_size_ > 0, "vocabulary must be non-empty");
  check_arg(!rows_.empty(), "table denoiser needs at least one row");
  for (const auto& row : rows_) {
    check_arg(row.size() == vocab_size_, "table row has wrong width");
  }
}

TableDenoiser TableDenoiser::uniform(std::size_t vocab_size) {
  return TableDenoiser(
      vocab_size,
      {std::vector<double>(vocab_size, 1.0 / static_cast<double>(vocab_size))});
}

TableDenoiser TableDenoiser::deterministic(std::size_t vocab_size,
                                           std::span<const TokenId> tokens) {
  std::vector<std::vector<double>> rows;
  for (TokenId token : tokens) {
    check_arg(token >= 0 && static_cast<std::size_t>(token) < vocab_size,
              "deterministic table token out of range");
    std::vector<double> row(vocab_size, 0.0);
    row[static_cast<std::size_t>(token)] = 1.0;
    rows.push_back(std::move(row));
  }
  return TableDenoiser(vocab_size, std::move(rows));
}

DenoiserOutput TableDenoiser::predict(std::span<const TokenId> /*context*/,
                                      std::span<const TokenId> sequence) const {
  DenoiserOutput out = empty_output(sequence);
  for (std::size_t k = 0; k < out.rows(); ++k) {
    const auto& src = rows_[std::min(out.positions[k], rows_.size() - 1)];
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

}  // namespace bmc
