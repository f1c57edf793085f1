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

#include "bmc/tokens.h"

#include <algorithm>
#include <cctype>

#include "bmc/common.h"

namespace bmc {

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  check_arg(!tokens_.empty(), "vocabulary must contain at least one token");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    check_arg(tokens_[i] != kMaskText, "mask text is reserved");
    const auto [it, inserted] =
        index_.emplace(tokens_[i], static_cast<TokenId>(i));
    check_arg(inserted, "duplicate vocabulary token: " + tokens_[i]);
  }
}

Vocabulary Vocabulary::anonymous(std::size_t size) {
  std::vector<std::string> tokens;
  tokens.reserve(size);
  for (std::size_t i = 0; i < size; ++i) tokens.push_back("t" + std::to_string(i));
  return Vocabulary(std::move(tokens));
}

std::string_view Vocabulary::text(TokenId id) const {
  if (id == mask_id()) return kMaskText;
  check_arg(is_content(id), "token id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view text) const {
  const auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenSequence Vocabulary::encode(std::string_view text) const {
  TokenSequence out;
  const auto unknown = find(kUnknownText);
  for (const auto& word : split_whitespace(text)) {
    if (word == kMaskText) {
      out.push_back(mask_id());
      continue;
    }
    if (auto id = find(word)) {
      out.push_back(*id);
    } else if (unknown) {
      out.push_back(*unknown);
    } else {
      fail(ErrorCode::kData, "token not in vocabulary: " + word);
    }
  }
  return out;
}

std::string Vocabulary::render(std::span<const TokenId> sequence) const {
  std::string out;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.append(text(sequence[i]));
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::size_t count_masked(std::span<const TokenId> sequence, TokenId mask_id) {
  return static_cast<std::size_t>(
      std::count(sequence.begin(), sequence.end(), mask_id));
}

bool contains_mask(std::span<const TokenId> sequence, TokenId mask_id) {
  return std::find(sequence.begin(), sequence.end(), mask_id) != sequence.end();
}

void validate_sequence(std::span<const TokenId> sequence, std::size_t vocab_size) {
  for (TokenId id : sequence) {
    if (id < 0 || static_cast<std::size_t>(id) > vocab_size) {
      fail(ErrorCode::kInvalidArgument,
           "token id " + std::to_string(id) + " outside vocabulary of size " +
               std::to_string(vocab_size));
    }
  }
}

}  // namespace bmc
