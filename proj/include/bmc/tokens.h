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

#ifndef BMC_TOKENS_H_
#define BMC_TOKENS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bmc {

using TokenId = std::int32_t;

// x0, a masked state, or a reconstruction. Every entry is either a content
// id in [0, vocab size) or the vocabulary's mask id.
using TokenSequence = std::vector<TokenId>;

inline constexpr std::string_view kMaskText = "[MASK]";
inline constexpr std::string_view kUnknownText = "<unk>";

// Finite content vocabulary plus the absorbing mask symbol. The mask id is
// always `size()`, one past the last content id.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> tokens);

  // Content tokens named "t0", "t1", ... for small synthetic instances.
  static Vocabulary anonymous(std::size_t size);

  std::size_t size() const { return tokens_.size(); }
  TokenId mask_id() const { return static_cast<TokenId>(tokens_.size()); }

  bool is_content(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }

  std::string_view text(TokenId id) const;
  std::optional<TokenId> find(std::string_view text) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Whitespace tokenization. Unknown words map to "<unk>" when the vocabulary
  // has one and raise a data error otherwise.
  TokenSequence encode(std::string_view text) const;

  // Joins token texts with single spaces.
  std::string render(std::span<const TokenId> sequence) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

std::vector<std::string> split_whitespace(std::string_view text);

std::size_t count_masked(std::span<const TokenId> sequence, TokenId mask_id);

bool contains_mask(std::span<const TokenId> sequence, TokenId mask_id);

// Throws unless every id is a content id or the mask id.
void validate_sequence(std::span<const TokenId> sequence, std::size_t vocab_size);

}  // namespace bmc

#endif  // BMC_TOKENS_H_
