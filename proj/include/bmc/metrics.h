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

// Consistency metrics between a sequence x0 and its reconstruction x_hat,
// and their weighted composite.

#ifndef BMC_METRICS_H_
#define BMC_METRICS_H_

#include <array>
#include <memory>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bmc/diffusion.h"
#include "bmc/tokens.h"

namespace bmc {

inline constexpr std::size_t kNumComponents = 6;

enum class Component : std::size_t {
  kToken = 0,     // s_tok
  kSemantic,      // s_sem
  kNumber,        // s_num
  kAnswer,        // s_ans
  kCharacter,     // s_char
  kConfidence,    // s_conf
};

// "s_tok", "s_sem", ... in Component order.
const std::array<std::string_view, kNumComponents>& component_names();

// One value per component, indexed by Component.
struct ComponentScores {
  std::array<double, kNumComponents> values{};

  double& operator[](Component c) { return values[static_cast<std::size_t>(c)]; }
  double operator[](Component c) const { return values[static_cast<std::size_t>(c)]; }
};

struct Weights {
  std::array<double, kNumComponents> lambda{};

  static Weights uniform();  // 1/6 each
  static Weights only(Component c);
  double sum() const;
  Weights normalized() const;

  // {"s_tok": w, "s_sem": w, "s_num": w, "s_ans": w, "s_char": w, "s_conf": w}
  static Weights from_json_text(std::string_view text);
  std::string to_json_text() const;
};

struct BmcScore {
  ComponentScores components;
  double composite = 0.0;
};

// Weighted sum of components. Rejects negative weights.
double composite(const ComponentScores& scores, const Weights& weights);

// phi: token sequence -> R^d. Must be deterministic.
class EmbeddingFunction {
 public:
  virtual ~EmbeddingFunction() = default;
  virtual std::vector<double> embed(std::span<const TokenId> sequence) const = 0;
};

// Token multiset counts over the content vocabulary.
class BagOfTokensEmbedding : public EmbeddingFunction {
 public:
  explicit BagOfTokensEmbedding(std::size_t vocab_size) : vocab_size_(vocab_size) {}
  std::vector<double> embed(std::span<const TokenId> sequence) const override;

 private:
  std::size_t vocab_size_;
};

enum class TaskKind { kNumeric, kMultipleChoice };

struct Extraction {
  std::optional<std::string> answer;  // canonical form
  int tier = 0;                       // 1..3, 0 when nothing matched
  // Tier-3 numeric fallback on a text with several unformatted numbers.
  bool penalized = false;
};

// Hierarchical final-answer extraction. Tiers are tried strictly in order:
//
// numeric:  1. <answer>42</answer>, #### 42, \boxed{42}, ANSWER 42
//           2. "the final answer is 42", "the answer is 42", "Answer: 42"
//           3. the last number in the text
// choice:   1. \boxed{A}, <answer>A</answer>
//           2. "the answer is A", "Answer: (A)"
//           3. an isolated option letter among the last three words
class AnswerExtractor {
 public:
  explicit AnswerExtractor(TaskKind kind = TaskKind::kNumeric);

  TaskKind kind() const { return kind_; }
  Extraction extract(std::string_view text) const;

 private:
  struct Rule {
    int tier;
    std::regex pattern;
  };
  TaskKind kind_;
  std::vector<Rule> rules_;
};

// Strips leading zeros, trailing fractional zeros and a bare decimal point,
// so "018", "18.0" and "18" compare equal.
std::string canonical_number(std::string_view number);

// Maximal numeric literals (optional leading minus, optional single decimal
// part), canonicalized, in order of appearance.
std::vector<std::string> extract_numbers(std::string_view text);

// Fraction of masked positions reconstructed exactly. Throws when the
// pattern masks nothing.
double token_accuracy(std::span<const TokenId> x0, std::span<const TokenId> x_hat,
                      const MaskPattern& pattern);

// max(0, cosine) of the two embeddings. Throws on a zero-norm embedding.
double semantic_similarity(std::span<const TokenId> x0, std::span<const TokenId> x_hat,
                           const EmbeddingFunction& embed);

inline constexpr double kNumberEpsilon = 1e-9;

// Multiset recall |N(x0) ∩ N(x_hat)| / (|N(x0)| + eps); times multiset
// precision when precision_penalty is set. Zero when x0 has no numbers.
double number_retention(std::string_view x0_text, std::string_view x_hat_text,
                        bool precision_penalty = false);

enum class AnswerMismatch {
  kNone,
  kOriginalUnextractable,
  kReconstructionUnextractable,
  kDifferent,
};

const char* answer_mismatch_name(AnswerMismatch reason);

struct AnswerMatch {
  double score = 0.0;  // 0 or 1
  AnswerMismatch reason = AnswerMismatch::kNone;
  Extraction original;
  Extraction reconstructed;
  // Diagnostics only: halved when either side came from a penalized
  // tier-3 fallback. Never folded into `score`.
  double diagnostic_confidence = 1.0;
};

AnswerMatch final_answer_match(std::string_view x0_text, std::string_view x_hat_text,
                               const AnswerExtractor& extractor);

std::size_t levenshtein(std::string_view a, std::string_view b);

// 1 - lev(a, b) / max(|a|, |b|); 1 when both are empty.
double char_similarity(std::string_view a, std::string_view b);

// Mean over reconstruction steps of the per-step mean max-probability.
// Throws on empty input.
double intrinsic_confidence(std::span<const double> step_confidences);

// The six components for one reconstruction, with the text-level metrics
// computed on rendered sequences.
class MetricSuite {
 public:
  // Bag-of-tokens embedding and a numeric extractor.
  explicit MetricSuite(const Vocabulary& vocab);
  MetricSuite(const Vocabulary& vocab, std::shared_ptr<const EmbeddingFunction> embedding,
              AnswerExtractor extractor);

  const Vocabulary& vocabulary() const { return *vocab_; }
  const AnswerExtractor& extractor() const { return extractor_; }
  const EmbeddingFunction& embedding() const { return *embedding_; }

  ComponentScores score(std::span<const TokenId> x0, std::span<const TokenId> x_hat,
                        const MaskPattern& pattern, std::span<const double> confidences,
                        bool precision_penalty = false, AnswerMatch* answer = nullptr) const;

 private:
  const Vocabulary* vocab_;
  std::shared_ptr<const EmbeddingFunction> embedding_;
  AnswerExtractor extractor_;
};

}  // namespace bmc

#endif  // BMC_METRICS_H_
