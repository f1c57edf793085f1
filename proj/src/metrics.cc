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

#include "bmc/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "bmc/common.h"
#include "json.hpp"

namespace bmc {

const std::array<std::string_view, kNumComponents>& component_names() {
  static const std::array<std::string_view, kNumComponents> names = {
      "s_tok", "s_sem", "s_num", "s_ans", "s_char", "s_conf"};
  return names;
}

Weights Weights::uniform() {
  Weights w;
  w.lambda.fill(1.0 / static_cast<double>(kNumComponents));
  return w;
}

Weights Weights::only(Component c) {
  Weights w;
  w.lambda[static_cast<std::size_t>(c)] = 1.0;
  return w;
}

double Weights::sum() const { return std::accumulate(lambda.begin(), lambda.end(), 0.0); }

Weights Weights::normalized() const {
  const double total = sum();
  check_arg(total > 0.0, "weights sum to zero");
  Weights w = *this;
  for (double& l : w.lambda) l /= total;
  return w;
}

Weights Weights::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("weight profile: ") + e.what());
  }
  check_arg(j.is_object(), "weight profile must be a JSON object");
  Weights w;
  const auto& names = component_names();
  for (std::size_t k = 0; k < kNumComponents; ++k) {
    const std::string key(names[k]);
    if (!j.contains(key) || !j[key].is_number()) {
      fail(ErrorCode::kInvalidArgument, "weight profile is missing \"" + key + "\"");
    }
    w.lambda[k] = j[key].get<double>();
    check_arg(w.lambda[k] >= 0.0, "weight \"" + key + "\" is negative");
  }
  for (const auto& item : j.items()) {
    if (std::find(names.begin(), names.end(), item.key()) == names.end()) {
      fail(ErrorCode::kInvalidArgument, "weight profile has unknown key \"" + item.key() + "\"");
    }
  }
  return w;
}

std::string Weights::to_json_text() const {
  nlohmann::ordered_json j;
  const auto& names = component_names();
  for (std::size_t k = 0; k < kNumComponents; ++k) j[std::string(names[k])] = lambda[k];
  return j.dump();
}

double composite(const ComponentScores& scores, const Weights& weights) {
  double total = 0.0;
  for (std::size_t k = 0; k < kNumComponents; ++k) {
    check_arg(weights.lambda[k] >= 0.0, "composite: negative weight");
    total += weights.lambda[k] * scores.values[k];
  }
  return total;
}

std::vector<double> BagOfTokensEmbedding::embed(std::span<const TokenId> sequence) const {
  std::vector<double> v(vocab_size_, 0.0);
  for (TokenId t : sequence) {
    if (t >= 0 && static_cast<std::size_t>(t) < vocab_size_) v[static_cast<std::size_t>(t)] += 1.0;
  }
  return v;
}

// --- numbers and answers -------------------------------------------------

namespace {

constexpr const char* kNumberPattern = R"(-?\d+(?:\.\d+)?)";

}  // namespace

std::string canonical_number(std::string_view number) {
  std::string s(number);
  bool negative = false;
  if (!s.empty() && s[0] == '-') {
    negative = true;
    s.erase(0, 1);
  }
  std::string integer = s;
  std::string fraction;
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    integer = s.substr(0, dot);
    fraction = s.substr(dot + 1);
  }
  const auto first = integer.find_first_not_of('0');
  integer = first == std::string::npos ? "0" : integer.substr(first);
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
  std::string out = integer;
  if (!fraction.empty()) out += "." + fraction;
  if (negative && out != "0") out.insert(out.begin(), '-');
  return out;
}

std::vector<std::string> extract_numbers(std::string_view text) {
  static const std::regex number(kNumberPattern);
  std::vector<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator();
       ++it) {
    out.push_back(canonical_number(it->str()));
  }
  return out;
}

AnswerExtractor::AnswerExtractor(TaskKind kind) : kind_(kind) {
  const std::string num = std::string("(") + kNumberPattern + ")";
  const auto icase = std::regex::ECMAScript | std::regex::icase;
  if (kind_ == TaskKind::kNumeric) {
    rules_.push_back({1, std::regex(R"(<answer>\s*)" + num + R"(\s*</answer>)", icase)});
    rules_.push_back({1, std::regex(R"(####\s*)" + num)});
    rules_.push_back({1, std::regex(R"(\\boxed\{\s*)" + num + R"(\s*\})")});
    rules_.push_back({1, std::regex(R"(\bANSWER\s+)" + num)});
    rules_.push_back(
        {2, std::regex(R"((?:final answer|the answer|answer)\s*(?:is|:|=)?\s*\$?)" + num, icase)});
  } else {
    const std::string letter = R"(\(?([A-J])\)?)";
    rules_.push_back({1, std::regex(R"(\\boxed\{\s*)" + letter + R"(\s*\})")});
    rules_.push_back({1, std::regex(R"(<[Aa][Nn][Ss][Ww][Ee][Rr]>\s*)" + letter +
                                    R"(\s*</[Aa][Nn][Ss][Ww][Ee][Rr]>)")});
    rules_.push_back({2, std::regex(R"([Aa]nswer\s*(?:[Ii]s|:)\s*)" + letter + R"((?![A-Za-z]))")});
  }
}

Extraction AnswerExtractor::extract(std::string_view text) const {
  const std::string s(text);
  for (int tier = 1; tier <= 2; ++tier) {
    // Within a tier the last match wins; it is the closest to the conclusion.
    std::optional<std::string> found;
    std::ptrdiff_t found_at = -1;
    for (const auto& rule : rules_) {
      if (rule.tier != tier) continue;
      for (auto it = std::sregex_iterator(s.begin(), s.end(), rule.pattern);
           it != std::sregex_iterator(); ++it) {
        if (it->position(1) > found_at) {
          found_at = it->position(1);
          found = (*it)[1].str();
        }
      }
    }
    if (found) {
      Extraction e;
      e.tier = tier;
      e.answer = kind_ == TaskKind::kNumeric ? canonical_number(*found) : *found;
      return e;
    }
  }

  Extraction e;
  if (kind_ == TaskKind::kNumeric) {
    const auto numbers = extract_numbers(s);
    if (!numbers.empty()) {
      e.tier = 3;
      e.answer = numbers.back();
      e.penalized = numbers.size() > 1;
    }
    return e;
  }
  static const std::regex option(R"(^\(?([A-J])\)?[.:]?$)");
  const auto words = split_whitespace(s);
  const std::size_t begin = words.size() > 3 ? words.size() - 3 : 0;
  for (std::size_t i = words.size(); i-- > begin;) {
    std::smatch m;
    if (std::regex_match(words[i], m, option)) {
      e.tier = 3;
      e.answer = m[1].str();
      break;
    }
  }
  return e;
}

// --- metrics ---------------------------------------------------------------

double token_accuracy(std::span<const TokenId> x0, std::span<const TokenId> x_hat,
                      const MaskPattern& pattern) {
  check_arg(x0.size() == x_hat.size() && x0.size() == pattern.kept.size(),
            "token_accuracy: length mismatch");
  std::size_t masked = 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (pattern.kept[i]) continue;
    ++masked;
    if (x0[i] == x_hat[i]) ++matched;
  }
  if (masked == 0) fail(ErrorCode::kInvalidArgument, "token_accuracy: no masked positions");
  return static_cast<double>(matched) / static_cast<double>(masked);
}

double semantic_similarity(std::span<const TokenId> x0, std::span<const TokenId> x_hat,
                           const EmbeddingFunction& embed) {
  check_arg(!x0.empty() && !x_hat.empty(), "semantic_similarity: empty sequence");
  const auto a = embed.embed(x0);
  const auto b = embed.embed(x_hat);
  check_arg(a.size() == b.size(), "semantic_similarity: embedding dimensions differ");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorCode::kInvalidArgument, "semantic_similarity: zero-norm embedding");
  }
  const double cosine = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(cosine, 0.0, 1.0);
}

double number_retention(std::string_view x0_text, std::string_view x_hat_text,
                        bool precision_penalty) {
  const auto original = extract_numbers(x0_text);
  const auto reconstructed = extract_numbers(x_hat_text);
  std::map<std::string, int> remaining;
  for (const auto& n : original) ++remaining[n];
  std::size_t overlap = 0;
  for (const auto& n : reconstructed) {
    auto it = remaining.find(n);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  const double recall =
      static_cast<double>(overlap) / (static_cast<double>(original.size()) + kNumberEpsilon);
  if (!precision_penalty) return std::min(recall, 1.0);
  const double precision =
      static_cast<double>(overlap) / (static_cast<double>(reconstructed.size()) + kNumberEpsilon);
  return std::min(recall, 1.0) * std::min(precision, 1.0);
}

const char* answer_mismatch_name(AnswerMismatch reason) {
  switch (reason) {
    case AnswerMismatch::kNone:
      return "match";
    case AnswerMismatch::kOriginalUnextractable:
      return "original_unextractable";
    case AnswerMismatch::kReconstructionUnextractable:
      return "reconstruction_unextractable";
    case AnswerMismatch::kDifferent:
      return "different_answer";
  }
  return "unknown";
}

AnswerMatch final_answer_match(std::string_view x0_text, std::string_view x_hat_text,
                               const AnswerExtractor& extractor) {
  AnswerMatch m;
  m.original = extractor.extract(x0_text);
  m.reconstructed = extractor.extract(x_hat_text);
  if (m.original.penalized || m.reconstructed.penalized) m.diagnostic_confidence = 0.5;
  if (!m.original.answer) {
    m.reason = AnswerMismatch::kOriginalUnextractable;
  } else if (!m.reconstructed.answer) {
    m.reason = AnswerMismatch::kReconstructionUnextractable;
  } else if (*m.original.answer != *m.reconstructed.answer) {
    m.reason = AnswerMismatch::kDifferent;
  } else {
    m.score = 1.0;
  }
  return m;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitution = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitution});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double char_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double intrinsic_confidence(std::span<const double> step_confidences) {
  check_arg(!step_confidences.empty(), "intrinsic_confidence: no reconstruction steps");
  return std::accumulate(step_confidences.begin(), step_confidences.end(), 0.0) /
         static_cast<double>(step_confidences.size());
}

MetricSuite::MetricSuite(const Vocabulary& vocab)
    : MetricSuite(vocab, std::make_shared<BagOfTokensEmbedding>(vocab.size()),
                  AnswerExtractor(TaskKind::kNumeric)) {}

MetricSuite::MetricSuite(const Vocabulary& vocab,
                         std::shared_ptr<const EmbeddingFunction> embedding,
                         AnswerExtractor extractor)
    : vocab_(&vocab), embedding_(std::move(embedding)), extractor_(std::move(extractor)) {
  check_arg(embedding_ != nullptr, "MetricSuite: null embedding");
}

ComponentScores MetricSuite::score(std::span<const TokenId> x0, std::span<const TokenId> x_hat,
                                   const MaskPattern& pattern,
                                   std::span<const double> confidences,
                                   bool precision_penalty, AnswerMatch* answer) const {
  const std::string a = vocab_->render(x0);
  const std::string b = vocab_->render(x_hat);
  ComponentScores s;
  s[Component::kToken] = token_accuracy(x0, x_hat, pattern);
  s[Component::kSemantic] = semantic_similarity(x0, x_hat, *embedding_);
  s[Component::kNumber] = number_retention(a, b, precision_penalty);
  AnswerMatch match = final_answer_match(a, b, extractor_);
  s[Component::kAnswer] = match.score;
  s[Component::kCharacter] = char_similarity(a, b);
  s[Component::kConfidence] = intrinsic_confidence(confidences);
  if (answer != nullptr) *answer = std::move(match);
  return s;
}

}  // namespace bmc
