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

#include "bmc/corpus.h"

#include <istream>
#include <ostream>

#include "bmc/common.h"
#include "json.hpp"

namespace bmc {

namespace {

// Largest offset used when fabricating a wrong value.
constexpr int kMaxFaultOffset = 3;

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += words[i];
  }
  return out;
}

// Surface style of a chain: variable names, assignment symbol, statement
// separator and answer marker. Style 0 is the canonical template.
struct Style {
  const char* names[3];
  const char* assign;
  const char* separator;
  const char* marker;
};

constexpr Style kStyles[] = {
    {{"a", "b", "c"}, "=", ";", "ANSWER"},  {{"x", "y", "z"}, ":=", ",", "####"},
    {{"p", "q", "r"}, "=", ",", "ANSWER"},  {{"x", "y", "z"}, "=", ";", "####"},
    {{"p", "q", "r"}, ":=", ";", "####"},   {{"a", "b", "c"}, ":=", ",", "ANSWER"},
};
constexpr std::size_t kNumStyles = sizeof(kStyles) / sizeof(kStyles[0]);

std::vector<std::string> chain_words(long long n1, long long n2, long long n3, long long answer,
                                     const Style& style = kStyles[0]) {
  const std::string a = style.names[0];
  const std::string b = style.names[1];
  const std::string c = style.names[2];
  const std::string eq = style.assign;
  const std::string sep = style.separator;
  return {a, eq, std::to_string(n1), sep, b, eq, std::to_string(n2), sep,
          c, eq, a, "-", b, eq, std::to_string(n3), sep,
          style.marker, std::to_string(answer)};
}

long long fabricate(long long value, Rng& rng) {
  const long long offset = 1 + static_cast<long long>(rng.uniform_index(kMaxFaultOffset));
  const bool up = rng.bernoulli(0.5);
  if (up || value - offset < 0) return value + offset;
  return value - offset;
}

}  // namespace

const char* fault_name(Fault fault) {
  switch (fault) {
    case Fault::kNone:
      return "none";
    case Fault::kWrongAnswer:
      return "wrong_answer";
    case Fault::kWrongIntermediate:
      return "wrong_intermediate";
    case Fault::kSkippedStep:
      return "skipped_step";
    case Fault::kTokenDrift:
      return "token_drift";
  }
  return "unknown";
}

std::string render_query(long long n1, long long n2, bool hard) {
  if (hard) return "subtract " + std::to_string(n2) + " from " + std::to_string(n1);
  return "compute " + std::to_string(n1) + " minus " + std::to_string(n2);
}

std::string render_gold_chain(long long n1, long long n2) {
  return join(chain_words(n1, n2, n1 - n2, n1 - n2));
}

Vocabulary synthetic_vocabulary(int number_min, int number_max) {
  check_arg(number_min >= 0, "number range must be non-negative");
  if (number_min > number_max) fail(ErrorCode::kInvalidArgument, "empty number range");
  std::vector<std::string> tokens = {"<unk>", "compute", "minus", "subtract", "from", "a",
                                     "b",     "c",       "x",     "y",        "z",    "p",
                                     "q",     "r",       "=",     ":=",       ";",    ",",
                                     "-",     "ANSWER",  "####"};
  for (int n = 0; n <= number_max + kMaxFaultOffset; ++n) tokens.push_back(std::to_string(n));
  return Vocabulary(std::move(tokens));
}

std::vector<CorpusRecord> generate_corpus(const CorpusOptions& options) {
  if (options.number_min > options.number_max) {
    fail(ErrorCode::kInvalidArgument, "empty number range");
  }
  check_arg(options.number_min >= 0, "number range must be non-negative");
  check_arg(options.error_rate >= 0.0 && options.error_rate <= 1.0,
            "error_rate outside [0, 1]");
  check_arg(options.hard_fraction >= 0.0 && options.hard_fraction <= 1.0,
            "hard_fraction outside [0, 1]");
  check_arg(options.paraphrase_rate >= 0.0 && options.paraphrase_rate <= 1.0,
            "paraphrase_rate outside [0, 1]");

  const auto span = static_cast<std::uint64_t>(options.number_max - options.number_min + 1);
  std::vector<CorpusRecord> records;
  records.reserve(options.n_problems);
  for (std::size_t p = 0; p < options.n_problems; ++p) {
    // One stream per record keeps records independent of each other's faults.
    Rng rng(derive_seed(options.seed, seed_tag::kSample, p));
    const long long n1 = options.number_min + static_cast<long long>(rng.uniform_index(span));
    const long long n2 =
        options.number_min +
        static_cast<long long>(rng.uniform_index(static_cast<std::uint64_t>(n1 - options.number_min + 1)));
    const long long n3 = n1 - n2;
    const bool hard = rng.bernoulli(options.hard_fraction);

    CorpusRecord record;
    record.problem.query = render_query(n1, n2, hard);
    record.problem.gold_chain = render_gold_chain(n1, n2);
    record.problem.gold_answer = n3;
    record.problem.hard = hard;

    // Draw the fault decision first so that error_rate only changes labels.
    const bool faulty = rng.uniform() < options.error_rate;
    const auto kind = rng.uniform_index(4);
    std::size_t style = 0;
    if (rng.uniform() < options.paraphrase_rate) style = 1 + rng.uniform_index(kNumStyles - 1);
    const Style& st = kStyles[style];
    auto words = chain_words(n1, n2, n3, n3, st);
    if (faulty) {
      switch (kind) {
        case 0: {
          record.fault = Fault::kWrongAnswer;
          words = chain_words(n1, n2, n3, fabricate(n3, rng), st);
          break;
        }
        case 1: {
          record.fault = Fault::kWrongIntermediate;
          const long long wrong = fabricate(n3, rng);
          words = chain_words(n1, n2, wrong, wrong, st);
          break;
        }
        case 2: {
          record.fault = Fault::kSkippedStep;
          // Drop "b = n2 ;" (words 4..7) or "c = a - b = n3 ;" (words 8..15).
          if (rng.bernoulli(0.5)) {
            words.erase(words.begin() + 4, words.begin() + 8);
          } else {
            words.erase(words.begin() + 8, words.begin() + 16);
          }
          break;
        }
        default: {
          record.fault = Fault::kTokenDrift;
          const auto at = static_cast<std::ptrdiff_t>(rng.uniform_index(words.size()));
          words.insert(words.begin() + at, words[static_cast<std::size_t>(at)]);
          break;
        }
      }
    }
    record.chain = join(words);
    records.push_back(std::move(record));
  }
  return records;
}

JsonlRecord to_jsonl_record(const CorpusRecord& record) {
  return {record.problem.query, record.chain, std::to_string(record.problem.gold_answer),
          record.correct() ? 1 : 0};
}

void write_jsonl(std::ostream& out, const std::vector<JsonlRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json row;
    row["query"] = r.query;
    row["chain"] = r.chain;
    row["answer"] = r.answer;
    row["label"] = r.label;
    out << row.dump() << '\n';
  }
}

std::vector<JsonlRecord> read_jsonl(std::istream& in) {
  std::vector<JsonlRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::kData, where + ": " + e.what());
    }
    if (!row.is_object()) fail(ErrorCode::kData, where + ": expected an object");
    for (const char* key : {"query", "chain", "answer"}) {
      if (!row.contains(key) || !row[key].is_string()) {
        fail(ErrorCode::kData, where + ": missing string field \"" + key + "\"");
      }
    }
    if (!row.contains("label") || !row["label"].is_number_integer()) {
      fail(ErrorCode::kData, where + ": missing integer field \"label\"");
    }
    JsonlRecord r;
    r.query = row["query"].get<std::string>();
    r.chain = row["chain"].get<std::string>();
    r.answer = row["answer"].get<std::string>();
    r.label = row["label"].get<int>();
    if (r.label != 0 && r.label != 1) fail(ErrorCode::kData, where + ": label must be 0 or 1");
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace bmc
