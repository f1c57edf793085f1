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

// Synthetic subtraction problems with exact labels, and the JSONL format
// used to exchange candidate chains.
//
// Gold chains follow one template:
//
//   a = <n1> ; b = <n2> ; c = a - b = <n3> ; ANSWER <n3>
//
// Queries come in two phrasings. "compute <n1> minus <n2>" is the common
// one; "subtract <n2> from <n1>" lists the operands in the opposite order and
// is drawn with probability hard_fraction, so a model fitted on the corpus
// sees it rarely. Candidate chains may also be paraphrased: the same
// statements with other variable names or answer marker.

#ifndef BMC_CORPUS_H_
#define BMC_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bmc/tokens.h"

namespace bmc {

struct SyntheticProblem {
  std::string query;
  std::string gold_chain;
  long long gold_answer = 0;
  bool hard = false;
};

// Fault taxonomy for injected errors.
enum class Fault {
  kNone,
  kWrongAnswer,        // final answer differs from the computed value
  kWrongIntermediate,  // computed value is wrong and carried to the answer
  kSkippedStep,        // one statement of the chain is dropped
  kTokenDrift,         // one token is duplicated in place
};

const char* fault_name(Fault fault);

struct CorpusRecord {
  SyntheticProblem problem;
  std::string chain;
  Fault fault = Fault::kNone;

  bool correct() const { return fault == Fault::kNone; }
};

struct CorpusOptions {
  std::size_t n_problems = 1000;
  int number_min = 1;
  int number_max = 20;
  double error_rate = 0.4;
  double hard_fraction = 0.2;
  // Probability that a chain is written in one of the alternative surface
  // styles: other variable names, ":=" for "=", "," for ";", or "####" for
  // "ANSWER". Style does not affect correctness.
  double paraphrase_rate = 0.35;
  std::uint64_t seed = 0;
};

std::vector<CorpusRecord> generate_corpus(const CorpusOptions& options);

// Every token a corpus with this number range can produce, plus "<unk>".
Vocabulary synthetic_vocabulary(int number_min, int number_max);

std::string render_query(long long n1, long long n2, bool hard);
std::string render_gold_chain(long long n1, long long n2);

// One JSONL row: {"query": ..., "chain": ..., "answer": ..., "label": 0|1}.
// label 1 marks a correct chain.
struct JsonlRecord {
  std::string query;
  std::string chain;
  std::string answer;
  int label = 1;
};

JsonlRecord to_jsonl_record(const CorpusRecord& record);

void write_jsonl(std::ostream& out, const std::vector<JsonlRecord>& records);

// Throws kData on malformed lines, naming the line number.
std::vector<JsonlRecord> read_jsonl(std::istream& in);

}  // namespace bmc

#endif  // BMC_CORPUS_H_
