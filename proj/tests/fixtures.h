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

// The desk-scale setup shared by the heavier tests: a tabular denoiser fitted
// on 2000 correct synthetic chains, and labelled evaluation corpora.

#ifndef BMC_TESTS_FIXTURES_H_
#define BMC_TESTS_FIXTURES_H_

#include <string>
#include <vector>

#include "bmc/corpus.h"
#include "bmc/evaluation.h"
#include "bmc/tabular_denoiser.h"

namespace bmc::fixture {

struct DeskModel {
  Vocabulary vocab;
  TabularDenoiser denoiser;
};

inline const DeskModel& desk_model() {
  static const DeskModel model = [] {
    Vocabulary vocab = synthetic_vocabulary(1, 20);
    CorpusOptions o;
    o.n_problems = 2000;
    o.error_rate = 0.0;
    o.seed = 101;
    std::vector<JsonlRecord> rows;
    for (const auto& r : generate_corpus(o)) rows.push_back(to_jsonl_record(r));
    const auto chains = training_chains(rows, vocab);
    return DeskModel{vocab, TabularDenoiser::fit(chains, vocab.size())};
  }();
  return model;
}

struct EvalSet {
  std::vector<CorpusRecord> records;
  std::vector<DiagnosisItem> items;
};

inline EvalSet eval_set(std::size_t n, double error_rate, std::uint64_t seed) {
  const Vocabulary& vocab = desk_model().vocab;
  CorpusOptions o;
  o.n_problems = n;
  o.error_rate = error_rate;
  o.seed = seed;
  EvalSet s;
  s.records = generate_corpus(o);
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const auto& r = s.records[i];
    s.items.push_back({std::to_string(i), vocab.encode(r.problem.query), vocab.encode(r.chain),
                       r.correct() ? 1 : 0});
  }
  return s;
}

// Six quality levels; level j holds 3^j identical points, so density rises
// with quality. Identical points get identical densities.
inline std::vector<VerificationRecord> constructed_geometry(int levels = 6) {
  std::vector<VerificationRecord> r;
  int copies = 1;
  for (int j = 0; j < levels; ++j, copies *= 3) {
    const double v = 0.2 + 0.15 * j;
    for (int c = 0; c < copies; ++c) {
      VerificationRecord rec;
      rec.query_id = std::to_string(r.size());
      ComponentScores cs;
      cs.values.fill(v);
      rec.components = cs;
      rec.label = (c + j) % 2;
      rec.scores["bmc"] = v;
      r.push_back(rec);
    }
  }
  return r;
}

}  // namespace bmc::fixture

#endif  // BMC_TESTS_FIXTURES_H_
