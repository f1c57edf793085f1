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

#include "bmc/tabular_denoiser.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "bmc/common.h"
#include "json.hpp"

namespace bmc {

namespace {

constexpr const char* kFormat = "bmc-tabular-v1";

using Accumulator = std::map<std::uint64_t, std::map<TokenId, double>>;

TabularDenoiser::CountRow to_row(const std::map<TokenId, double>& counts) {
  TabularDenoiser::CountRow row;
  for (const auto& [token, c] : counts) {
    row.counts.emplace_back(token, c);
    row.total += c;
  }
  return row;
}

nlohmann::json row_to_json(const TabularDenoiser::CountRow& row) {
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [token, c] : row.counts) counts.push_back({token, c});
  return counts;
}

TabularDenoiser::CountRow row_from_json(const nlohmann::json& j) {
  TabularDenoiser::CountRow row;
  for (const auto& entry : j) {
    const auto token = entry.at(0).get<TokenId>();
    const auto c = entry.at(1).get<double>();
    row.counts.emplace_back(token, c);
    row.total += c;
  }
  return row;
}

}  // namespace

std::uint64_t TabularDenoiser::pair_key(std::size_t slot, std::size_t source,
                                        TokenId token) const {
  const std::uint64_t sources = max_length_ + max_context_;
  return (static_cast<std::uint64_t>(slot) * sources + source) * (vocab_size_ + 2) +
         static_cast<std::uint64_t>(token);
}

std::uint64_t TabularDenoiser::neighbor_key(std::size_t slot, TokenId left,
                                            TokenId right) const {
  const std::uint64_t width = vocab_size_ + 2;
  return (static_cast<std::uint64_t>(slot) * width + static_cast<std::uint64_t>(left)) * width +
         static_cast<std::uint64_t>(right);
}

double TabularDenoiser::prior(std::size_t slot, std::size_t token) const {
  const double v = static_cast<double>(vocab_size_);
  const double denom = slot_totals_[slot] + options_.smoothing * v;
  if (denom <= 0.0) return 1.0 / v;
  return (slot_counts_[slot * vocab_size_ + token] + options_.smoothing) / denom;
}

std::vector<TrainingChain> training_chains(std::span<const JsonlRecord> records,
                                           const Vocabulary& vocab) {
  std::vector<TrainingChain> out;
  for (const auto& r : records) {
    if (r.label == 1) out.push_back({vocab.encode(r.query), vocab.encode(r.chain)});
  }
  return out;
}

TabularDenoiser TabularDenoiser::fit(std::span<const TrainingChain> corpus,
                                     std::size_t vocab_size, const TabularOptions& options) {
  check_arg(!corpus.empty(), "fit_tabular: corpus is empty");
  check_arg(vocab_size > 0, "fit_tabular: empty vocabulary");
  check_arg(options.smoothing >= 0.0, "fit_tabular: smoothing must be non-negative");
  check_arg(options.pairwise_pool >= 0.0, "fit_tabular: pairwise_pool must be non-negative");

  TabularDenoiser model;
  model.vocab_size_ = vocab_size;
  model.options_ = options;
  for (const auto& example : corpus) {
    check_arg(!example.chain.empty(), "fit_tabular: empty chain");
    for (TokenId t : example.chain) {
      check_arg(t >= 0 && static_cast<std::size_t>(t) < vocab_size,
                "fit_tabular: chain token outside the content vocabulary");
    }
    for (TokenId t : example.context) {
      check_arg(t >= 0 && static_cast<std::size_t>(t) < vocab_size,
                "fit_tabular: context token outside the content vocabulary");
    }
    model.max_length_ = std::max(model.max_length_, example.chain.size());
    model.max_context_ = std::max(model.max_context_, example.context.size());
  }

  const std::size_t slots = model.max_length_;
  model.slot_counts_.assign(slots * vocab_size, 0.0);
  model.slot_totals_.assign(slots, 0.0);
  const auto bos = static_cast<TokenId>(vocab_size);
  const auto eos = static_cast<TokenId>(vocab_size + 1);

  Accumulator pairwise;
  Accumulator neighbors;
  std::map<TokenSequence, std::vector<std::map<TokenId, double>>> memory;

  for (const auto& example : corpus) {
    const auto& chain = example.chain;
    const std::size_t len = chain.size();
    std::vector<std::map<TokenId, double>>* memory_rows = nullptr;
    if (options.query_memory) {
      auto& rows = memory[example.context];
      rows.resize(slots);
      memory_rows = &rows;
    }
    for (std::size_t i = 0; i < len; ++i) {
      const TokenId target = chain[i];
      model.slot_counts_[i * vocab_size + static_cast<std::size_t>(target)] += 1.0;
      model.slot_totals_[i] += 1.0;
      if (memory_rows != nullptr) (*memory_rows)[i][target] += 1.0;

      if (options.pairwise_features) {
        for (std::size_t j = 0; j < len; ++j) {
          if (j != i) pairwise[model.pair_key(i, j, chain[j])][target] += 1.0;
        }
        for (std::size_t q = 0; q < example.context.size(); ++q) {
          pairwise[model.pair_key(i, slots + q, example.context[q])][target] += 1.0;
        }
      }
      if (options.neighbor_features) {
        // Every (left, right) pair that can be the nearest visible
        // neighbors under some masking of the positions in between.
        for (std::size_t l = 0; l <= i; ++l) {
          const TokenId left = l == 0 ? bos : chain[l - 1];
          for (std::size_t r = i + 1; r <= len; ++r) {
            const TokenId right = r == len ? eos : chain[r];
            neighbors[model.neighbor_key(i, left, right)][target] += 1.0;
          }
        }
      }
    }
  }

  for (const auto& [key, counts] : pairwise) model.pairwise_.emplace(key, to_row(counts));
  for (const auto& [key, counts] : neighbors) model.neighbors_.emplace(key, to_row(counts));
  for (const auto& [context, rows] : memory) {
    std::vector<CountRow> converted;
    converted.reserve(rows.size());
    for (const auto& counts : rows) converted.push_back(to_row(counts));
    model.memory_.emplace(context, std::move(converted));
  }
  return model;
}

DenoiserOutput TabularDenoiser::predict(std::span<const TokenId> context,
                                        std::span<const TokenId> sequence) const {
  DenoiserOutput out = empty_output(sequence);
  const TokenId mask = mask_id();
  const auto bos = static_cast<TokenId>(vocab_size_);
  const auto eos = static_cast<TokenId>(vocab_size_ + 1);
  const double scale = options_.smoothing;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  const std::vector<CountRow>* memory_rows = nullptr;
  if (options_.query_memory) {
    const auto it = memory_.find(TokenSequence(context.begin(), context.end()));
    if (it != memory_.end()) memory_rows = &it->second;
  }

  std::vector<double> logits(vocab_size_);
  std::vector<char> allowed(vocab_size_);
  for (std::size_t k = 0; k < out.rows(); ++k) {
    const std::size_t slot = out.positions[k];
    auto row = out.row(k);
    if (slot >= max_length_) {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(vocab_size_));
      continue;
    }

    for (std::size_t v = 0; v < vocab_size_; ++v) {
      const double p = prior(slot, v);
      logits[v] = p > 0.0 ? std::log(p) : kNegInf;
    }
    const std::vector<double> base = logits;

    auto apply = [&](const CountRow& evidence) {
      if (evidence.total <= 0.0) return;
      if (scale > 0.0) {
        for (const auto& [token, c] : evidence.counts) {
          const auto v = static_cast<std::size_t>(token);
          logits[v] += std::log1p(c / (prior(slot, v) * scale));
        }
        return;
      }
      // Unsmoothed: tokens never seen with this feature are ruled out.
      std::fill(allowed.begin(), allowed.end(), 0);
      for (const auto& [token, c] : evidence.counts) {
        const auto v = static_cast<std::size_t>(token);
        allowed[v] = 1;
        logits[v] += std::log(c / (prior(slot, v) * evidence.total));
      }
      for (std::size_t v = 0; v < vocab_size_; ++v) {
        if (!allowed[v]) logits[v] = kNegInf;
      }
    };
    auto lookup = [&](const std::unordered_map<std::uint64_t, CountRow>& table,
                      std::uint64_t key) {
      const auto it = table.find(key);
      if (it != table.end()) apply(it->second);
    };

    if (options_.neighbor_features) {
      TokenId left = bos;
      for (std::size_t j = slot; j-- > 0;) {
        if (sequence[j] != mask) {
          left = sequence[j];
          break;
        }
      }
      TokenId right = eos;
      for (std::size_t j = slot + 1; j < sequence.size(); ++j) {
        if (sequence[j] != mask) {
          right = sequence[j];
          break;
        }
      }
      lookup(neighbors_, neighbor_key(slot, left, right));
    }
    if (options_.pairwise_features) {
      const std::vector<double> before = logits;
      std::size_t features = 0;
      for (std::size_t j = 0; j < sequence.size() && j < max_length_; ++j) {
        if (j != slot && sequence[j] != mask) ++features;
      }
      features += std::min(context.size(), max_context_);
      for (std::size_t j = 0; j < sequence.size() && j < max_length_; ++j) {
        if (j == slot || sequence[j] == mask) continue;
        lookup(pairwise_, pair_key(slot, j, sequence[j]));
      }
      for (std::size_t q = 0; q < context.size() && q < max_context_; ++q) {
        if (context[q] < 0 || static_cast<std::size_t>(context[q]) >= vocab_size_) continue;
        lookup(pairwise_, pair_key(slot, max_length_ + q, context[q]));
      }
      if (options_.pairwise_pool > 0.0 && features > 0) {
        const double w =
            std::min(1.0, options_.pairwise_pool / static_cast<double>(features));
        for (std::size_t v = 0; v < vocab_size_; ++v) {
          if (std::isfinite(logits[v]) && std::isfinite(before[v])) {
            logits[v] = before[v] + w * (logits[v] - before[v]);
          }
        }
      }
    }
    if (memory_rows != nullptr) apply((*memory_rows)[slot]);

    double peak = kNegInf;
    for (double l : logits) peak = std::max(peak, l);
    if (peak == kNegInf) {
      // Contradictory unsmoothed evidence; fall back to the prior.
      logits = base;
      peak = *std::max_element(logits.begin(), logits.end());
    }
    double total = 0.0;
    for (std::size_t v = 0; v < vocab_size_; ++v) {
      row[v] = logits[v] == kNegInf ? 0.0 : std::exp(logits[v] - peak);
      total += row[v];
    }
    for (double& p : row) p /= total;
  }
  return out;
}

void TabularDenoiser::save(std::ostream& out) const {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["vocab_size"] = vocab_size_;
  j["max_length"] = max_length_;
  j["max_context"] = max_context_;
  j["options"] = {{"smoothing", options_.smoothing},
                  {"neighbor_features", options_.neighbor_features},
                  {"pairwise_features", options_.pairwise_features},
                  {"query_memory", options_.query_memory},
                  {"pairwise_pool", options_.pairwise_pool}};
  j["slot_counts"] = slot_counts_;

  auto dump_table = [](const std::unordered_map<std::uint64_t, CountRow>& table) {
    std::vector<std::uint64_t> keys;
    keys.reserve(table.size());
    for (const auto& entry : table) keys.push_back(entry.first);
    std::sort(keys.begin(), keys.end());
    nlohmann::json rows = nlohmann::json::array();
    for (auto key : keys) rows.push_back({key, row_to_json(table.at(key))});
    return rows;
  };
  j["pairwise"] = dump_table(pairwise_);
  j["neighbors"] = dump_table(neighbors_);

  nlohmann::json memory = nlohmann::json::array();
  for (const auto& [context, rows] : memory_) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& row : rows) slots.push_back(row_to_json(row));
    memory.push_back({context, slots});
  }
  j["memory"] = std::move(memory);
  out << j.dump() << '\n';
}

TabularDenoiser TabularDenoiser::load(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kData, std::string("tabular model: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      fail(ErrorCode::kData, "tabular model: unknown format");
    }
    TabularDenoiser model;
    model.vocab_size_ = j.at("vocab_size").get<std::size_t>();
    model.max_length_ = j.at("max_length").get<std::size_t>();
    model.max_context_ = j.at("max_context").get<std::size_t>();
    const auto& opts = j.at("options");
    model.options_.smoothing = opts.at("smoothing").get<double>();
    model.options_.neighbor_features = opts.at("neighbor_features").get<bool>();
    model.options_.pairwise_features = opts.at("pairwise_features").get<bool>();
    model.options_.query_memory = opts.at("query_memory").get<bool>();
    model.options_.pairwise_pool = opts.at("pairwise_pool").get<double>();
    model.slot_counts_ = j.at("slot_counts").get<std::vector<double>>();
    if (model.slot_counts_.size() != model.max_length_ * model.vocab_size_) {
      fail(ErrorCode::kData, "tabular model: slot table has the wrong size");
    }
    model.slot_totals_.assign(model.max_length_, 0.0);
    for (std::size_t s = 0; s < model.max_length_; ++s) {
      for (std::size_t v = 0; v < model.vocab_size_; ++v) {
        model.slot_totals_[s] += model.slot_counts_[s * model.vocab_size_ + v];
      }
    }
    for (const auto& entry : j.at("pairwise")) {
      model.pairwise_.emplace(entry.at(0).get<std::uint64_t>(), row_from_json(entry.at(1)));
    }
    for (const auto& entry : j.at("neighbors")) {
      model.neighbors_.emplace(entry.at(0).get<std::uint64_t>(), row_from_json(entry.at(1)));
    }
    for (const auto& entry : j.at("memory")) {
      std::vector<CountRow> rows;
      for (const auto& slot : entry.at(1)) rows.push_back(row_from_json(slot));
      model.memory_.emplace(entry.at(0).get<TokenSequence>(), std::move(rows));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kData, std::string("tabular model: ") + e.what());
  }
}

}  // namespace bmc
