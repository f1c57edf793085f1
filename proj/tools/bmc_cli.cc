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

// bmc_cli: corpus generation, denoiser fitting, diagnosis, MGRS, ablations,
// geometry reports and contraction-bound checks.
//
// Every run writes <name>.config.toml next to its outputs. Passing that file
// back with --config reproduces the outputs byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "bmc/common.h"
#include "bmc/corpus.h"
#include "bmc/evaluation.h"
#include "bmc/geometry_bounds.h"
#include "bmc/inference.h"
#include "bmc/reward.h"
#include "bmc/tabular_denoiser.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDegenerate = 4;
constexpr int kExitInternal = 1;

constexpr const char* kBundleFormat = "bmc-model-bundle-1";

int exit_code(bmc::ErrorCode code) {
  switch (code) {
    case bmc::ErrorCode::kInvalidArgument:
      return kExitConfig;
    case bmc::ErrorCode::kData:
      return kExitData;
    case bmc::ErrorCode::kDegenerate:
      return kExitDegenerate;
    case bmc::ErrorCode::kInternal:
      return kExitInternal;
  }
  return kExitInternal;
}

void report_error(const std::string& code, const std::string& message) {
  ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

// Collects output files in memory and publishes them together. Nothing is
// left behind when a run fails before commit().
class Outputs {
 public:
  Outputs(fs::path dir, std::string name) : dir_(std::move(dir)), name_(std::move(name)) {}

  fs::path path(const std::string& suffix) const { return dir_ / (name_ + suffix); }

  void add(const std::string& suffix, std::string content) {
    files_.emplace_back(path(suffix), std::move(content));
  }

  void commit() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) bmc::fail(bmc::ErrorCode::kData, "cannot create " + dir_.string() + ": " + ec.message());
    std::vector<fs::path> temps;
    try {
      for (const auto& [target, content] : files_) {
        fs::path tmp = target;
        tmp += ".tmp";
        std::ofstream out(tmp, std::ios::binary);
        if (!out) bmc::fail(bmc::ErrorCode::kData, "cannot write " + tmp.string());
        temps.push_back(tmp);
        out << content;
        out.close();
        if (!out) bmc::fail(bmc::ErrorCode::kData, "cannot write " + tmp.string());
      }
      for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(temps[i], files_[i].first);
    } catch (...) {
      for (const auto& tmp : temps) fs::remove(tmp, ec);
      throw;
    }
  }

 private:
  fs::path dir_;
  std::string name_;
  std::vector<std::pair<fs::path, std::string>> files_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bmc::fail(bmc::ErrorCode::kData, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<bmc::JsonlRecord> read_corpus(const std::string& path) {
  std::istringstream in(read_file(path));
  auto rows = bmc::read_jsonl(in);
  if (rows.empty()) bmc::fail(bmc::ErrorCode::kData, path + ": no records");
  return rows;
}

struct Model {
  bmc::Vocabulary vocab;
  bmc::TabularDenoiser denoiser;
};

Model load_model(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const ordered_json::parse_error& e) {
    bmc::fail(bmc::ErrorCode::kData, path + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kBundleFormat || !j.contains("vocabulary") ||
      !j.contains("denoiser")) {
    bmc::fail(bmc::ErrorCode::kData, path + ": not a model bundle");
  }
  bmc::Vocabulary vocab(j["vocabulary"].get<std::vector<std::string>>());
  std::istringstream in(j["denoiser"].dump());
  auto denoiser = bmc::TabularDenoiser::load(in);
  if (denoiser.vocab_size() != vocab.size()) {
    bmc::fail(bmc::ErrorCode::kData, path + ": vocabulary and denoiser disagree");
  }
  return {std::move(vocab), std::move(denoiser)};
}

std::string json_line(const ordered_json& j) { return j.dump() + "\n"; }

std::string json_doc(const ordered_json& j) { return j.dump(2) + "\n"; }

// "0,0.9,1" -> {0, 0.9, 1}. Lists are plain strings so that a snapshot
// reads back to the same text.
template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& flag) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream field(item);
    T value;
    if (!(field >> value) || !(field >> std::ws).eof()) {
      bmc::fail(bmc::ErrorCode::kInvalidArgument, flag + ": cannot parse '" + item + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) bmc::fail(bmc::ErrorCode::kInvalidArgument, flag + ": empty list");
  return out;
}

bmc::UnmaskPolicy parse_policy(const std::string& name) {
  if (name == "confidence") return bmc::UnmaskPolicy::kConfidenceOrdered;
  if (name == "posterior") return bmc::UnmaskPolicy::kPosterior;
  bmc::fail(bmc::ErrorCode::kInvalidArgument, "unknown policy '" + name + "'");
}

// Options shared by the commands that run BMC.
struct BmcFlags {
  double gamma = 0.9;
  int steps_k = 16;
  int ensemble = 4;
  int schedule_steps = 32;
  std::string policy = "confidence";
  bool precision_penalty = false;
  std::string weights;  // JSON file, uniform when empty
  std::size_t length = 18;

  void add(CLI::App* app) {
    app->add_option("--gamma", gamma, "masking ratio")->capture_default_str();
    app->add_option("--steps-k", steps_k, "reconstruction steps K")->capture_default_str();
    app->add_option("--ensemble", ensemble, "BMC ensemble size N_BMC")->capture_default_str();
    app->add_option("--schedule-steps", schedule_steps, "schedule length T")->capture_default_str();
    app->add_option("--policy", policy, "unmask policy: confidence|posterior")
        ->capture_default_str();
    app->add_flag("--precision-penalty", precision_penalty,
                  "multiply number retention by precision");
    app->add_option("--weights", weights, "component weights JSON file")->capture_default_str();
    app->add_option("--length", length, "generated chain length")->capture_default_str();
  }

  bmc::BmcConfig bmc(std::uint64_t seed) const {
    bmc::BmcConfig c;
    c.gamma = gamma;
    c.steps_k = steps_k;
    c.n_ensemble = ensemble;
    c.schedule_steps = schedule_steps;
    c.policy = parse_policy(policy);
    c.precision_penalty = precision_penalty;
    if (!weights.empty()) c.weights = bmc::Weights::from_json_text(read_file(weights));
    c.seed = seed;
    c.validate();
    return c;
  }

  bmc::GenerationConfig generation() const {
    bmc::GenerationConfig g;
    g.steps = schedule_steps;
    g.length = length;
    g.policy = parse_policy(policy);
    g.validate();
    return g;
  }
};

struct Common {
  std::string output_dir = ".";
  std::string name;
  std::uint64_t seed = 0;

  void add(CLI::App* app, const std::string& default_name, bool with_seed = true) {
    name = default_name;
    app->add_option("--output-dir", output_dir, "output directory")
        ->envname("BMC_OUTPUT_DIR")
        ->capture_default_str();
    app->add_option("--name", name, "output file prefix")->capture_default_str();
    if (with_seed) app->add_option("--seed", seed, "random seed")->capture_default_str();
  }
};

// Resolved options of `sub` as a config file section.
std::string snapshot(const CLI::App* sub) {
  return "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false);
}

std::vector<bmc::DiagnosisItem> diagnosis_items(const std::vector<bmc::JsonlRecord>& rows,
                                                const bmc::Vocabulary& vocab) {
  std::vector<bmc::DiagnosisItem> items;
  items.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    items.push_back({std::to_string(i), vocab.encode(rows[i].query),
                     vocab.encode(rows[i].chain), rows[i].label});
  }
  return items;
}

// ---------------------------------------------------------------- corpus

struct CorpusCmd {
  Common common;
  bmc::CorpusOptions options;

  void add(CLI::App* app) {
    common.add(app, "corpus");
    app->add_option("--n", options.n_problems, "number of problems")->capture_default_str();
    app->add_option("--number-min", options.number_min, "smallest operand")->capture_default_str();
    app->add_option("--number-max", options.number_max, "largest operand")->capture_default_str();
    app->add_option("--error-rate", options.error_rate, "fraction of faulty chains")->capture_default_str();
    app->add_option("--hard-fraction", options.hard_fraction, "share of reversed-operand queries")->capture_default_str();
    app->add_option("--paraphrase-rate", options.paraphrase_rate, "share of restyled chains")->capture_default_str();
  }

  void run(const CLI::App* sub) {
    options.seed = common.seed;
    const auto records = bmc::generate_corpus(options);
    std::vector<bmc::JsonlRecord> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(bmc::to_jsonl_record(r));
    std::ostringstream out;
    bmc::write_jsonl(out, rows);

    Outputs outputs(common.output_dir, common.name);
    outputs.add(".jsonl", out.str());
    outputs.add(".config.toml", snapshot(sub));
    outputs.commit();
  }
};

// ---------------------------------------------------------------- fit

struct FitCmd {
  Common common;
  std::string train;
  int number_min = 1;
  int number_max = 20;
  bmc::TabularOptions options;

  void add(CLI::App* app) {
    common.add(app, "model", false);
    app->add_option("--train", train, "JSONL corpus; label-1 rows are used")
        ->required()
        ->capture_default_str();
    app->add_option("--number-min", number_min, "vocabulary number range")->capture_default_str();
    app->add_option("--number-max", number_max)->capture_default_str();
    app->add_option("--smoothing", options.smoothing, "back-off pseudo-mass")->capture_default_str();
    app->add_option("--pairwise-pool", options.pairwise_pool, "total weight of pairwise features, 0 for none")->capture_default_str();
    app->add_option("--neighbor-features", options.neighbor_features)->capture_default_str();
    app->add_option("--pairwise-features", options.pairwise_features)->capture_default_str();
    app->add_option("--query-memory", options.query_memory)->capture_default_str();
  }

  void run(const CLI::App* sub) {
    const auto rows = read_corpus(train);
    // Synthetic tokens first, then anything else the corpus uses.
    auto tokens = bmc::synthetic_vocabulary(number_min, number_max).tokens();
    std::map<std::string, bool> known;
    for (const auto& t : tokens) known[t] = true;
    for (const auto& r : rows) {
      for (const auto* text : {&r.query, &r.chain}) {
        for (auto& w : bmc::split_whitespace(*text)) {
          if (!known[w]) {
            known[w] = true;
            tokens.push_back(w);
          }
        }
      }
    }
    bmc::Vocabulary vocab(tokens);
    const auto chains = bmc::training_chains(rows, vocab);
    if (chains.empty()) bmc::fail(bmc::ErrorCode::kData, train + ": no label-1 rows to fit on");
    const auto denoiser = bmc::TabularDenoiser::fit(chains, vocab.size(), options);

    std::ostringstream model;
    denoiser.save(model);
    ordered_json bundle;
    bundle["format"] = kBundleFormat;
    bundle["vocabulary"] = vocab.tokens();
    bundle["denoiser"] = ordered_json::parse(model.str());

    Outputs outputs(common.output_dir, common.name);
    outputs.add(".json", bundle.dump() + "\n");
    outputs.add(".config.toml", snapshot(sub));
    outputs.commit();
  }
};

// ---------------------------------------------------------------- diagnose

struct DiagnoseCmd {
  Common common;
  BmcFlags bmc;
  std::string corpus;
  std::string model;
  bool confidence = true;
  bool cross_entropy = false;
  int self_consistency = 0;
  int workers = 1;

  void add(CLI::App* app) {
    common.add(app, "diagnose");
    bmc.add(app);
    app->add_option("--corpus", corpus, "JSONL candidates")->required()->capture_default_str();
    app->add_option("--model", model, "model bundle from fit")->required()->capture_default_str();
    app->add_option("--confidence", confidence, "score the model-confidence baseline")
        ->capture_default_str();
    app->add_option("--cross-entropy", cross_entropy, "score s_ce")->capture_default_str();
    app->add_option("--self-consistency", self_consistency, "samples per query, 0 to skip")
        ->capture_default_str();
    app->add_option("--workers", workers, "worker threads")->capture_default_str();
  }

  void run(const CLI::App* sub) {
    const auto rows = read_corpus(corpus);
    const Model m = load_model(model);
    const bmc::MetricSuite metrics(m.vocab);
    bmc::DiagnosisOptions options;
    options.bmc = bmc.bmc(common.seed);
    options.generation = bmc.generation();
    options.confidence = confidence;
    options.cross_entropy = cross_entropy;
    options.self_consistency_samples = self_consistency;
    options.workers = workers;
    const auto items = diagnosis_items(rows, m.vocab);
    const auto d = bmc::diagnose(items, m.denoiser, metrics, options);

    ordered_json report;
    std::size_t positives = 0;
    for (const auto& r : d.records) positives += r.label == 1;
    report["records"] = d.records.size();
    report["correct"] = positives;
    ordered_json au = ordered_json::object();
    ordered_json ap = ordered_json::object();
    for (const auto& [score, value] : d.records.front().scores) {
      (void)value;
      au[score] = bmc::auroc(d.records, score);
      ap[score] = bmc::aupr(d.records, score);
    }
    report["auroc"] = au;
    report["aupr"] = ap;
    report["reconstruction_steps"] = d.reconstruction_steps;

    std::ostringstream records;
    bmc::write_records_jsonl(records, d.records);
    Outputs outputs(common.output_dir, common.name);
    outputs.add(".records.jsonl", records.str());
    outputs.add(".report.json", json_doc(report));
    outputs.add(".config.toml", snapshot(sub));
    outputs.commit();
  }
};

// ---------------------------------------------------------------- mgrs

struct MgrsCmd {
  Common common;
  BmcFlags bmc;
  std::string corpus;
  std::string model;
  double tau = 0.75;
  int budget = 10;
  std::size_t queries = 0;
  bmc::RewardConfig reward;
  long long reward_step = -1;
  int workers = 1;

  void add(CLI::App* app) {
    common.add(app, "mgrs");
    bmc.add(app);
    app->add_option("--corpus", corpus, "JSONL queries with gold answers")
        ->required()
        ->capture_default_str();
    app->add_option("--model", model, "model bundle from fit")->required()->capture_default_str();
    app->add_option("--tau", tau, "acceptance threshold")->capture_default_str();
    app->add_option("--budget", budget, "N_max samples per query")->capture_default_str();
    app->add_option("--queries", queries, "distinct queries to run, 0 for all")
        ->capture_default_str();
    app->add_option("--r-base", reward.r_base, "reward for a correct answer")->capture_default_str();
    app->add_option("--alpha-min", reward.alpha_min, "BMC weight at step 0")->capture_default_str();
    app->add_option("--alpha-max", reward.alpha_max, "BMC weight at T_train")->capture_default_str();
    app->add_option("--train-steps", reward.total_steps, "T_train for annealing")
        ->capture_default_str();
    app->add_option("--reward-step", reward_step, "annealing step, -1 for T_train")
        ->capture_default_str();
    app->add_option("--workers", workers, "worker threads")->capture_default_str();
  }

  void run(const CLI::App* sub) {
    const auto rows = read_corpus(corpus);
    const Model m = load_model(model);
    const bmc::MetricSuite metrics(m.vocab);
    bmc::MgrsConfig config;
    config.tau = tau;
    config.n_max = budget;
    config.bmc = bmc.bmc(common.seed);
    config.generation = bmc.generation();
    config.validate();
    reward.validate();
    const long long step = reward_step < 0 ? reward.total_steps : reward_step;

    // First occurrence of each query, in file order.
    std::vector<std::size_t> picked;
    std::map<std::string, bool> seen;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (seen[rows[i].query]) continue;
      seen[rows[i].query] = true;
      picked.push_back(i);
      if (queries > 0 && picked.size() == queries) break;
    }

    struct Result {
      bmc::MgrsOutcome outcome;
      std::string chosen_text;
      std::optional<std::string> answer;
      std::optional<std::string> first_answer;
      bool correct = false;
      bool first_correct = false;
      double reward = 0.0;
    };
    std::vector<Result> results(picked.size());
    const auto& extractor = metrics.extractor();
    bmc::parallel_for(picked.size(), workers, [&](std::size_t k) {
      const auto& row = rows[picked[k]];
      const auto query = m.vocab.encode(row.query);
      const std::uint64_t seed = bmc::derive_seed(common.seed, bmc::seed_tag::kQuery, k);
      Result r;
      r.outcome = bmc::mgrs(query, m.denoiser, metrics, config, seed);
      r.chosen_text = m.vocab.render(r.outcome.chosen);
      const std::string gold = extractor.extract(row.answer).answer.value_or(row.answer);
      r.answer = extractor.extract(r.chosen_text).answer;
      r.correct = r.answer && *r.answer == gold;
      // The single-sample baseline is MGRS's own first candidate.
      const auto first =
          bmc::generate(query, m.denoiser, config.generation, bmc::candidate_seed(seed, 0));
      r.first_answer = extractor.extract(m.vocab.render(first.sequence)).answer;
      r.first_correct = r.first_answer && *r.first_answer == gold;
      r.reward = bmc::gated_reward(r.chosen_text, row.answer, extractor,
                                   std::clamp(r.outcome.score, 0.0, 1.0), step, reward);
      results[k] = std::move(r);
    });

    std::string lines;
    double correct = 0.0, first_correct = 0.0, samples = 0.0, early = 0.0, rewards = 0.0;
    long long generation_steps = 0, reconstruction_steps = 0;
    for (std::size_t k = 0; k < picked.size(); ++k) {
      const auto& row = rows[picked[k]];
      const auto& r = results[k];
      ordered_json j;
      j["query_id"] = std::to_string(picked[k]);
      j["query"] = row.query;
      j["gold"] = row.answer;
      j["chosen"] = r.chosen_text;
      j["answer"] = r.answer ? ordered_json(*r.answer) : ordered_json(nullptr);
      j["correct"] = r.correct;
      j["chosen_index"] = r.outcome.chosen_index;
      j["score"] = r.outcome.score;
      j["samples_used"] = r.outcome.samples_used;
      j["early_exit"] = r.outcome.early_exit;
      j["scores"] = r.outcome.scores;
      j["generation_steps"] = r.outcome.generation_steps;
      j["reconstruction_steps"] = r.outcome.reconstruction_steps;
      j["reward"] = r.reward;
      lines += json_line(j);
      correct += r.correct;
      first_correct += r.first_correct;
      samples += r.outcome.samples_used;
      early += r.outcome.early_exit;
      rewards += r.reward;
      generation_steps += r.outcome.generation_steps;
      reconstruction_steps += r.outcome.reconstruction_steps;
    }
    const double n = static_cast<double>(picked.size());
    ordered_json summary;
    summary["queries"] = picked.size();
    summary["accuracy"] = correct / n;
    summary["single_sample_accuracy"] = first_correct / n;
    summary["mean_samples"] = samples / n;
    summary["early_exit_rate"] = early / n;
    summary["sample_efficiency"] =
        samples / n > 1.0
            ? ordered_json(bmc::sample_efficiency(100.0 * correct / n, 100.0 * first_correct / n,
                                                  samples / n))
            : ordered_json(nullptr);
    summary["generation_steps"] = generation_steps;
    summary["reconstruction_steps"] = reconstruction_steps;
    summary["total_steps"] = generation_steps + reconstruction_steps;
    summary["mean_reward"] = rewards / n;

    Outputs outputs(common.output_dir, common.name);
    outputs.add(".outcomes.jsonl", lines);
    outputs.add(".summary.json", json_doc(summary));
    outputs.add(".config.toml", snapshot(sub));
    outputs.commit();
  }
};

// ---------------------------------------------------------------- ablate

struct AblateCmd {
  Common common;
  BmcFlags bmc;
  std::string corpus;
  std::string model;
  std::string axis = "gamma";
  std::string grid = "0,0.9,1";
  std::string seeds = "0,1,2,3,4";
  int workers = 1;

  void add(CLI::App* app) {
    common.add(app, "ablate", false);
    bmc.add(app);
    app->add_option("--corpus", corpus, "JSONL candidates")->required()->capture_default_str();
    app->add_option("--model", model, "model bundle from fit")->required()->capture_default_str();
    app->add_option("--axis", axis, "steps|gamma|ensemble|components")->capture_default_str();
    app->add_option("--grid", grid, "values along the axis")->capture_default_str();
    app->add_option("--seeds", seeds, "BMC seeds")->capture_default_str();
    app->add_option("--workers", workers, "worker threads")->capture_default_str();
  }

  void run(const CLI::App* sub) {
    bmc::AblationAxis a;
    if (axis == "steps") {
      a = bmc::AblationAxis::kSteps;
    } else if (axis == "gamma") {
      a = bmc::AblationAxis::kGamma;
    } else if (axis == "ensemble") {
      a = bmc::AblationAxis::kEnsemble;
    } else if (axis == "components") {
      a = bmc::AblationAxis::kComponents;
    } else {
      bmc::fail(bmc::ErrorCode::kInvalidArgument, "unknown axis '" + axis + "'");
    }
    const auto rows = read_corpus(corpus);
    const Model m = load_model(model);
    const bmc::MetricSuite metrics(m.vocab);
    bmc::DiagnosisOptions base;
    base.bmc = bmc.bmc(0);
    base.generation = bmc.generation();
    base.workers = workers;
    const auto items = diagnosis_items(rows, m.vocab);
    const auto table = bmc::ablation_suite(items, m.denoiser, metrics, base, a,
                                           parse_list<double>(grid, "--grid"),
                                           parse_list<std::uint64_t>(seeds, "--seeds"));
    std::ostringstream csv;
    bmc::write_ablation_csv(csv, table);

    Outputs outputs(common.output_dir, common.name);
    outputs.add(".csv", csv.str());
    outputs.add(".config.toml", snapshot(sub));
    outputs.commit();
  }
};

// ---------------------------------------------------------------- geometry

struct GeometryCmd {
  Common common;
  std::string records;
  bmc::GeometryOptions options;

  void add(CLI::App* app) {
    common.add(app, "geometry", false);
    app->add_option("--records", records, "records JSONL from diagnose")
        ->required()
        ->capture_default_str();
    app->add_option("--bins", options.bins, "equal-count density bins")->capture_default_str();
    app->add_option("--absolute-density", options.absolute_density,
                    "read density thresholds as raw densities")
        ->capture_default_str();
    app->add_option("--density-high", options.density_high, "high-density threshold (percentile)")->capture_default_str();
    app->add_option("--density-low", options.density_low, "low-density threshold (percentile)")->capture_default_str();
    app->add_option("--quality-low", options.quality_low)->capture_default_str();
    app->add_option("--quality-high", options.quality_high)->capture_default_str();
  }

  void run(const CLI::App* sub) {
    std::istringstream in(read_file(records));
    const auto rows = bmc::read_records_jsonl(in);
    const auto g = bmc::geometric_validation(rows, options);

    ordered_json report;
    report["n"] = g.n;
    report["spearman_rho"] = g.spearman_rho;
    report["r_squared"] = g.r_squared;
    report["high_density_low_quality"] = g.high_density_low_quality;
    report["low_density_high_quality"] = g.low_density_high_quality;
    report["density_high_threshold"] = g.density_high_threshold;
    report["density_low_threshold"] = g.density_low_threshold;
    report["chi_squared"] = {{"statistic", g.chi_squared.statistic},
                             {"df", g.chi_squared.df},
                             {"p_value", g.chi_squared.p_value}};
    ordered_json bins = ordered_json::array();
    for (const auto& b : g.bin_counts) {
      bins.push_back({{"correct", static_cast<long long>(b[0])},
                      {"incorrect", static_cast<long long>(b[1])}});
    }
    report["bins"] = bins;

    std::string points = "query_id,label,density,quality\n";
    char buf[128];
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%d,%.17g,%.17g\n", g.points[i].label,
                    g.points[i].density, g.points[i].quality);
      points += rows[i].query_id + buf;
    }

    Outputs outputs(common.output_dir, common.name);
    outputs.add(".report.json", json_doc(report));
    outputs.add(".points.csv", points);
    outputs.add(".config.toml", snapshot(sub));
    outputs.commit();
  }
};

// ---------------------------------------------------------------- bounds

struct BoundsCmd {
  Common common;
  std::string kappas = "0,0.25,0.5,0.9";
  int operators = 5;
  std::size_t dimension = 8;
  std::size_t samples = 10000;

  void add(CLI::App* app) {
    common.add(app, "bounds");
    app->add_option("--kappas", kappas, "contraction rates")->capture_default_str();
    app->add_option("--operators", operators, "random operators per rate")->capture_default_str();
    app->add_option("--dimension", dimension, "operator dimension")->capture_default_str();
    app->add_option("--samples", samples, "points per operator")->capture_default_str();
  }

  void run(const CLI::App* sub) {
    ordered_json rows = ordered_json::array();
    std::size_t violations = 0;
    double worst = 0.0;
    std::uint64_t index = 0;
    auto check = [&](const bmc::ContractionOperator& op, const std::string& kind) {
      const auto r = bmc::verify_bound(op, samples, bmc::derive_seed(common.seed, bmc::seed_tag::kSample, index));
      rows.push_back({{"operator", index},
                      {"kind", kind},
                      {"kappa", op.kappa()},
                      {"samples", r.samples},
                      {"max_violation", r.max_violation},
                      {"max_gap", r.max_gap},
                      {"violations", r.violations}});
      violations += r.violations;
      worst = std::max(worst, r.max_violation);
      ++index;
    };
    for (double kappa : parse_list<double>(kappas, "--kappas")) {
      for (int i = 0; i < operators; ++i) {
        check(bmc::ContractionOperator::random(
                  dimension, kappa, bmc::derive_seed(common.seed, bmc::seed_tag::kCandidate, index)),
              "random");
      }
      check(bmc::ContractionOperator::scalar(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension)), kappa),
            "scalar");
    }
    ordered_json report;
    report["operators"] = rows.size();
    report["tolerance"] = bmc::kBoundTolerance;
    report["violations"] = violations;
    report["max_violation"] = worst;
    report["results"] = rows;

    Outputs outputs(common.output_dir, common.name);
    outputs.add(".report.json", json_doc(report));
    outputs.add(".config.toml", snapshot(sub));
    outputs.commit();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bidirectional manifold consistency experiments"};
  app.set_config("--config", "", "TOML config; command-line flags take precedence");
  app.fallthrough();
  app.require_subcommand(1);

  CorpusCmd corpus;
  FitCmd fit;
  DiagnoseCmd diagnose;
  MgrsCmd mgrs;
  AblateCmd ablate;
  GeometryCmd geometry;
  BoundsCmd bounds;
  auto* c_corpus = app.add_subcommand("corpus", "generate a synthetic JSONL corpus");
  auto* c_fit = app.add_subcommand("fit", "fit the tabular denoiser");
  auto* c_diagnose = app.add_subcommand("diagnose", "score candidates and report AUROC/AUPR");
  auto* c_mgrs = app.add_subcommand("mgrs", "manifold-guided rejection sampling");
  auto* c_ablate = app.add_subcommand("ablate", "AUROC/AUPR over a parameter grid");
  auto* c_geometry = app.add_subcommand("geometry", "density/quality analysis of records");
  auto* c_bounds = app.add_subcommand("bounds", "check the contraction residual bound");
  corpus.add(c_corpus);
  fit.add(c_fit);
  diagnose.add(c_diagnose);
  mgrs.add(c_mgrs);
  ablate.add(c_ablate);
  geometry.add(c_geometry);
  bounds.add(c_bounds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("invalid_argument", e.what());
    return kExitConfig;
  }

  try {
    if (c_corpus->parsed()) corpus.run(c_corpus);
    if (c_fit->parsed()) fit.run(c_fit);
    if (c_diagnose->parsed()) diagnose.run(c_diagnose);
    if (c_mgrs->parsed()) mgrs.run(c_mgrs);
    if (c_ablate->parsed()) ablate.run(c_ablate);
    if (c_geometry->parsed()) geometry.run(c_geometry);
    if (c_bounds->parsed()) bounds.run(c_bounds);
  } catch (const bmc::Error& e) {
    report_error(bmc::error_code_name(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitInternal;
  }
  return kExitOk;
}
