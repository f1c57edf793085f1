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

#include "bmc/evaluation.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "bmc/common.h"
#include "json.hpp"

namespace bmc {

namespace {

void check_labels(std::span<const double> scores, std::span<const int> labels) {
  check_arg(scores.size() == labels.size(), "scores and labels differ in length");
  for (int l : labels) check_arg(l == 0 || l == 1, "labels must be 0 or 1");
  for (double s : scores) check_arg(!std::isnan(s), "score is NaN");
}

// 1-based ranks, ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::pair<std::vector<double>, std::vector<int>> column(
    std::span<const VerificationRecord> records, const std::string& score) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& r : records) {
    const auto it = r.scores.find(score);
    if (it == r.scores.end()) {
      fail(ErrorCode::kData, "record " + r.query_id + " has no score \"" + score + "\"");
    }
    scores.push_back(it->second);
    labels.push_back(r.label);
  }
  return {std::move(scores), std::move(labels)};
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    fail(ErrorCode::kDegenerate, "AUROC is undefined with a single class");
  }
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i] == 1) rank_sum += ranks[i];
  }
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double auroc(std::span<const VerificationRecord> records, const std::string& score) {
  const auto [s, l] = column(records, score);
  return auroc(s, l);
}

double aupr(std::span<const double> scores, std::span<const int> labels) {
  check_labels(scores, labels);
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) fail(ErrorCode::kDegenerate, "AUPR is undefined without positives");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double area = 0.0;
  double previous_recall = 0.0;
  std::size_t tp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Every record tied at this threshold enters together.
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) ++tp;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    area += (recall - previous_recall) * precision;
    previous_recall = recall;
    i = j;
  }
  return area;
}

double aupr(std::span<const VerificationRecord> records, const std::string& score) {
  const auto [s, l] = column(records, score);
  return aupr(s, l);
}

double sample_efficiency(double acc, double acc_std, double n_avg) {
  check_arg(n_avg > 1.0, "sample efficiency needs an average sample count above 1");
  return (acc - acc_std) / (n_avg - 1.0);
}

double cross_entropy_score(std::span<const TokenId> x0, std::span<const StepRecord> steps) {
  double nll = 0.0;
  std::size_t count = 0;
  for (const auto& step : steps) {
    for (const auto& r : step.revealed) {
      check_arg(r.position < x0.size(), "cross_entropy_score: position outside x0");
      if (r.distribution.empty()) {
        fail(ErrorCode::kInvalidArgument, "cross_entropy_score: transcript has no distributions");
      }
      nll -= std::log(r.distribution.at(static_cast<std::size_t>(x0[r.position])));
      ++count;
    }
  }
  if (count == 0) fail(ErrorCode::kInvalidArgument, "cross_entropy_score: missing transcripts");
  return std::exp(-nll / static_cast<double>(count));
}

Diagnosis diagnose(std::span<const DiagnosisItem> items, const Denoiser& denoiser,
                   const MetricSuite& metrics, const DiagnosisOptions& options) {
  options.bmc.validate();
  options.generation.validate();
  check_arg(options.workers >= 1, "workers must be >= 1");
  check_arg(options.self_consistency_samples >= 0, "self-consistency sample count is negative");
  const Vocabulary& vocab = metrics.vocabulary();

  // Self-consistency samples are drawn once per distinct query.
  std::map<TokenSequence, std::size_t> query_index;
  std::vector<const TokenSequence*> queries;
  for (const auto& item : items) {
    if (query_index.emplace(item.query, queries.size()).second) queries.push_back(&item.query);
  }
  const int workers = denoiser.concurrent() ? options.workers : 1;
  std::vector<std::vector<std::optional<std::string>>> votes(queries.size());
  if (options.self_consistency_samples > 0) {
    parallel_for(queries.size(), workers, [&](std::size_t q) {
      const auto sc = self_consistency(*queries[q], denoiser, metrics,
                                       options.self_consistency_samples, options.generation,
                                       derive_seed(options.bmc.seed, seed_tag::kSample, q));
      votes[q] = sc.answers;
    });
  }

  Diagnosis d;
  d.records.resize(items.size());
  std::vector<long long> steps(items.size(), 0);
  parallel_for(items.size(), workers, [&](std::size_t i) {
    const DiagnosisItem& item = items[i];
    BmcConfig config = options.bmc;
    config.seed = derive_seed(options.bmc.seed, seed_tag::kQuery, i);
    config.workers = 1;
    config.keep_distributions = options.cross_entropy;
    const BmcResult result = bmc_score(item.candidate, item.query, denoiser, metrics, config);

    VerificationRecord& r = d.records[i];
    r.query_id = item.query_id;
    r.query = vocab.render(item.query);
    r.candidate = vocab.render(item.candidate);
    r.label = item.label;
    r.components = result.component_means;
    r.scores[kScoreBmc] = result.mean_composite;
    if (options.confidence) {
      r.scores[kScoreConfidence] =
          model_confidence(item.query, item.candidate, denoiser, options.generation);
    }
    if (options.cross_entropy) {
      double total = 0.0;
      for (const auto& rep : result.repetitions) {
        total += rep.steps.empty() ? 1.0 : cross_entropy_score(item.candidate, rep.steps);
      }
      r.scores[kScoreCrossEntropy] = total / static_cast<double>(result.repetitions.size());
    }
    if (options.self_consistency_samples > 0) {
      const auto answer = metrics.extractor().extract(r.candidate).answer;
      const auto& samples = votes[query_index.at(item.query)];
      std::size_t agree = 0;
      if (answer) {
        for (const auto& a : samples) agree += (a && *a == *answer) ? 1 : 0;
      }
      r.scores[kScoreSelfConsistency] =
          static_cast<double>(agree) / static_cast<double>(samples.size());
    }
    steps[i] = result.reconstruction_steps;
  });
  d.reconstruction_steps = std::accumulate(steps.begin(), steps.end(), 0LL);
  return d;
}

const char* ablation_axis_name(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kSteps:
      return "K";
    case AblationAxis::kGamma:
      return "gamma";
    case AblationAxis::kEnsemble:
      return "n_ensemble";
    case AblationAxis::kComponents:
      return "components";
  }
  return "unknown";
}

namespace {

std::string format_setting(const char* name, double value) {
  std::ostringstream s;
  s << name << '=' << value;
  return s.str();
}

std::vector<int> labels_of(std::span<const VerificationRecord> records) {
  std::vector<int> labels;
  for (const auto& r : records) labels.push_back(r.label);
  return labels;
}

}  // namespace

std::vector<AblationRow> ablation_suite(std::span<const DiagnosisItem> items,
                                        const Denoiser& denoiser, const MetricSuite& metrics,
                                        const DiagnosisOptions& base, AblationAxis axis,
                                        std::span<const double> grid,
                                        std::span<const std::uint64_t> seeds) {
  check_arg(!seeds.empty(), "ablation needs at least one seed");
  check_arg(axis == AblationAxis::kComponents || !grid.empty(), "ablation grid is empty");
  const double per_item = 1.0 / static_cast<double>(std::max<std::size_t>(items.size(), 1));
  std::vector<AblationRow> rows;
  for (const std::uint64_t seed : seeds) {
    DiagnosisOptions options = base;
    options.bmc.seed = seed;
    options.confidence = false;
    options.self_consistency_samples = 0;
    options.cross_entropy = false;

    if (axis == AblationAxis::kComponents) {
      options.cross_entropy = true;
      const Diagnosis d = diagnose(items, denoiser, metrics, options);
      const double cost = options.generation.steps + d.reconstruction_steps * per_item;
      const auto labels = labels_of(d.records);
      auto add = [&](const std::string& name, const std::vector<double>& scores) {
        rows.push_back({name, seed, auroc(scores, labels), aupr(scores, labels), cost});
      };
      const auto& names = component_names();
      for (std::size_t k = 0; k < kNumComponents; ++k) {
        std::vector<double> s;
        for (const auto& r : d.records) s.push_back(r.components->values[k]);
        add(std::string(names[k]), s);
      }
      std::vector<double> uniform;
      std::vector<double> with_ce;
      for (const auto& r : d.records) {
        const double sum = std::accumulate(r.components->values.begin(),
                                           r.components->values.end(), 0.0);
        uniform.push_back(sum / static_cast<double>(kNumComponents));
        with_ce.push_back((sum + r.scores.at(kScoreCrossEntropy)) /
                          static_cast<double>(kNumComponents + 1));
      }
      add("uniform", uniform);
      add("uniform+s_ce", with_ce);
      continue;
    }

    for (const double value : grid) {
      DiagnosisOptions o = options;
      switch (axis) {
        case AblationAxis::kSteps:
          check_arg(value >= 1.0 && value == std::floor(value), "K grid values must be integers");
          o.bmc.steps_k = static_cast<int>(value);
          o.bmc.schedule_steps = std::max(o.bmc.schedule_steps, o.bmc.steps_k);
          break;
        case AblationAxis::kGamma:
          o.bmc.gamma = value;
          break;
        case AblationAxis::kEnsemble:
          check_arg(value >= 1.0 && value == std::floor(value),
                    "ensemble grid values must be integers");
          o.bmc.n_ensemble = static_cast<int>(value);
          break;
        case AblationAxis::kComponents:
          break;
      }
      const Diagnosis d = diagnose(items, denoiser, metrics, o);
      rows.push_back({format_setting(ablation_axis_name(axis), value), seed,
                      auroc(d.records, kScoreBmc), aupr(d.records, kScoreBmc),
                      o.generation.steps + d.reconstruction_steps * per_item});
    }
  }
  return rows;
}

WeightFit fit_weights(std::span<const VerificationRecord> records, int resolution) {
  check_arg(resolution >= 1, "fit_weights: resolution must be >= 1");
  check_arg(!records.empty(), "fit_weights: no records");
  for (const auto& r : records) {
    if (!r.components) fail(ErrorCode::kData, "fit_weights: record without components");
  }
  const auto labels = labels_of(records);
  WeightFit best;
  best.auroc = -1.0;
  std::array<int, kNumComponents> parts{};
  std::vector<double> scores(records.size());
  // Enumerates compositions of `resolution` into kNumComponents parts.
  auto visit = [&](auto&& self, std::size_t k, int left) -> void {
    if (k + 1 == kNumComponents) {
      parts[k] = left;
      Weights w;
      for (std::size_t j = 0; j < kNumComponents; ++j) {
        w.lambda[j] = static_cast<double>(parts[j]) / static_cast<double>(resolution);
      }
      for (std::size_t i = 0; i < records.size(); ++i) {
        scores[i] = composite(*records[i].components, w);
      }
      const double a = auroc(scores, labels);
      if (a > best.auroc) best = {w, a};
      return;
    }
    for (int p = left; p >= 0; --p) {
      parts[k] = p;
      self(self, k + 1, left - p);
    }
  };
  visit(visit, 0, resolution);
  return best;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_arg(x.size() == y.size(), "pearson: length mismatch");
  check_arg(x.size() >= 2, "pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::kDegenerate, "correlation of a constant series");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_arg(x.size() == y.size(), "spearman: length mismatch");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double percentile(std::span<const double> values, double p) {
  check_arg(!values.empty(), "percentile of an empty set");
  check_arg(p >= 0.0 && p <= 100.0, "percentile outside [0, 100]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ChiSquared chi_squared_independence(const std::vector<std::vector<double>>& table) {
  check_arg(table.size() >= 2, "chi-squared: need at least two rows");
  const std::size_t cols = table.front().size();
  check_arg(cols >= 2, "chi-squared: need at least two columns");
  std::vector<double> row_sums(table.size(), 0.0);
  std::vector<double> col_sums(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    check_arg(table[r].size() == cols, "chi-squared: ragged table");
    for (std::size_t c = 0; c < cols; ++c) {
      check_arg(table[r][c] >= 0.0, "chi-squared: negative count");
      row_sums[r] += table[r][c];
      col_sums[c] += table[r][c];
      total += table[r][c];
    }
  }
  for (double s : row_sums) {
    if (s == 0.0) fail(ErrorCode::kDegenerate, "chi-squared: empty row");
  }
  for (double s : col_sums) {
    if (s == 0.0) fail(ErrorCode::kDegenerate, "chi-squared: empty column");
  }
  ChiSquared out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double expected = row_sums[r] * col_sums[c] / total;
      out.statistic += (table[r][c] - expected) * (table[r][c] - expected) / expected;
    }
  }
  out.df = static_cast<int>((table.size() - 1) * (cols - 1));
  const boost::math::chi_squared dist(out.df);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

std::vector<double> kde_scott(std::span<const std::array<double, kNumComponents>> points) {
  check_arg(points.size() >= 2, "KDE needs at least two points");
  const double n = static_cast<double>(points.size());
  std::vector<std::size_t> dims;
  std::vector<double> sigma;
  for (std::size_t d = 0; d < kNumComponents; ++d) {
    double mean = 0.0;
    for (const auto& p : points) mean += p[d];
    mean /= n;
    double ss = 0.0;
    for (const auto& p : points) ss += (p[d] - mean) * (p[d] - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd > 0.0) {
      dims.push_back(d);
      sigma.push_back(sd);
    }
  }
  if (dims.empty()) fail(ErrorCode::kDegenerate, "KDE: every feature is constant");
  const double factor = std::pow(n, -1.0 / (static_cast<double>(dims.size()) + 4.0));
  std::vector<double> h(dims.size());
  double norm = 1.0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    h[j] = factor * sigma[j];
    norm *= h[j] * std::sqrt(2.0 * M_PI);
  }
  std::vector<double> density(points.size(), 0.0);
  for (std::size_t a = 0; a < points.size(); ++a) {
    double sum = 0.0;
    for (std::size_t b = 0; b < points.size(); ++b) {
      double exponent = 0.0;
      for (std::size_t j = 0; j < dims.size(); ++j) {
        const double z = (points[a][dims[j]] - points[b][dims[j]]) / h[j];
        exponent += z * z;
      }
      sum += std::exp(-0.5 * exponent);
    }
    density[a] = sum / (n * norm);
  }
  return density;
}

GeometryReport geometric_validation(std::span<const VerificationRecord> records,
                                    const GeometryOptions& options) {
  check_arg(options.bins >= 2, "geometry: need at least two density bins");
  if (records.size() < options.min_records) {
    fail(ErrorCode::kData, "geometry: need at least " + std::to_string(options.min_records) +
                               " records, got " + std::to_string(records.size()));
  }
  GeometryReport report;
  report.n = records.size();
  std::vector<std::array<double, kNumComponents>> features;
  for (const auto& r : records) {
    if (!r.components) fail(ErrorCode::kData, "geometry: record " + r.query_id + " has no components");
    features.push_back(r.components->values);
  }
  const auto density = kde_scott(features);

  std::vector<double> quality;
  for (std::size_t i = 0; i < records.size(); ++i) {
    GeometryPoint p;
    p.features = features[i];
    p.density = density[i];
    p.quality = std::accumulate(p.features.begin(), p.features.end(), 0.0) /
                static_cast<double>(kNumComponents);
    p.label = records[i].label;
    quality.push_back(p.quality);
    report.points.push_back(p);
  }
  report.spearman_rho = spearman(density, quality);
  const double r = pearson(density, quality);
  report.r_squared = r * r;

  report.density_high_threshold =
      options.absolute_density ? options.density_high : percentile(density, options.density_high);
  report.density_low_threshold =
      options.absolute_density ? options.density_low : percentile(density, options.density_low);
  std::size_t hdlq = 0;
  std::size_t ldhq = 0;
  for (const auto& p : report.points) {
    if (p.density >= report.density_high_threshold && p.quality < options.quality_low) ++hdlq;
    if (p.density <= report.density_low_threshold && p.quality > options.quality_high) ++ldhq;
  }
  report.high_density_low_quality = static_cast<double>(hdlq) / static_cast<double>(report.n);
  report.low_density_high_quality = static_cast<double>(ldhq) / static_cast<double>(report.n);

  // Equal-count bins in density order, index order breaking ties.
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return density[a] < density[b]; });
  std::vector<std::vector<double>> table(options.bins, std::vector<double>(2, 0.0));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t bin = k * options.bins / order.size();
    table[bin][records[order[k]].label == 1 ? 0 : 1] += 1.0;
  }
  for (const auto& row : table) report.bin_counts.push_back({row[0], row[1]});
  report.chi_squared = chi_squared_independence(table);
  return report;
}

void write_records_jsonl(std::ostream& out, std::span<const VerificationRecord> records) {
  const auto& names = component_names();
  for (const auto& r : records) {
    nlohmann::ordered_json row;
    row["query_id"] = r.query_id;
    row["query"] = r.query;
    row["candidate"] = r.candidate;
    row["label"] = r.label;
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (const auto& [name, value] : r.scores) scores[name] = value;
    row["scores"] = scores;
    if (r.components) {
      nlohmann::ordered_json c;
      for (std::size_t k = 0; k < kNumComponents; ++k) {
        c[std::string(names[k])] = r.components->values[k];
      }
      row["components"] = c;
    }
    out << row.dump() << '\n';
  }
}

std::vector<VerificationRecord> read_records_jsonl(std::istream& in) {
  const auto& names = component_names();
  std::vector<VerificationRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
      VerificationRecord r;
      r.query_id = row.at("query_id").get<std::string>();
      r.query = row.value("query", "");
      r.candidate = row.value("candidate", "");
      r.label = row.at("label").get<int>();
      if (r.label != 0 && r.label != 1) fail(ErrorCode::kData, where + ": label must be 0 or 1");
      for (const auto& [name, value] : row.at("scores").items()) {
        r.scores[name] = value.get<double>();
      }
      if (row.contains("components")) {
        ComponentScores c;
        for (std::size_t k = 0; k < kNumComponents; ++k) {
          c.values[k] = row["components"].at(std::string(names[k])).get<double>();
        }
        r.components = c;
      }
      if (r.scores.empty() && !r.components) {
        fail(ErrorCode::kData, where + ": record carries no scores");
      }
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kData, where + ": " + e.what());
    }
  }
  return records;
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
  out << "setting,seed,auroc,aupr,step_cost\n";
  char buffer[64];
  for (const auto& r : rows) {
    out << r.setting << ',' << r.seed;
    for (double v : {r.auroc, r.aupr, r.step_cost}) {
      std::snprintf(buffer, sizeof(buffer), ",%.17g", v);
      out << buffer;
    }
    out << '\n';
  }
}

}  // namespace bmc
