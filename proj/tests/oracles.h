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

// Brute-force reference implementations used by the unit tests and the
// acceptance suite. They share no code with the library beyond the
// Denoiser call itself.

#ifndef BMC_TESTS_ORACLES_H_
#define BMC_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "bmc/denoiser.h"
#include "bmc/oracle_denoiser.h"
#include "bmc/tokens.h"

namespace bmc::oracle {

using Distribution = std::map<TokenSequence, double>;

inline OracleDenoiser tiny_oracle() {
  // Three tokens, length three, an uneven joint so posteriors depend on the
  // visible tokens.
  return OracleDenoiser::from_function(3, 3, [](const TokenSequence& s) {
    double w = 1.0 + s[0] + 2.0 * (s[1] == s[0]) + 3.0 * (s[2] == (s[1] + 1) % 3);
    return w * w;
  });
}

// Pairwise AUROC: wins plus half the ties over all positive/negative pairs.
inline double auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] == 1) pos += 1.0; else neg += 1.0;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] == 1) continue;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / (pos * neg);
}

// Threshold sweep: predicted positive means score >= threshold.
inline double aupr(const std::vector<double>& s, const std::vector<int>& y) {
  std::set<double, std::greater<double>> thresholds(s.begin(), s.end());
  double pos = 0;
  for (int v : y) pos += v == 1;
  double area = 0.0, prev = 0.0;
  for (double t : thresholds) {
    std::size_t tp = 0, n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) {
        ++n;
        tp += y[i] == 1;
      }
    }
    const double recall = static_cast<double>(tp) / pos;
    const double precision = static_cast<double>(tp) / static_cast<double>(n);
    area += (recall - prev) * precision;
    prev = recall;
  }
  return area;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

// One reverse step with independent posterior reveals:
//   p(x_to | x_from) = prod_{i masked} [ (1 - r) 1{x_to_i = m} + r p(x_to_i) ].
inline Distribution posterior_step(const TokenSequence& x, const Denoiser& d, double r) {
  const TokenId m = d.mask_id();
  Distribution out{{x, 1.0}};
  std::vector<double> row(d.vocab_size());
  const auto pred = d({}, x);
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != m) continue;
    const auto p = pred.row(k++);
    Distribution next;
    for (const auto& [seq, w] : out) {
      if (r < 1.0) next[seq] += w * (1.0 - r);
      for (std::size_t v = 0; v < d.vocab_size(); ++v) {
        if (p[v] == 0.0) continue;
        auto s = seq;
        s[i] = static_cast<TokenId>(v);
        next[s] += w * r * p[v];
      }
    }
    out = std::move(next);
  }
  return out;
}

// One confidence-ordered step: the `count` masked positions with the highest
// max-probability (lowest index first on ties) are each drawn from their row.
inline Distribution ordered_step(const TokenSequence& x, const Denoiser& d, std::size_t count) {
  const TokenId m = d.mask_id();
  const auto pred = d({}, x);
  std::vector<std::pair<double, std::size_t>> conf;  // (-max prob, row)
  for (std::size_t k = 0; k < pred.rows(); ++k) {
    const auto p = pred.row(k);
    conf.push_back({-*std::max_element(p.begin(), p.end()), k});
  }
  std::sort(conf.begin(), conf.end());
  Distribution out{{x, 1.0}};
  for (std::size_t c = 0; c < std::min(count, conf.size()); ++c) {
    const std::size_t k = conf[c].second;
    const std::size_t pos = pred.positions[k];
    const auto p = pred.row(k);
    Distribution next;
    for (const auto& [seq, w] : out) {
      for (std::size_t v = 0; v < d.vocab_size(); ++v) {
        if (p[v] == 0.0) continue;
        auto s = seq;
        s[pos] = static_cast<TokenId>(v);
        next[s] += w * p[v];
      }
    }
    out = std::move(next);
  }
  (void)m;
  return out;
}

// Chains single steps and marginalizes the intermediate states. `step(x, k)`
// returns the one-step distribution for step index k (K down to 1).
template <typename Step>
Distribution chain(const TokenSequence& start, int steps, Step step) {
  Distribution cur{{start, 1.0}};
  for (int k = steps; k >= 1; --k) {
    Distribution next;
    for (const auto& [seq, w] : cur) {
      for (const auto& [s2, w2] : step(seq, k)) next[s2] += w * w2;
    }
    cur = std::move(next);
  }
  return cur;
}

inline double total_variation(const Distribution& a, const Distribution& b) {
  std::set<TokenSequence> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double tv = 0.0;
  for (const auto& k : keys) {
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    tv += std::fabs((ia == a.end() ? 0.0 : ia->second) - (ib == b.end() ? 0.0 : ib->second));
  }
  return tv / 2.0;
}

// Bayes posterior of token v at position i given the visible tokens,
// straight from the joint's support list.
inline double joint_posterior(const OracleDenoiser& o, const TokenSequence& visible,
                              std::size_t i, TokenId v) {
  const TokenId m = o.mask_id();
  double num = 0.0, den = 0.0;
  for (const auto& ws : o.joint()) {
    bool ok = true;
    for (std::size_t j = 0; j < visible.size(); ++j) {
      if (visible[j] != m && visible[j] != ws.tokens[j]) ok = false;
    }
    if (!ok) continue;
    den += ws.weight;
    if (ws.tokens[i] == v) num += ws.weight;
  }
  if (den == 0.0) return 1.0 / static_cast<double>(o.vocab_size());
  return num / den;
}

// (1/T) sum_t sum_{M} P(M | t) sum_{i in M} log p(x0_i | x0 with M masked),
// P(M | t) = (1 - abar_t)^|M| abar_t^(L - |M|), abar_t = 1 - t/T.
inline double kl_linear(const OracleDenoiser& o, const TokenSequence& x0, int T) {
  const std::size_t L = x0.size();
  double total = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double keep = 1.0 - static_cast<double>(t) / T;
    for (unsigned mask = 0; mask < (1u << L); ++mask) {
      double w = 1.0;
      TokenSequence x = x0;
      for (std::size_t i = 0; i < L; ++i) {
        if (mask >> i & 1u) {
          w *= 1.0 - keep;
          x[i] = o.mask_id();
        } else {
          w *= keep;
        }
      }
      if (w == 0.0) continue;
      double ll = 0.0;
      for (std::size_t i = 0; i < L; ++i) {
        if (mask >> i & 1u) ll += std::log(joint_posterior(o, x, i, x0[i]));
      }
      total += w * ll;
    }
  }
  return total / T;
}

}  // namespace bmc::oracle

#endif  // BMC_TESTS_ORACLES_H_
