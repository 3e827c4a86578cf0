// Copyright 2026 The fairthresh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fixtures and brute-force oracles shared by the unit and acceptance tests.
// The oracles deliberately avoid the library's tables and enumerators.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairthresh/confusion.hpp"
#include "fairthresh/dataset.hpp"
#include "fairthresh/frontier.hpp"
#include "fairthresh/metrics.hpp"

namespace fairthresh::testing {

// Group A: (0.9,1),(0.7,0),(0.6,1),(0.2,0); group B: (0.8,1),(0.5,0),(0.4,1),(0.1,0).
inline ScoredDataset fixture_a() {
  return ScoredDataset({0.9, 0.7, 0.6, 0.2, 0.8, 0.5, 0.4, 0.1}, {1, 0, 1, 0, 1, 0, 1, 0},
                       {0, 0, 0, 0, 1, 1, 1, 1}, {"A", "B"});
}

struct RandomSpec {
  std::size_t n = 100;
  std::size_t k = 2;
  // Scores are drawn from this many levels; small values force ties.
  std::size_t levels = 0;
  std::size_t strata = 0;
  bool soft = false;
};

inline ScoredDataset random_dataset(std::mt19937_64& rng, const RandomSpec& spec) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_group(0, spec.k - 1);
  std::vector<double> scores(spec.n);
  std::vector<std::uint8_t> labels(spec.n);
  std::vector<std::size_t> groups(spec.n);
  std::vector<std::string> names;
  for (std::size_t g = 0; g < spec.k; ++g) names.push_back("g" + std::to_string(g));
  for (std::size_t i = 0; i < spec.n; ++i) {
    groups[i] = i < spec.k ? i : pick_group(rng);
    double s = unit(rng);
    if (spec.levels > 0) s = std::floor(s * static_cast<double>(spec.levels)) / static_cast<double>(spec.levels);
    // Shift by group so thresholds matter.
    scores[i] = s + 0.1 * static_cast<double>(groups[i]);
    labels[i] = unit(rng) < 0.3 + 0.5 * s ? 1 : 0;
  }
  ScoredDataset ds(std::move(scores), std::move(labels), std::move(groups), std::move(names));
  if (spec.strata > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, spec.strata - 1);
    std::vector<std::size_t> strata(spec.n);
    std::vector<std::string> snames;
    for (std::size_t s = 0; s < spec.strata; ++s) snames.push_back("s" + std::to_string(s));
    for (auto& s : strata) s = pick(rng);
    ds.set_strata(std::move(strata), std::move(snames));
  }
  if (spec.soft) {
    std::vector<double> soft(spec.n * spec.k);
    for (std::size_t i = 0; i < spec.n; ++i) {
      double sum = 0.0;
      for (std::size_t g = 0; g < spec.k; ++g) {
        soft[i * spec.k + g] = unit(rng) + (g == ds.groups()[i] ? 1.0 : 0.0);
        sum += soft[i * spec.k + g];
      }
      for (std::size_t g = 0; g < spec.k; ++g) soft[i * spec.k + g] /= sum;
    }
    ds.set_soft_groups(std::move(soft));
  }
  return ds;
}

// Logistic scores (logits) for k groups whose latent means are shifted
// apart; threshold 0 is the natural baseline. Strata correlate with group.
inline ScoredDataset synthetic_logistic(std::size_t n, std::uint64_t seed, std::size_t k = 2,
                                        double shift = 0.2, bool strata = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  std::vector<std::size_t> groups(n);
  std::vector<std::size_t> strat(n);
  std::vector<std::string> names;
  for (std::size_t g = 0; g < k; ++g) names.push_back(std::string(1, static_cast<char>('A' + g)));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = i % k;
    const double mean = k == 1 ? 0.0 : shift * (1.0 - 2.0 * static_cast<double>(g) / static_cast<double>(k - 1));
    const double z = mean + normal(rng);
    groups[i] = g;
    labels[i] = unit(rng) < 1.0 / (1.0 + std::exp(-2.0 * z)) ? 1 : 0;
    scores[i] = 2.0 * z + 0.5 * normal(rng);
    strat[i] = unit(rng) < (g == 0 ? 0.7 : 0.3) ? 0 : 1;
  }
  ScoredDataset ds(std::move(scores), std::move(labels), std::move(groups), std::move(names));
  if (strata) ds.set_strata(std::move(strat), {"s0", "s1"});
  return ds;
}

// Per-row tally of f(x) - t[assigned] >= 0 against true groups.
inline ConfusionTensor oracle_counts(const ScoredDataset& ds, const std::vector<std::size_t>& assigned,
                                     const std::vector<double>& t,
                                     const std::vector<double>& weights = {}) {
  ConfusionTensor out(ds.group_count(), 1);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const bool pos = ds.scores()[i] - t[assigned[i]] >= 0.0;
    auto& c = out.at(ds.groups()[i], 0);
    if (ds.labels()[i]) {
      (pos ? c.tp : c.fn) += w;
    } else {
      (pos ? c.fp : c.tn) += w;
    }
  }
  out.refresh_global();
  return out;
}

inline std::vector<std::size_t> true_rows(const ScoredDataset& ds) {
  return {ds.groups().begin(), ds.groups().end()};
}

// Every distinct score's neighbourhood, expressed as thresholds: one above
// the max, midpoints between distinct scores, one below the min.
inline std::vector<double> all_cut_values(const ScoredDataset& ds, const std::vector<std::size_t>& assigned,
                                          std::size_t a) {
  std::set<double, std::greater<>> distinct;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (assigned[i] == a) distinct.insert(ds.scores()[i]);
  }
  std::vector<double> d(distinct.begin(), distinct.end());
  std::vector<double> out{d.front() + 1.0};
  for (std::size_t j = 0; j + 1 < d.size(); ++j) out.push_back((d[j] + d[j + 1]) / 2.0);
  out.push_back(d.back() - 1.0);
  return out;
}

// Calls fn(t) for every combination in the product of `values`.
inline void for_each_combination(const std::vector<std::vector<double>>& values,
                                 const std::function<void(const std::vector<double>&)>& fn) {
  std::vector<std::size_t> idx(values.size(), 0);
  std::vector<double> t(values.size());
  while (true) {
    for (std::size_t g = 0; g < values.size(); ++g) t[g] = values[g][idx[g]];
    fn(t);
    std::size_t g = values.size();
    while (g > 0) {
      --g;
      if (++idx[g] < values[g].size()) break;
      idx[g] = 0;
      if (g == 0) return;
    }
    if (values.empty()) return;
  }
}

// Quadratic dominance check in oriented space (bigger is better for both).
inline std::set<std::pair<double, double>> oracle_pareto(const std::vector<std::pair<double, double>>& pts,
                                                         Directions dirs) {
  auto orient = [&](std::pair<double, double> p) {
    return std::pair{dirs.maximize_objective ? p.first : -p.first,
                     dirs.sense == ConstraintSense::at_least ? p.second : -p.second};
  };
  std::set<std::pair<double, double>> out;
  for (const auto& p : pts) {
    const auto op = orient(p);
    bool dominated = false;
    for (const auto& q : pts) {
      const auto oq = orient(q);
      if (oq.first >= op.first && oq.second >= op.second && (oq.first > op.first || oq.second > op.second)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.insert(p);
  }
  return out;
}

inline std::set<std::pair<double, double>> value_set(const std::vector<FrontierPoint>& frontier) {
  std::set<std::pair<double, double>> out;
  for (const auto& p : frontier) out.insert({p.objective, p.constraint});
  return out;
}

// Naive frontier: per-row scoring of every combination of threshold values.
inline std::set<std::pair<double, double>> oracle_frontier(const ScoredDataset& ds,
                                                           const std::vector<std::size_t>& assigned,
                                                           const std::vector<std::vector<double>>& values,
                                                           const Metric& objective, const Metric& constraint,
                                                           Directions dirs) {
  std::vector<std::pair<double, double>> pts;
  for_each_combination(values, [&](const std::vector<double>& t) {
    const ConfusionTensor c = oracle_counts(ds, assigned, t);
    pts.emplace_back(objective.evaluate(c), constraint.evaluate(c));
  });
  return oracle_pareto(pts, dirs);
}

}  // namespace fairthresh::testing
