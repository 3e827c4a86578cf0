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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairthresh/deep_head.hpp"
#include "fairthresh/frontier.hpp"
#include "fairthresh/inferred.hpp"
#include "fairthresh/predictor.hpp"
#include "test_support.hpp"

using namespace fairthresh;
using testing::oracle_counts;
using testing::true_rows;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// A grid wide enough to hold every cut of every group.
std::size_t full_T(const CumulativeTable& table) {
  std::size_t t = 2;
  for (std::size_t a = 0; a < table.assigned_count(); ++a) t = std::max(t, table.cuts(a).size());
  return t;
}

std::vector<std::vector<double>> all_cuts(const ScoredDataset& ds, const std::vector<std::size_t>& rows,
                                          std::size_t groups) {
  std::vector<std::vector<double>> out;
  for (std::size_t a = 0; a < groups; ++a) out.push_back(testing::all_cut_values(ds, rows, a));
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome oracle_frontier_equivalence() {
  std::mt19937_64 rng(2024);
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"accuracy", "demographic_parity"}, {"balanced_accuracy", "equal_opportunity"},
      {"f1", "equalized_odds"},           {"min_accuracy.min", "accuracy"},
      {"mcc", "disparate_impact"},        {"accuracy", "treatment_equality"},
      {"recall.min", "pos_pred_rate"},    {"utility:1,1,5,0", "predictive_parity"}};
  std::size_t matched = 0, total = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t k = 1 + rep % 3;
    const std::size_t n = 20 + static_cast<std::size_t>(rng() % 281);
    const auto ds = testing::random_dataset(rng, {.n = n, .k = k, .levels = rep % 3 == 0 ? 7u : 0u});
    const SearchTables tables{CumulativeTable::build(ds, true_group_assignment(ds)), std::nullopt};
    const std::size_t T = 2 + rng() % 11;
    const auto grid = grid_thresholds(tables.plain, T);
    const auto& [o, c] = pairs[rep % pairs.size()];
    const Metric obj = catalog_lookup(o), con = catalog_lookup(c);
    const Directions dirs{obj.greater_is_better(),
                          con.greater_is_better() ? ConstraintSense::at_least : ConstraintSense::at_most};
    const SearchProblem problem{obj, con, dirs, LevellingUp::off, {}, 1'000'000, 1};
    const auto fast = testing::value_set(enumerate_frontier(tables, grid, problem));
    const auto slow = testing::oracle_frontier(ds, true_rows(ds), grid_values(tables.plain, grid), obj, con, dirs);
    ++total;
    matched += fast == slow;
  }
  return {matched == total, std::to_string(matched) + "/" + std::to_string(total) +
                                " random datasets (n<=300, k in {1,2,3}, T<=12) give identical frontiers"};
}

Outcome confusion_oracle() {
  std::mt19937_64 rng(7);
  std::size_t checks = 0, equal = 0;
  for (int d = 0; d < 100; ++d) {
    const std::size_t k = 1 + d % 4;
    const auto ds = testing::random_dataset(rng, {.n = 10 + static_cast<std::size_t>(rng() % 490), .k = k,
                                                  .levels = d % 2 ? 12u : 0u});
    GroupAssignment assignment = true_group_assignment(ds);
    if (d % 5 == 4) {
      // Assigned groups that differ from the true groups.
      for (std::size_t i = 0; i < ds.size(); ++i) assignment.of_row[i] = (ds.groups()[i] + i) % k;
    }
    const auto table = CumulativeTable::build(ds, assignment);
    std::uniform_real_distribution<double> unit(-0.3, 1.6);
    for (int j = 0; j < 100; ++j) {
      std::vector<double> t(k);
      for (auto& v : t) v = j % 4 == 0 ? ds.scores()[rng() % ds.size()] : unit(rng);
      ++checks;
      equal += counts_at(table, t) == oracle_counts(ds, assignment.of_row, t);
    }
  }
  return {equal == checks && checks >= 10000,
          std::to_string(equal) + "/" + std::to_string(checks) + " (dataset, threshold) pairs match exactly"};
}

Outcome speed_gap() {
  const std::size_t n = 50'000, k = 3, T = 16;
  auto ds = testing::synthetic_logistic(n, 99, k, 0.3, false);
  std::vector<double> soft(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) soft[i * k + ds.groups()[i]] = 1.0;
  ds.set_soft_groups(soft);
  const SearchProblem problem{metrics::accuracy().overall(), metrics::demographic_parity(),
                              {true, ConstraintSense::at_most}, LevellingUp::off, {}, 1'000'000, 1};

  const auto t0 = std::chrono::steady_clock::now();
  const SearchTables tables{CumulativeTable::build(ds, true_group_assignment(ds)), std::nullopt};
  const auto grid = grid_thresholds(tables.plain, T);
  const auto fast = enumerate_frontier(tables, grid, problem);
  const double fast_s = seconds_since(t0);

  const auto values = grid_values(tables.plain, grid);
  const auto t1 = std::chrono::steady_clock::now();
  const SoftScorer scorer(ds, problem);
  const auto slow = slow_enumerate(scorer, values, 1'000'000'000);
  const double slow_s = seconds_since(t1);

  const bool same = testing::value_set(fast) == testing::value_set(slow);
  const double ratio = slow_s / fast_s;
  char buf[200];
  std::snprintf(buf, sizeof buf, "n=%zu k=%zu T=%zu: cumulative %.3fs, naive %.3fs, ratio %.1fx, frontiers %s", n,
                k, T, fast_s, slow_s, ratio, same ? "identical" : "DIFFER");
  return {ratio >= 10.0 && fast_s < 2.0 && same, buf};
}

Outcome fairness_enforcement() {
  const auto ds = testing::synthetic_logistic(6000, 31);
  const auto base = oracle_counts(ds, true_rows(ds), {0.0, 0.0});
  const double base_dp = metrics::demographic_parity().evaluate(base);
  FairPredictor predictor(ds);
  FitSpec spec;
  spec.constraint = metrics::demographic_parity();
  spec.value = 0.02;
  predictor.fit(spec);
  const auto counts = oracle_counts(ds, true_rows(ds), predictor.thresholds().thresholds);
  const double dp = metrics::demographic_parity().evaluate(counts);
  const double acc = metrics::accuracy().overall().evaluate(counts);
  double positives = 0;
  for (auto y : ds.labels()) positives += y;
  const double majority = std::max(positives, double(ds.size()) - positives) / double(ds.size());
  char buf[200];
  std::snprintf(buf, sizeof buf, "baseline DP %.4f; fitted DP %.4f (<= 0.02), accuracy %.4f vs majority rate %.4f",
                base_dp, dp, acc, majority);
  return {dp <= 0.02 && acc > majority && ds.has_strata() && base_dp > 0.1 && base_dp < 0.2, buf};
}

Outcome clarify_sweep() {
  const auto ds = testing::synthetic_logistic(3000, 41);
  int improved = 0, total = 0;
  std::ostringstream failures;
  for (const auto& [name, metric] : clarify_metrics(true)) {
    const bool at_least = metric.greater_is_better();
    const double bound = at_least ? 0.975 : 0.025;
    FairPredictor predictor(ds);
    FitSpec spec;
    spec.constraint = metric;
    spec.value = bound;
    predictor.fit(spec);
    const auto* row = predictor.evaluate_fairness(ds).find(name);
    auto violation = [&](double v) { return std::max(0.0, at_least ? bound - v : v - bound); };
    ++total;
    if (row != nullptr && violation(row->updated) <= violation(row->original)) {
      ++improved;
    } else {
      failures << " " << name;
    }
  }
  return {improved == 10 && total == 10,
          std::to_string(improved) + "/" + std::to_string(total) + " Clarify measures no worse after fitting" +
              (failures.str().empty() ? "" : "; failed:" + failures.str())};
}

Outcome levelling_up() {
  std::mt19937_64 rng(53);
  int checked = 0, ok = 0, infeasible = 0;
  for (double delta : {0.5, 0.75, 0.9}) {
    for (int rep = 0; rep < 8; ++rep) {
      const auto ds = testing::synthetic_logistic(60 + 20 * rep, rng(), 2, 0.5, false);
      const auto rows = true_rows(ds);
      // Exhaustive naive search over every cut combination.
      bool feasible = false;
      double best = -1;
      testing::for_each_combination(all_cuts(ds, rows, 2), [&](const std::vector<double>& t) {
        const auto c = oracle_counts(ds, rows, t);
        if (metrics::recall().min().evaluate(c) >= delta) {
          feasible = true;
          best = std::max(best, metrics::accuracy().overall().evaluate(c));
        }
      });
      if (!feasible) {
        ++infeasible;
        continue;
      }
      const auto tables = build_search_tables(ds, true_group_assignment(ds), false);
      FitSpec spec;
      spec.constraint = catalog_lookup("recall.min");
      spec.value = delta;
      spec.grid.coarse_T = full_T(tables.plain);
      const auto result = fit(spec, tables);
      const auto c = oracle_counts(ds, rows, result.solution.thresholds);
      const auto recalls = metrics::recall().per_group(c);
      ++checked;
      ok += *std::min_element(recalls.begin(), recalls.end()) >= delta &&
            metrics::accuracy().overall().evaluate(c) == best;
    }
  }
  return {ok == checked && checked > 0,
          std::to_string(ok) + "/" + std::to_string(checked) +
              " fits with delta in {0.5, 0.75, 0.9} reach per-group recall >= delta at the exhaustive best accuracy (" +
              std::to_string(infeasible) + " infeasible grids skipped)"};
}

Outcome minimax() {
  std::mt19937_64 rng(61);
  int ok = 0, total = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto ds = testing::random_dataset(rng, {.n = 60 + 14 * static_cast<std::size_t>(rep), .k = 2,
                                                  .levels = rep % 2 ? 15u : 0u});
    const auto rows = true_rows(ds);
    double best = -1;
    testing::for_each_combination(all_cuts(ds, rows, 2), [&](const std::vector<double>& t) {
      const auto c = oracle_counts(ds, rows, t);
      double worst = 1e9;
      for (std::size_t g = 0; g < 2; ++g) {
        const auto& x = c.at(g, 0);
        const double a = x.tp + x.fp == 0 ? 0.0 : x.tp / (x.tp + x.fp);
        const double b = x.fn + x.tn == 0 ? 0.0 : x.tn / (x.fn + x.tn);
        worst = std::min(worst, std::min(a, b));
      }
      best = std::max(best, worst);
    });
    const auto tables = build_search_tables(ds, true_group_assignment(ds), false);
    FitSpec spec;
    spec.objective = catalog_lookup("min_accuracy.min");
    spec.constraint = catalog_lookup("accuracy");
    spec.value = 0.0;
    spec.grid.coarse_T = full_T(tables.plain);
    const auto result = fit(spec, tables);
    ++total;
    ok += result.selected.objective == best &&
          catalog_lookup("min_accuracy.min").evaluate(oracle_counts(ds, rows, result.solution.thresholds)) == best;
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                           " datasets (n<=200, k=2): fit returns the exhaustive argmax of worst-group min_accuracy"};
}

Outcome merged_head_identity() {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-10, 10);
  double max_gap = 0;
  std::size_t rows = 0, disagreements = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t d = 1 + rng() % 16, k = 1 + rng() % 4, m = 20;
    DeepHeads h;
    h.w_f.resize(d);
    for (auto& v : h.w_f) v = u(rng);
    h.b_f = u(rng);
    h.w_g.assign(k, std::vector<double>(d));
    for (auto& r : h.w_g) {
      for (auto& v : r) v = u(rng);
    }
    h.b_g.resize(k);
    for (auto& v : h.b_g) v = u(rng);
    std::vector<double> t(k);
    for (auto& v : t) v = u(rng);
    const auto merged = merge_heads(h, t);
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<double> x(d);
      for (auto& v : x) v = u(rng);
      // Two-headed score, computed here independently.
      double f = h.b_f;
      for (std::size_t j = 0; j < d; ++j) f += h.w_f[j] * x[j];
      for (std::size_t g = 0; g < k; ++g) {
        double gx = h.b_g[g];
        for (std::size_t j = 0; j < d; ++j) gx += h.w_g[g][j] * x[j];
        f -= t[g] * gx;
      }
      const double single = merged.score(x);
      max_gap = std::max(max_gap, std::abs(f - single));
      disagreements += (f >= 0) != (single >= 0);
      ++rows;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "1000 instances, %zu rows: max gap %.3g (<= 1e-9), %zu decision disagreements",
                rows, max_gap, disagreements);
  return {max_gap <= 1e-9 && disagreements == 0, buf};
}

Outcome multi_threshold_dominance() {
  int ok = 0, total = 0;
  std::ostringstream detail;
  for (std::uint64_t seed : {3, 4, 5, 6, 7}) {
    const auto ds = testing::synthetic_logistic(120, seed, 2, 0.4, false);
    const Metric eo = metrics::equalized_odds();
    const SearchProblem problem{metrics::accuracy().overall(), eo, {true, ConstraintSense::at_most},
                                LevellingUp::off, {}, 2'000'000, 1};
    auto best = [&](GroupAssignment assignment) {
      drop_empty_groups(assignment);
      const SearchTables tables{CumulativeTable::build(ds, assignment), std::nullopt};
      const auto frontier = enumerate_frontier(tables, grid_thresholds(tables.plain, full_T(tables.plain)), problem);
      return select_solution(frontier, 0.02, problem.directions);
    };
    const auto single = best(true_group_assignment(ds));
    const auto split = best(group_transform(TransformKind::label_split, ds, base_predictions(ds, 0.0), 0));
    const bool feasible_single = single.constraint <= 0.02;
    const bool feasible_split = split.constraint <= 0.02;
    ++total;
    const bool dominates = feasible_split && (!feasible_single || split.objective >= single.objective);
    ok += dominates;
    char buf[120];
    std::snprintf(buf, sizeof buf, " [%.3f vs %.3f]", split.objective, single.objective);
    detail << buf;
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                           " fixtures: label_split best feasible accuracy >= single threshold" + detail.str()};
}

Outcome property_suite() {
  std::mt19937_64 rng(83);
  std::uniform_int_distribution<int> count(0, 25);
  std::size_t violations = 0, checks = 0;
  auto check = [&](bool ok) {
    ++checks;
    violations += !ok;
  };
  std::vector<GroupMetric> group_metrics;
  for (const auto& name : catalog_names()) {
    if (auto m = find_group_metric(name)) group_metrics.push_back(*m);
  }
  // View laws and broadcast consistency on random tensors.
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t k = 1 + rep % 5;
    ConfusionTensor t(k, 3);
    for (std::size_t g = 0; g < k; ++g) {
      for (std::size_t c = 0; c < 3; ++c) {
        t.at(g, c) = {double(count(rng)), double(count(rng)), double(count(rng)), double(count(rng))};
      }
    }
    t.refresh_global();
    for (const auto& m : group_metrics) {
      const auto diff = m.diff().evaluate(TensorSet{&t, nullptr});
      const auto max_diff = m.max_diff().evaluate(TensorSet{&t, nullptr});
      const auto ratio = m.ratio().evaluate(TensorSet{&t, nullptr});
      const auto lo = m.min().evaluate(TensorSet{&t, nullptr});
      const auto avg = m.average().evaluate(TensorSet{&t, nullptr});
      const auto hi = m.max().evaluate(TensorSet{&t, nullptr});
      for (std::size_t c = 0; c < 3; ++c) {
        check(diff[c] >= 0 && max_diff[c] >= diff[c] - 1e-15 && ratio[c] >= 0 && ratio[c] <= 1 &&
              lo[c] <= avg[c] + 1e-12 && avg[c] <= hi[c] + 1e-12 && (k != 2 || max_diff[c] == diff[c]));
        ConfusionTensor one(k, 1);
        for (std::size_t g = 0; g < k; ++g) one.at(g, 0) = t.at(g, c);
        one.refresh_global();
        check(m.diff().evaluate(one) == diff[c]);
      }
    }
  }
  // Zero denominators.
  ConfusionTensor zero(2, 1);
  zero.refresh_global();
  for (const auto& m : group_metrics) check(m.overall().evaluate(zero) == 0.0 && m.diff().evaluate(zero) == 0.0);
  // Utility identity.
  for (int rep = 0; rep < 100; ++rep) {
    const double c = std::uniform_real_distribution<double>(-5, 5)(rng);
    const ConfusionCounts x{double(1 + count(rng)), double(count(rng)), double(count(rng)), double(count(rng))};
    check(std::abs(utility_metric({{c, c, c, c}})(x) - c) <= 1e-12);
  }
  check(std::abs(utility_metric({{1, 1, 5, 0}})(ConfusionCounts{2, 1, 1, 3}) - 8.0 / 7.0) <= 1e-15);
  // Single-stratum conditional reduction (group views).
  for (int rep = 0; rep < 20; ++rep) {
    auto ds = testing::random_dataset(rng, {.n = 120, .k = 3, .levels = 10});
    ds.set_strata(std::vector<std::size_t>(ds.size(), 0), {"all"});
    std::vector<std::uint8_t> preds(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) preds[i] = ds.scores()[i] >= 0.5;
    const auto plain = tally_predictions(ds, preds);
    const auto cond = tally_predictions(ds, preds, conditional_weights(ds).row_weights(ds));
    for (const auto& m : group_metrics) {
      for (View v : {View::diff, View::max_diff, View::ratio, View::min, View::max, View::average}) {
        check(std::abs(m.view(v).conditional().evaluate(plain, &cond) - m.view(v).evaluate(plain)) <= 1e-12);
      }
    }
  }
  // Bias amplification substitution.
  ConfusionTensor b(1, 1);
  b.at(0, 0) = {2, 1, 3, 4};
  b.refresh_global();
  check(std::abs(bias_amp_abs(b).per_group[0] - 0.2) <= 1e-15);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = testing::random_dataset(rng, {.n = 100, .k = 3});
    std::vector<std::uint8_t> preds(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) preds[i] = ds.scores()[i] >= 0.6;
    const auto abs = bias_amp_abs(tally_predictions(ds, preds));
    const auto signed_terms = bias_amp_signed_terms(ds, preds);
    for (std::size_t g = 0; g < 3; ++g) check(std::abs(abs.per_group[g] - std::abs(signed_terms[g])) <= 1e-12);
  }
  return {violations == 0, std::to_string(checks - violations) + "/" + std::to_string(checks) +
                               " property checks hold (view laws, zero denominators, utility identity, "
                               "single-stratum reduction, bias amplification)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle frontier equivalence", oracle_frontier_equivalence},
      {"confusion oracle", confusion_oracle},
      {"fast vs naive speed gap", speed_gap},
      {"fairness enforcement", fairness_enforcement},
      {"clarify sweep", clarify_sweep},
      {"levelling up", levelling_up},
      {"minimax recipe", minimax},
      {"merged head identity", merged_head_identity},
      {"multi-threshold EO dominance", multi_threshold_dominance},
      {"property suite", property_suite},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
