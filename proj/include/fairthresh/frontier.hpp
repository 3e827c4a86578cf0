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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairthresh/confusion.hpp"
#include "fairthresh/dataset.hpp"
#include "fairthresh/metrics.hpp"

namespace fairthresh {

// One threshold per assigned group: a row x is positive iff
// f(x) - t[G'(x)] >= 0.
struct ThresholdAssignment {
  std::vector<std::string> groups;
  std::vector<double> thresholds;
};

struct FrontierPoint {
  std::vector<double> thresholds;
  double objective = 0.0;
  double constraint = 0.0;

  friend bool operator==(const FrontierPoint&, const FrontierPoint&) = default;
};

enum class ConstraintSense { at_most, at_least };

enum class LevellingUp {
  off,
  up,    // '+': no group's selection rate may fall below the baseline's
  down,  // '-': no group's selection rate may rise above the baseline's
};

struct Directions {
  bool maximize_objective = true;
  ConstraintSense sense = ConstraintSense::at_most;
};

struct GridConfig {
  // 0 selects the defaults: coarse = max(8, floor(budget^(1/k))) capped so
  // that coarse^k <= max_combinations, fine = 2 * coarse + 1 under the same cap.
  std::size_t coarse_T = 0;
  std::size_t fine_T = 0;
  std::size_t max_combinations = 1'000'000;
  // Budget of per-row evaluations (combinations x rows) for the soft pathway.
  std::size_t max_row_evaluations = 200'000'000;
  bool refine = true;
  unsigned threads = 1;

  // Effective (coarse, fine) sizes for k assigned groups.
  std::pair<std::size_t, std::size_t> resolve(std::size_t k) const;
};

// Counts tables for one assignment: plain, and conditionally weighted when a
// metric needs it. Both share the same cuts.
struct SearchTables {
  CumulativeTable plain;
  std::optional<CumulativeTable> conditional;
};

SearchTables build_search_tables(const ScoredDataset& ds, const GroupAssignment& assignment,
                                 bool with_conditional);

// What a grid enumeration optimizes.
struct SearchProblem {
  Metric objective;
  std::optional<Metric> constraint;
  Directions directions;
  LevellingUp levelling_up = LevellingUp::off;
  // Per true group selection rate of the baseline; used when levelling up.
  std::vector<double> base_rates;
  std::size_t max_combinations = 1'000'000;
  unsigned threads = 1;
};

// Per assigned group, indices into CumulativeTable::cuts.
using GridCuts = std::vector<std::vector<std::size_t>>;

// T cuts per group at evenly spaced rank quantiles (endpoints included), or
// every cut when the group has no more than T of them.
GridCuts grid_thresholds(const CumulativeTable& table, std::size_t T);
// T cuts at evenly spaced ranks between cut indices lo and hi (inclusive).
std::vector<std::size_t> grid_in_range(const CumulativeTable& table, std::size_t assigned,
                                       std::size_t lo, std::size_t hi, std::size_t T);

// Threshold values of a grid.
std::vector<std::vector<double>> grid_values(const CumulativeTable& table, const GridCuts& grid);

// Scores every combination of the grid and returns its Pareto frontier.
// Throws BudgetError when the combination count exceeds the budget.
std::vector<FrontierPoint> enumerate_frontier(const SearchTables& tables, const GridCuts& grid,
                                              const SearchProblem& problem);

// (objective, constraint) of one threshold vector, via counts_at.
std::pair<double, double> score_thresholds(const SearchTables& tables,
                                           const SearchProblem& problem,
                                           std::span<const double> thresholds);

// The non-dominated subset, sorted by descending objective. Points with equal
// scores collapse to the one with the lexicographically smallest thresholds.
std::vector<FrontierPoint> pareto_filter(std::vector<FrontierPoint> points, Directions dirs);

// Best objective among points satisfying the constraint (ties: more slack,
// then smaller thresholds); if none does, the point of least violation
// (ties: better objective, then smaller thresholds).
const FrontierPoint& select_solution(std::span<const FrontierPoint> frontier, double value,
                                     Directions dirs);

struct FitSpec {
  Metric objective = catalog_lookup("accuracy");
  std::optional<Metric> constraint;
  double value = 0.0;
  std::optional<bool> maximize_objective;
  std::optional<ConstraintSense> constraint_sense;
  LevellingUp levelling_up = LevellingUp::off;
  GridConfig grid;
  // Per assigned group thresholds of the original classifier; empty = zeros.
  std::vector<double> baseline;
  std::string split = "validation";

  Directions directions() const;
  bool needs_conditional() const;
};

struct FitResult {
  ThresholdAssignment solution;
  FrontierPoint selected;
  std::vector<FrontierPoint> frontier;
  Directions directions;
};

SearchProblem make_problem(const FitSpec& spec, const SearchTables& tables);

// Coarse grid search, a finer search inside the range the coarse frontier
// spans, then selection. The baseline thresholds are always a candidate.
FitResult fit(const FitSpec& spec, const SearchTables& tables);

// Maximizes `objective` subject to overall selection rate <= max_rate.
FitResult capacity_fit(const Metric& objective, double max_rate, const SearchTables& tables,
                       GridConfig grid = {});

}  // namespace fairthresh
