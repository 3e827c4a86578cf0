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

#include "fairthresh/inferred.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>

#include "fairthresh/error.hpp"

namespace fairthresh {

namespace {

void require_soft(const ScoredDataset& ds) {
  if (!ds.has_soft_groups()) throw DataError("inferred groups need soft-score columns g:<group>");
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double rate(const ConfusionCounts& c) { return safe_div(c.tp + c.fp, c.total()); }

std::vector<std::string> split_names(const std::vector<std::string>& groups) {
  std::vector<std::string> names;
  for (const auto& g : groups) {
    names.push_back(g + "|0");
    names.push_back(g + "|1");
  }
  return names;
}

std::vector<double> resolve_baseline(const FitSpec& spec, std::size_t k) {
  if (spec.baseline.empty()) return std::vector<double>(k, 0.0);
  if (spec.baseline.size() != k) {
    throw UsageError("baseline has " + std::to_string(spec.baseline.size()) +
                     " thresholds, expected " + std::to_string(k));
  }
  return spec.baseline;
}

SearchProblem make_soft_problem(const ScoredDataset& ds, const FitSpec& spec) {
  SearchProblem problem{spec.objective, spec.constraint, spec.directions(), spec.levelling_up,
                        {}, spec.grid.max_combinations, spec.grid.threads};
  const SoftScorer probe(ds, problem);
  const auto base = probe.counts(resolve_baseline(spec, ds.group_count()), false);
  for (std::size_t g = 0; g < base.group_count(); ++g) problem.base_rates.push_back(rate(base.at(g, 0)));
  return problem;
}

ThresholdScorer as_scorer(const SoftScorer& scorer) {
  return [&scorer](std::span<const double> t) { return scorer.score_admissible(t); };
}

// Soft-pathway grid sizes: the frontier defaults, reduced until T^k * n fits
// the per-row budget. Explicit sizes are left alone (and may then fail).
std::pair<std::size_t, std::size_t> soft_grid_sizes(const GridConfig& grid, std::size_t k,
                                                    std::size_t n) {
  auto [coarse, fine] = grid.resolve(k);
  auto cost = [&](std::size_t T) {
    double c = static_cast<double>(std::max<std::size_t>(n, 1));
    for (std::size_t i = 0; i < k; ++i) c *= static_cast<double>(T);
    return c;
  };
  const auto budget = static_cast<double>(grid.max_row_evaluations);
  if (grid.coarse_T == 0) {
    while (coarse > 2 && cost(coarse) > budget) --coarse;
  }
  if (grid.fine_T == 0) {
    fine = std::min(fine, 2 * coarse + 1);
    while (fine > 2 && cost(fine) > budget) --fine;
  }
  return {coarse, fine};
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (lo == hi || count < 2) return {lo};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

// Coarse and fine naive searches plus one interpolation pass.
std::vector<FrontierPoint> slow_frontier(const ScoredDataset& ds, const FitSpec& spec,
                                         const SoftScorer& scorer) {
  const std::size_t k = ds.group_count();
  const auto [coarse_T, fine_T] = soft_grid_sizes(spec.grid, k, ds.size());
  const CumulativeTable table = CumulativeTable::build(ds, assign_argmax(ds));
  auto coarse = grid_values(table, grid_thresholds(table, coarse_T));
  for (auto& values : coarse) std::sort(values.begin(), values.end());

  const Directions dirs = scorer.problem().directions;
  auto frontier = slow_enumerate(scorer, coarse, spec.grid.max_row_evaluations);
  if (spec.grid.refine && !frontier.empty()) {
    std::vector<std::vector<double>> fine(k);
    for (std::size_t j = 0; j < k; ++j) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& p : frontier) {
        lo = std::min(lo, p.thresholds[j]);
        hi = std::max(hi, p.thresholds[j]);
      }
      const auto& g = coarse[j];
      auto lo_it = std::lower_bound(g.begin(), g.end(), lo);
      auto hi_it = std::lower_bound(g.begin(), g.end(), hi);
      if (lo_it != g.begin()) --lo_it;
      if (hi_it + 1 < g.end()) ++hi_it;
      fine[j] = linspace(*lo_it, *std::min(hi_it, g.end() - 1), fine_T);
    }
    if (fine != coarse) {
      auto refined = slow_enumerate(scorer, fine, spec.grid.max_row_evaluations);
      frontier.insert(frontier.end(), refined.begin(), refined.end());
      frontier = pareto_filter(std::move(frontier), dirs);
    }
  }
  return interpolate_frontier(std::move(frontier), as_scorer(scorer), dirs);
}

FitResult finish(std::vector<FrontierPoint> frontier, const ScoredDataset& ds, const FitSpec& spec,
                 const SoftScorer& scorer) {
  const Directions dirs = scorer.problem().directions;
  FrontierPoint base;
  base.thresholds = resolve_baseline(spec, ds.group_count());
  std::tie(base.objective, base.constraint) = scorer.score(base.thresholds);
  frontier.push_back(std::move(base));
  frontier = pareto_filter(std::move(frontier), dirs);

  FitResult result;
  result.directions = dirs;
  result.selected = select_solution(frontier, spec.constraint ? spec.value : 0.0, dirs);
  result.solution = ThresholdAssignment{ds.group_names(), result.selected.thresholds};
  result.frontier = std::move(frontier);
  return result;
}

}  // namespace

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::random_split:
      return "random";
    case TransformKind::label_split:
      return "label";
    case TransformKind::inferred_x_predicted:
      return "inferredxlabel";
  }
  return "?";
}

GroupAssignment assign_hard(const ScoredDataset& ds, double dk_threshold) {
  require_soft(ds);
  if (!(dk_threshold > 0.0 && dk_threshold <= 1.0)) {
    throw UsageError("don't-know threshold must lie in (0, 1]");
  }
  const std::size_t k = ds.group_count();
  GroupAssignment out;
  out.names = ds.group_names();
  out.names.emplace_back(kDontKnowGroup);
  out.of_row.resize(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto soft = ds.soft_groups(i);
    const std::size_t best = argmax(soft);
    out.of_row[i] = soft[best] >= dk_threshold ? best : k;
  }
  return out;
}

GroupAssignment assign_argmax(const ScoredDataset& ds) {
  require_soft(ds);
  GroupAssignment out{ds.group_names(), std::vector<std::size_t>(ds.size())};
  for (std::size_t i = 0; i < ds.size(); ++i) out.of_row[i] = argmax(ds.soft_groups(i));
  return out;
}

GroupAssignment group_transform(TransformKind kind, const ScoredDataset& ds,
                                std::span<const std::uint8_t> base_predictions,
                                std::uint64_t seed) {
  GroupAssignment out{split_names(ds.group_names()), std::vector<std::size_t>(ds.size())};
  if (kind != TransformKind::random_split && base_predictions.size() != ds.size()) {
    throw UsageError("base predictions length differs from dataset");
  }
  const auto groups = ds.groups();
  switch (kind) {
    case TransformKind::random_split: {
      std::mt19937_64 engine(seed);
      for (std::size_t i = 0; i < ds.size(); ++i) out.of_row[i] = 2 * groups[i] + (engine() >> 63);
      break;
    }
    case TransformKind::label_split:
      for (std::size_t i = 0; i < ds.size(); ++i) {
        out.of_row[i] = 2 * groups[i] + (base_predictions[i] ? 1 : 0);
      }
      break;
    case TransformKind::inferred_x_predicted:
      require_soft(ds);
      for (std::size_t i = 0; i < ds.size(); ++i) {
        out.of_row[i] = 2 * argmax(ds.soft_groups(i)) + (base_predictions[i] ? 1 : 0);
      }
      break;
  }
  return out;
}

std::vector<std::uint8_t> base_predictions(const ScoredDataset& ds, double baseline) {
  std::vector<std::uint8_t> out(ds.size());
  const auto scores = ds.scores();
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = scores[i] - baseline >= 0.0 ? 1 : 0;
  return out;
}

AssignedFit fit_assignment(const ScoredDataset& ds, GroupAssignment assignment, FitSpec spec) {
  AssignedFit out;
  const std::vector<std::string> before = assignment.names;
  out.dropped_groups = drop_empty_groups(assignment);
  for (const auto& name : out.dropped_groups) {
    std::clog << "warning: assigned group '" << name << "' has no rows; dropped\n";
  }
  if (!spec.baseline.empty()) {
    if (spec.baseline.size() != before.size()) {
      throw UsageError("baseline has " + std::to_string(spec.baseline.size()) +
                       " thresholds, expected " + std::to_string(before.size()));
    }
    std::vector<double> kept;
    for (std::size_t a = 0, b = 0; a < before.size(); ++a) {
      if (b < assignment.names.size() && before[a] == assignment.names[b]) {
        kept.push_back(spec.baseline[a]);
        ++b;
      }
    }
    spec.baseline = std::move(kept);
  }
  const SearchTables tables = build_search_tables(ds, assignment, spec.needs_conditional());
  out.result = fit(spec, tables);
  out.assignment = std::move(assignment);
  return out;
}

AssignedFit fast_inferred_fit(const ScoredDataset& ds, const FitSpec& spec, double dk_threshold) {
  return fit_assignment(ds, assign_hard(ds, dk_threshold), spec);
}

SoftScorer::SoftScorer(const ScoredDataset& ds, SearchProblem problem)
    : ds_(&ds), problem_(std::move(problem)) {
  require_soft(ds);
  const bool conditional =
      problem_.objective.weighting() == Weighting::conditional ||
      (problem_.constraint && problem_.constraint->weighting() == Weighting::conditional);
  if (conditional) weights_ = conditional_weights(ds).row_weights(ds);
}

ConfusionTensor SoftScorer::counts(std::span<const double> thresholds, bool weighted) const {
  const std::size_t k = ds_->group_count();
  if (thresholds.size() != k) {
    throw UsageError("expected " + std::to_string(k) + " thresholds, got " +
                     std::to_string(thresholds.size()));
  }
  ConfusionTensor tensor(k, 1);
  const auto scores = ds_->scores();
  const auto labels = ds_->labels();
  const auto groups = ds_->groups();
  for (std::size_t i = 0; i < ds_->size(); ++i) {
    const auto g = ds_->soft_groups(i);
    double shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) shift += thresholds[j] * g[j];
    const bool positive = scores[i] - shift >= 0.0;
    const double w = weighted ? weights_[i] : 1.0;
    ConfusionCounts& c = tensor.at(groups[i], 0);
    if (labels[i]) {
      (positive ? c.tp : c.fn) += w;
    } else {
      (positive ? c.fp : c.tn) += w;
    }
  }
  tensor.refresh_global();
  return tensor;
}

bool SoftScorer::admissible(const ConfusionTensor& plain) const {
  if (problem_.levelling_up == LevellingUp::off) return true;
  for (std::size_t g = 0; g < plain.group_count(); ++g) {
    const double r = rate(plain.at(g, 0));
    if (problem_.levelling_up == LevellingUp::up ? r < problem_.base_rates[g]
                                                 : r > problem_.base_rates[g]) {
      return false;
    }
  }
  return true;
}

std::pair<double, double> SoftScorer::evaluate(std::span<const double> thresholds,
                                               const ConfusionTensor& plain) const {
  std::optional<ConfusionTensor> cond;
  if (!weights_.empty()) cond = counts(thresholds, true);
  const ConfusionTensor* cond_ptr = cond ? &*cond : nullptr;
  const double obj = problem_.objective.evaluate(plain, cond_ptr);
  const double con = problem_.constraint ? problem_.constraint->evaluate(plain, cond_ptr) : 0.0;
  return {obj, con};
}

std::optional<std::pair<double, double>> SoftScorer::score_admissible(
    std::span<const double> thresholds) const {
  const ConfusionTensor plain = counts(thresholds, false);
  if (!admissible(plain)) return std::nullopt;
  return evaluate(thresholds, plain);
}

std::pair<double, double> SoftScorer::score(std::span<const double> thresholds) const {
  return evaluate(thresholds, counts(thresholds, false));
}

std::vector<FrontierPoint> slow_enumerate(const SoftScorer& scorer,
                                          const std::vector<std::vector<double>>& grid,
                                          std::size_t max_row_evaluations) {
  const std::size_t k = scorer.dimensions();
  if (grid.size() != k) throw UsageError("soft grid needs one value list per group");
  double cost = static_cast<double>(scorer.rows());
  std::size_t total = 1;
  for (const auto& values : grid) {
    if (values.empty()) throw UsageError("empty soft grid dimension");
    total *= values.size();
    cost *= static_cast<double>(values.size());
  }
  if (cost > static_cast<double>(max_row_evaluations)) {
    throw BudgetError("soft grid search needs " + std::to_string(static_cast<std::uint64_t>(cost)) +
                      " row evaluations, over the budget of " + std::to_string(max_row_evaluations) +
                      "; use a coarser grid");
  }
  const Directions dirs = scorer.problem().directions;
  std::vector<std::size_t> digits(k, 0);
  std::vector<double> t(k);
  std::vector<FrontierPoint> points;
  for (std::size_t idx = 0; idx < total; ++idx) {
    for (std::size_t j = 0; j < k; ++j) t[j] = grid[j][digits[j]];
    if (auto s = scorer.score_admissible(t)) points.push_back(FrontierPoint{t, s->first, s->second});
    if (points.size() > 4096) points = pareto_filter(std::move(points), dirs);
    for (std::size_t j = k; j-- > 0;) {
      if (++digits[j] < grid[j].size()) break;
      digits[j] = 0;
    }
  }
  return pareto_filter(std::move(points), dirs);
}

std::vector<FrontierPoint> interpolate_frontier(std::vector<FrontierPoint> frontier,
                                                const ThresholdScorer& scorer, Directions dirs) {
  if (frontier.size() < 2) return frontier;
  frontier = pareto_filter(std::move(frontier), dirs);
  const std::size_t count = frontier.size();
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const auto& a = frontier[i].thresholds;
    const auto& b = frontier[i + 1].thresholds;
    std::vector<double> mid(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) mid[j] = a[j] + (b[j] - a[j]) / 2.0;
    if (auto s = scorer(mid)) frontier.push_back(FrontierPoint{std::move(mid), s->first, s->second});
  }
  return pareto_filter(std::move(frontier), dirs);
}

std::vector<FrontierPoint> fuse_frontiers(std::vector<FrontierPoint> a, std::vector<FrontierPoint> b,
                                          Directions dirs, const ThresholdScorer* scorer) {
  a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
  auto fused = pareto_filter(std::move(a), dirs);
  if (scorer != nullptr) fused = interpolate_frontier(std::move(fused), *scorer, dirs);
  return fused;
}

FitResult slow_search(const ScoredDataset& ds, const FitSpec& spec) {
  require_soft(ds);
  const SoftScorer scorer(ds, make_soft_problem(ds, spec));
  return finish(slow_frontier(ds, spec, scorer), ds, spec, scorer);
}

FitResult hybrid_search(const ScoredDataset& ds, const FitSpec& spec) {
  require_soft(ds);
  const SoftScorer scorer(ds, make_soft_problem(ds, spec));
  const Directions dirs = scorer.problem().directions;

  FitSpec fast_spec = spec;
  fast_spec.baseline = resolve_baseline(spec, ds.group_count());
  const SearchTables tables = build_search_tables(ds, assign_argmax(ds), spec.needs_conditional());
  const FitResult fast = fit(fast_spec, tables);
  std::vector<FrontierPoint> rescored;
  for (const auto& p : fast.frontier) {
    if (auto s = scorer.score_admissible(p.thresholds)) {
      rescored.push_back(FrontierPoint{p.thresholds, s->first, s->second});
    }
  }
  const ThresholdScorer score_fn = as_scorer(scorer);
  auto fused = fuse_frontiers(std::move(rescored), slow_frontier(ds, spec, scorer), dirs, &score_fn);
  return finish(std::move(fused), ds, spec, scorer);
}

}  // namespace fairthresh
