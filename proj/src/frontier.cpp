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

#include "fairthresh/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <thread>

#include "fairthresh/error.hpp"

namespace fairthresh {

namespace {

// Saturating T^k.
std::size_t checked_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > std::numeric_limits<std::size_t>::max() / base) {
      return std::numeric_limits<std::size_t>::max();
    }
    out *= base;
  }
  return out;
}

std::size_t integer_root(std::size_t budget, std::size_t k) {
  auto t = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(budget), 1.0 / k)));
  while (t > 1 && checked_pow(t, k) > budget) --t;
  while (checked_pow(t + 1, k) <= budget) ++t;
  return t;
}

// Objective and constraint mapped so that larger is better for both.
struct Oriented {
  double objective;
  double constraint;
};

Oriented orient(double objective, double constraint, Directions dirs) {
  return {dirs.maximize_objective ? objective : -objective,
          dirs.sense == ConstraintSense::at_least ? constraint : -constraint};
}

struct Candidate {
  Oriented key;
  double objective;
  double constraint;
  std::uint64_t index;
};

// In-place Pareto reduction. Within one grid, ascending combination index is
// ascending lexicographic threshold order, so the index breaks ties.
void reduce(std::vector<Candidate>& cands) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& l, const Candidate& r) {
    if (l.key.objective != r.key.objective) return l.key.objective > r.key.objective;
    if (l.key.constraint != r.key.constraint) return l.key.constraint > r.key.constraint;
    return l.index < r.index;
  });
  std::size_t kept = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cands) {
    if (kept == 0 || c.key.constraint > best) {
      best = c.key.constraint;
      cands[kept++] = c;
    }
  }
  cands.resize(kept);
}

bool lex_less(const std::vector<double>& l, const std::vector<double>& r) {
  return std::lexicographical_compare(l.begin(), l.end(), r.begin(), r.end());
}

double group_rate(const ConfusionCounts& c) { return safe_div(c.tp + c.fp, c.total()); }

bool admissible(const ConfusionTensor& plain, std::size_t candidate, const SearchProblem& problem) {
  if (problem.levelling_up == LevellingUp::off) return true;
  for (std::size_t g = 0; g < plain.group_count(); ++g) {
    const double rate = group_rate(plain.at(g, candidate));
    if (problem.levelling_up == LevellingUp::up ? rate < problem.base_rates[g]
                                                : rate > problem.base_rates[g]) {
      return false;
    }
  }
  return true;
}

bool needs_conditional_counts(const SearchProblem& p) {
  return p.objective.weighting() == Weighting::conditional ||
         (p.constraint && p.constraint->weighting() == Weighting::conditional);
}

// Per (assigned group, grid position) contributions to every true group's
// positives and negatives, with positions in ascending threshold order.
struct Contributions {
  std::vector<std::vector<double>> pos;  // [a][p * K + g]
  std::vector<std::vector<double>> neg;

  Contributions(const CumulativeTable& table, const GridCuts& grid) {
    const std::size_t k_true = table.true_group_count();
    pos.resize(grid.size());
    neg.resize(grid.size());
    for (std::size_t a = 0; a < grid.size(); ++a) {
      const std::size_t size = grid[a].size();
      pos[a].resize(size * k_true);
      neg[a].resize(size * k_true);
      for (std::size_t p = 0; p < size; ++p) {
        const std::size_t cut = grid[a][size - 1 - p];
        for (std::size_t g = 0; g < k_true; ++g) {
          pos[a][p * k_true + g] = table.positives_above(a, cut, g);
          neg[a][p * k_true + g] = table.negatives_above(a, cut, g);
        }
      }
    }
  }
};

// Mixed-radix walk over combinations with running partial sums per level.
class Odometer {
 public:
  Odometer(const CumulativeTable& table, const Contributions& contrib,
           const std::vector<std::size_t>& radix, std::uint64_t start)
      : table_(table), contrib_(contrib), radix_(radix), k_true_(table.true_group_count()) {
    digits_.resize(radix.size());
    std::uint64_t rest = start;
    for (std::size_t l = radix.size(); l-- > 0;) {
      digits_[l] = rest % radix[l];
      rest /= radix[l];
    }
    pos_.assign(radix.size() * k_true_, 0.0);
    neg_.assign(radix.size() * k_true_, 0.0);
    recompute(0);
  }

  void fill(ConfusionTensor& tensor, std::size_t candidate) const {
    const std::size_t last = (radix_.size() - 1) * k_true_;
    for (std::size_t g = 0; g < k_true_; ++g) {
      const double tp = pos_[last + g];
      const double fp = neg_[last + g];
      tensor.at(g, candidate) = ConfusionCounts{tp, fp, table_.total_positives(g) - tp,
                                                table_.total_negatives(g) - fp};
    }
  }

  void advance() {
    std::size_t l = radix_.size();
    while (l-- > 0) {
      if (++digits_[l] < radix_[l]) break;
      digits_[l] = 0;
      if (l == 0) break;
    }
    recompute(l);
  }

 private:
  void recompute(std::size_t from) {
    for (std::size_t l = from; l < radix_.size(); ++l) {
      for (std::size_t g = 0; g < k_true_; ++g) {
        const double base_pos = l == 0 ? 0.0 : pos_[(l - 1) * k_true_ + g];
        const double base_neg = l == 0 ? 0.0 : neg_[(l - 1) * k_true_ + g];
        pos_[l * k_true_ + g] = base_pos + contrib_.pos[l][digits_[l] * k_true_ + g];
        neg_[l * k_true_ + g] = base_neg + contrib_.neg[l][digits_[l] * k_true_ + g];
      }
    }
  }

  const CumulativeTable& table_;
  const Contributions& contrib_;
  const std::vector<std::size_t>& radix_;
  std::size_t k_true_;
  std::vector<std::size_t> digits_;
  std::vector<double> pos_;
  std::vector<double> neg_;
};

constexpr std::size_t kBatch = 4096;

std::vector<Candidate> enumerate_range(const SearchTables& tables, const Contributions& plain,
                                       const Contributions* cond,
                                       const std::vector<std::size_t>& radix,
                                       const SearchProblem& problem, std::uint64_t begin,
                                       std::uint64_t end) {
  const std::size_t k_true = tables.plain.true_group_count();
  std::vector<Candidate> local;
  if (begin >= end) return local;
  Odometer plain_walk(tables.plain, plain, radix, begin);
  std::optional<Odometer> cond_walk;
  if (cond) cond_walk.emplace(*tables.conditional, *cond, radix, begin);

  std::vector<double> obj(kBatch), con(kBatch);
  for (std::uint64_t first = begin; first < end; first += kBatch) {
    const std::size_t size = static_cast<std::size_t>(std::min<std::uint64_t>(kBatch, end - first));
    ConfusionTensor plain_batch(k_true, size);
    ConfusionTensor cond_batch(cond ? k_true : 0, cond ? size : 0);
    for (std::size_t c = 0; c < size; ++c) {
      plain_walk.fill(plain_batch, c);
      if (cond_walk) cond_walk->fill(cond_batch, c);
      if (first + c + 1 < end) {
        plain_walk.advance();
        if (cond_walk) cond_walk->advance();
      }
    }
    plain_batch.refresh_global();
    if (cond) cond_batch.refresh_global();
    const TensorSet set{&plain_batch, cond ? &cond_batch : nullptr};
    const std::span<double> obj_out(obj.data(), size);
    const std::span<double> con_out(con.data(), size);
    problem.objective.evaluate(set, obj_out);
    if (problem.constraint) {
      problem.constraint->evaluate(set, con_out);
    } else {
      std::fill(con_out.begin(), con_out.end(), 0.0);
    }
    for (std::size_t c = 0; c < size; ++c) {
      if (!admissible(plain_batch, c, problem)) continue;
      local.push_back(Candidate{orient(obj[c], con[c], problem.directions), obj[c], con[c], first + c});
    }
    if (local.size() > 4 * kBatch) reduce(local);
  }
  reduce(local);
  return local;
}

}  // namespace

std::pair<std::size_t, std::size_t> GridConfig::resolve(std::size_t k) const {
  if (k == 0) throw UsageError("no assigned groups");
  const std::size_t root = std::max<std::size_t>(2, integer_root(max_combinations, k));
  std::size_t coarse = coarse_T;
  if (coarse == 0) {
    coarse = std::max<std::size_t>(8, root);
    while (coarse > 2 && checked_pow(coarse, k) > max_combinations) --coarse;
  }
  std::size_t fine = fine_T;
  if (fine == 0) fine = std::min(2 * coarse + 1, std::max(root, coarse));
  return {coarse, fine};
}

SearchTables build_search_tables(const ScoredDataset& ds, const GroupAssignment& assignment,
                                 bool with_conditional) {
  SearchTables tables{CumulativeTable::build(ds, assignment), std::nullopt};
  if (with_conditional) {
    const auto weights = conditional_weights(ds).row_weights(ds);
    tables.conditional = CumulativeTable::build(ds, assignment, weights);
  }
  return tables;
}

std::vector<std::size_t> grid_in_range(const CumulativeTable& table, std::size_t assigned,
                                       std::size_t lo, std::size_t hi, std::size_t T) {
  if (T < 2) throw UsageError("grid size T must be at least 2");
  const auto ranks = table.rows_above(assigned);
  if (lo > hi || hi >= ranks.size()) throw UsageError("grid range out of bounds");
  std::vector<std::size_t> out;
  if (hi - lo + 1 <= T) {
    for (std::size_t j = lo; j <= hi; ++j) out.push_back(j);
    return out;
  }
  const std::size_t base = ranks[lo];
  const std::size_t span = ranks[hi] - ranks[lo];
  const auto first = ranks.begin() + static_cast<std::ptrdiff_t>(lo);
  const auto last = ranks.begin() + static_cast<std::ptrdiff_t>(hi) + 1;
  for (std::size_t i = 0; i < T; ++i) {
    // Rounded i * span / (T - 1).
    const std::size_t target = base + (2 * i * span + (T - 1)) / (2 * (T - 1));
    auto it = std::lower_bound(first, last, target);
    if (it == last) --it;
    if (it != first && target - *(it - 1) <= *it - target) --it;
    const auto j = static_cast<std::size_t>(it - ranks.begin());
    if (out.empty() || out.back() != j) out.push_back(j);
  }
  return out;
}

GridCuts grid_thresholds(const CumulativeTable& table, std::size_t T) {
  if (T < 2) throw UsageError("grid size T must be at least 2");
  GridCuts grid(table.assigned_count());
  for (std::size_t a = 0; a < grid.size(); ++a) {
    grid[a] = grid_in_range(table, a, 0, table.cuts(a).size() - 1, T);
  }
  return grid;
}

std::vector<std::vector<double>> grid_values(const CumulativeTable& table, const GridCuts& grid) {
  std::vector<std::vector<double>> out(grid.size());
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t j : grid[a]) out[a].push_back(table.cuts(a)[j]);
  }
  return out;
}

std::vector<FrontierPoint> enumerate_frontier(const SearchTables& tables, const GridCuts& grid_in,
                                              const SearchProblem& problem) {
  const std::size_t k = tables.plain.assigned_count();
  if (grid_in.size() != k) {
    throw UsageError("grid has " + std::to_string(grid_in.size()) + " groups, table has " +
                     std::to_string(k));
  }
  if (needs_conditional_counts(problem) && !tables.conditional) {
    throw UsageError("conditional metric needs conditional tables");
  }
  GridCuts grid = grid_in;
  std::vector<std::size_t> radix(k);
  std::size_t total = 1;
  for (std::size_t a = 0; a < k; ++a) {
    auto& g = grid[a];
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    if (g.empty()) throw UsageError("empty grid for group '" + tables.plain.assigned_names()[a] + "'");
    if (g.back() >= tables.plain.cuts(a).size()) throw UsageError("grid cut out of range");
    radix[a] = g.size();
    total = total > problem.max_combinations / radix[a] + 1 ? problem.max_combinations + 1
                                                             : total * radix[a];
  }
  if (total > problem.max_combinations) {
    throw BudgetError("grid search over " + std::to_string(k) +
                      " groups exceeds the budget of " + std::to_string(problem.max_combinations) +
                      " combinations; use a coarser grid or merge groups");
  }

  const Contributions plain(tables.plain, grid);
  std::optional<Contributions> cond;
  if (needs_conditional_counts(problem)) cond.emplace(*tables.conditional, grid);
  const Contributions* cond_ptr = cond ? &*cond : nullptr;

  const unsigned workers =
      std::max(1u, std::min<unsigned>(problem.threads == 0 ? std::thread::hardware_concurrency()
                                                            : problem.threads,
                                      static_cast<unsigned>(std::max<std::size_t>(1, total / kBatch))));
  std::vector<std::vector<Candidate>> parts(workers);
  if (workers == 1) {
    parts[0] = enumerate_range(tables, plain, cond_ptr, radix, problem, 0, total);
  } else {
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = std::min<std::uint64_t>(total, w * chunk);
      const std::uint64_t end = std::min<std::uint64_t>(total, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        parts[w] = enumerate_range(tables, plain, cond_ptr, radix, problem, begin, end);
      });
    }
  }
  std::vector<Candidate> merged;
  for (auto& p : parts) merged.insert(merged.end(), p.begin(), p.end());
  reduce(merged);

  std::vector<FrontierPoint> out;
  out.reserve(merged.size());
  for (const auto& c : merged) {
    FrontierPoint p;
    p.thresholds.resize(k);
    std::uint64_t rest = c.index;
    for (std::size_t l = k; l-- > 0;) {
      const std::size_t digit = rest % radix[l];
      rest /= radix[l];
      p.thresholds[l] = tables.plain.cuts(l)[grid[l][radix[l] - 1 - digit]];
    }
    p.objective = c.objective;
    p.constraint = c.constraint;
    out.push_back(std::move(p));
  }
  return pareto_filter(std::move(out), problem.directions);
}

std::pair<double, double> score_thresholds(const SearchTables& tables, const SearchProblem& problem,
                                           std::span<const double> thresholds) {
  const ConfusionTensor plain = counts_at(tables.plain, thresholds);
  std::optional<ConfusionTensor> cond;
  if (tables.conditional) cond = counts_at(*tables.conditional, thresholds);
  const ConfusionTensor* cond_ptr = cond ? &*cond : nullptr;
  const double obj = problem.objective.evaluate(plain, cond_ptr);
  const double con = problem.constraint ? problem.constraint->evaluate(plain, cond_ptr) : 0.0;
  return {obj, con};
}

std::vector<FrontierPoint> pareto_filter(std::vector<FrontierPoint> points, Directions dirs) {
  std::sort(points.begin(), points.end(), [&](const FrontierPoint& l, const FrontierPoint& r) {
    const Oriented lo = orient(l.objective, l.constraint, dirs);
    const Oriented ro = orient(r.objective, r.constraint, dirs);
    if (lo.objective != ro.objective) return lo.objective > ro.objective;
    if (lo.constraint != ro.constraint) return lo.constraint > ro.constraint;
    return lex_less(l.thresholds, r.thresholds);
  });
  std::vector<FrontierPoint> kept;
  double best = -std::numeric_limits<double>::infinity();
  for (auto& p : points) {
    const double c = orient(p.objective, p.constraint, dirs).constraint;
    if (kept.empty() || c > best) {
      best = c;
      kept.push_back(std::move(p));
    }
  }
  std::sort(kept.begin(), kept.end(), [](const FrontierPoint& l, const FrontierPoint& r) {
    return l.objective > r.objective;
  });
  return kept;
}

const FrontierPoint& select_solution(std::span<const FrontierPoint> frontier, double value,
                                     Directions dirs) {
  if (frontier.empty()) throw UsageError("cannot select from an empty frontier");
  const bool at_most = dirs.sense == ConstraintSense::at_most;
  auto slack = [&](const FrontierPoint& p) { return at_most ? value - p.constraint : p.constraint - value; };
  auto objective = [&](const FrontierPoint& p) {
    return dirs.maximize_objective ? p.objective : -p.objective;
  };

  const FrontierPoint* best = nullptr;
  for (const auto& p : frontier) {
    if (slack(p) < 0.0) continue;
    if (best == nullptr || objective(p) > objective(*best) ||
        (objective(p) == objective(*best) &&
         (slack(p) > slack(*best) ||
          (slack(p) == slack(*best) && lex_less(p.thresholds, best->thresholds))))) {
      best = &p;
    }
  }
  if (best != nullptr) return *best;

  // Nothing feasible: least violation.
  for (const auto& p : frontier) {
    if (best == nullptr || slack(p) > slack(*best) ||
        (slack(p) == slack(*best) &&
         (objective(p) > objective(*best) ||
          (objective(p) == objective(*best) && lex_less(p.thresholds, best->thresholds))))) {
      best = &p;
    }
  }
  return *best;
}

Directions FitSpec::directions() const {
  Directions d;
  d.maximize_objective = maximize_objective.value_or(objective.greater_is_better());
  if (constraint_sense) {
    d.sense = *constraint_sense;
  } else if (constraint) {
    d.sense = constraint->greater_is_better() ? ConstraintSense::at_least : ConstraintSense::at_most;
  }
  return d;
}

bool FitSpec::needs_conditional() const {
  return objective.weighting() == Weighting::conditional ||
         (constraint && constraint->weighting() == Weighting::conditional);
}

SearchProblem make_problem(const FitSpec& spec, const SearchTables& tables) {
  SearchProblem problem{spec.objective, spec.constraint, spec.directions(), spec.levelling_up,
                        {}, spec.grid.max_combinations, spec.grid.threads};
  const std::size_t k = tables.plain.assigned_count();
  std::vector<double> baseline = spec.baseline.empty() ? std::vector<double>(k, 0.0) : spec.baseline;
  if (baseline.size() != k) {
    throw UsageError("baseline has " + std::to_string(baseline.size()) + " thresholds, expected " +
                     std::to_string(k));
  }
  const ConfusionTensor base = counts_at(tables.plain, baseline);
  for (std::size_t g = 0; g < base.group_count(); ++g) {
    problem.base_rates.push_back(group_rate(base.at(g, 0)));
  }
  return problem;
}

FitResult fit(const FitSpec& spec, const SearchTables& tables) {
  const SearchProblem problem = make_problem(spec, tables);
  const CumulativeTable& table = tables.plain;
  const std::size_t k = table.assigned_count();
  if (k >= 6) {
    std::clog << "warning: grid search over " << k
              << " assigned groups is exponential in the group count\n";
  }
  const auto [coarse_T, fine_T] = spec.grid.resolve(k);

  const GridCuts coarse = grid_thresholds(table, coarse_T);
  std::vector<FrontierPoint> frontier = enumerate_frontier(tables, coarse, problem);

  if (spec.grid.refine && !frontier.empty()) {
    GridCuts fine(k);
    for (std::size_t a = 0; a < k; ++a) {
      std::size_t lo_cut = std::numeric_limits<std::size_t>::max();
      std::size_t hi_cut = 0;
      for (const auto& p : frontier) {
        const std::size_t j = table.cut_index(a, p.thresholds[a]);
        lo_cut = std::min(lo_cut, j);
        hi_cut = std::max(hi_cut, j);
      }
      const auto& g = coarse[a];
      const auto lo_pos = static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), lo_cut) - g.begin());
      const auto hi_pos = static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), hi_cut) - g.begin());
      const std::size_t lo = g[lo_pos == 0 ? 0 : lo_pos - 1];
      const std::size_t hi = g[std::min(g.size() - 1, hi_pos + 1)];
      fine[a] = grid_in_range(table, a, lo, hi, fine_T);
    }
    if (fine != coarse) {
      auto refined = enumerate_frontier(tables, fine, problem);
      frontier.insert(frontier.end(), std::make_move_iterator(refined.begin()),
                      std::make_move_iterator(refined.end()));
    }
  }

  FrontierPoint base;
  base.thresholds = spec.baseline.empty() ? std::vector<double>(k, 0.0) : spec.baseline;
  std::tie(base.objective, base.constraint) = score_thresholds(tables, problem, base.thresholds);
  frontier.push_back(std::move(base));
  frontier = pareto_filter(std::move(frontier), problem.directions);

  FitResult result;
  result.directions = problem.directions;
  result.selected = select_solution(frontier, spec.constraint ? spec.value : 0.0, problem.directions);
  result.solution = ThresholdAssignment{table.assigned_names(), result.selected.thresholds};
  result.frontier = std::move(frontier);
  return result;
}

FitResult capacity_fit(const Metric& objective, double max_rate, const SearchTables& tables,
                       GridConfig grid) {
  FitSpec spec;
  spec.objective = objective;
  spec.constraint = metrics::pos_pred_rate().overall();
  spec.value = max_rate;
  spec.constraint_sense = ConstraintSense::at_most;
  spec.grid = grid;
  return fit(spec, tables);
}

}  // namespace fairthresh
