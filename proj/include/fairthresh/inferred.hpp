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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairthresh/confusion.hpp"
#include "fairthresh/dataset.hpp"
#include "fairthresh/frontier.hpp"

namespace fairthresh {

// Name of the extra assigned group for rows the group predictor is unsure about.
inline constexpr std::string_view kDontKnowGroup = "?";
inline constexpr double kDefaultDontKnowThreshold = 2.0 / 3.0;

// Hard assignment from soft group scores: the argmax group when its score is
// at least `dk_threshold`, else the "?" group (always the last name). Ties go
// to the earlier group. Requires dk_threshold in (1/k, 1].
GroupAssignment assign_hard(const ScoredDataset& ds, double dk_threshold);
// Plain argmax, no "?" group.
GroupAssignment assign_argmax(const ScoredDataset& ds);

enum class TransformKind { random_split, label_split, inferred_x_predicted };

std::string_view to_string(TransformKind kind);

// Splits every group in two so each gets a pair of thresholds:
//   random_split          (true group, fair coin from `seed`)
//   label_split           (true group, base prediction)
//   inferred_x_predicted  (argmax inferred group, base prediction)
// Subgroups are named "<group>|<bit>", group-major.
GroupAssignment group_transform(TransformKind kind, const ScoredDataset& ds,
                                std::span<const std::uint8_t> base_predictions,
                                std::uint64_t seed);

// Decisions of the original classifier: score >= baseline threshold.
std::vector<std::uint8_t> base_predictions(const ScoredDataset& ds, double baseline);

struct AssignedFit {
  GroupAssignment assignment;
  std::vector<std::string> dropped_groups;
  FitResult result;
};

// Fits thresholds over an arbitrary assignment with metrics against the true
// groups. Empty assigned groups are dropped (and reported) first. The spec's
// baseline, if given, must match the assignment before dropping.
AssignedFit fit_assignment(const ScoredDataset& ds, GroupAssignment assignment, FitSpec spec);

// Fast pathway: hard assignment with a don't-know group.
AssignedFit fast_inferred_fit(const ScoredDataset& ds, const FitSpec& spec,
                              double dk_threshold = kDefaultDontKnowThreshold);

// Scores soft threshold vectors with f(x) - t . g(x) >= 0, row by row.
class SoftScorer {
 public:
  SoftScorer(const ScoredDataset& ds, SearchProblem problem);

  std::size_t dimensions() const { return ds_->group_count(); }
  std::size_t rows() const { return ds_->size(); }
  const SearchProblem& problem() const { return problem_; }

  std::pair<double, double> score(std::span<const double> thresholds) const;
  std::optional<std::pair<double, double>> score_admissible(std::span<const double> thresholds) const;
  ConfusionTensor counts(std::span<const double> thresholds, bool weighted) const;
  // Whether the thresholds pass the levelling-up filter.
  bool admissible(const ConfusionTensor& plain) const;

 private:
  std::pair<double, double> evaluate(std::span<const double> thresholds,
                                     const ConfusionTensor& plain) const;

  const ScoredDataset* ds_;
  SearchProblem problem_;
  std::vector<double> weights_;
};

// (objective, constraint) of a threshold vector, or nullopt when the vector
// is excluded by the levelling-up filter.
using ThresholdScorer =
    std::function<std::optional<std::pair<double, double>>(std::span<const double>)>;

// Naive enumeration of every combination of per-dimension threshold values.
std::vector<FrontierPoint> slow_enumerate(const SoftScorer& scorer,
                                          const std::vector<std::vector<double>>& grid,
                                          std::size_t max_row_evaluations);

// Evaluates the componentwise midpoint of each pair of frontier neighbours
// (by objective) and re-filters. Single pass.
std::vector<FrontierPoint> interpolate_frontier(std::vector<FrontierPoint> frontier,
                                                const ThresholdScorer& scorer, Directions dirs);

// Union and Pareto filter; interpolated when a scorer is given.
std::vector<FrontierPoint> fuse_frontiers(std::vector<FrontierPoint> a,
                                          std::vector<FrontierPoint> b, Directions dirs,
                                          const ThresholdScorer* scorer = nullptr);

// Slow pathway: coarse and fine naive searches over soft thresholds, then
// interpolation. Thresholds index the dataset's groups.
FitResult slow_search(const ScoredDataset& ds, const FitSpec& spec);

// Hybrid: the fast (argmax) frontier re-scored under the soft rule, fused
// with the slow frontier and interpolated.
FitResult hybrid_search(const ScoredDataset& ds, const FitSpec& spec);

}  // namespace fairthresh
