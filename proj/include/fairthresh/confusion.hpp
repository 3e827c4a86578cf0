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
#include <span>
#include <string>
#include <vector>

#include "fairthresh/dataset.hpp"

namespace fairthresh {

// TP/FP/FN/TN tallies. Counts are reals so that conditionally weighted
// datasets share the same machinery; unweighted counts are exact integers.
struct ConfusionCounts {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double tn = 0.0;

  double total() const { return tp + fp + fn + tn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Confusion counts for a batch of candidate classifiers, per true group and
// globally. global(c) is the componentwise sum over groups, in group order.
class ConfusionTensor {
 public:
  ConfusionTensor() = default;
  ConfusionTensor(std::size_t groups, std::size_t candidates);

  std::size_t group_count() const { return groups_; }
  std::size_t candidate_count() const { return candidates_; }

  ConfusionCounts& at(std::size_t group, std::size_t candidate) {
    return counts_[group * candidates_ + candidate];
  }
  const ConfusionCounts& at(std::size_t group, std::size_t candidate) const {
    return counts_[group * candidates_ + candidate];
  }
  const ConfusionCounts& global(std::size_t candidate) const { return global_[candidate]; }

  // Recomputes global counts from the per-group entries.
  void refresh_global();

  friend bool operator==(const ConfusionTensor&, const ConfusionTensor&) = default;

 private:
  std::size_t groups_ = 0;
  std::size_t candidates_ = 0;
  std::vector<ConfusionCounts> counts_;
  std::vector<ConfusionCounts> global_;
};

// Per assigned group: the distinct scores sorted descending, the cut
// candidates between them, and cumulative positive/negative mass of every
// TRUE group at or above each cut.
//
// Cut j of an assigned group with D distinct scores s_0 > ... > s_{D-1}:
//   j = 0      above s_0
//   0 < j < D  between s_{j-1} and s_j (the midpoint)
//   j = D      below s_{D-1}
// so a row is predicted positive at cut j iff its score is one of the
// first j distinct scores. Tied scores always land on the same side.
class CumulativeTable {
 public:
  // `row_weights` empty means unit weights.
  static CumulativeTable build(const ScoredDataset& ds, const GroupAssignment& assignment,
                               std::span<const double> row_weights = {});

  std::size_t assigned_count() const { return assigned_.size(); }
  std::size_t true_group_count() const { return true_groups_; }
  const std::vector<std::string>& assigned_names() const { return names_; }

  // Cut thresholds, descending; size is distinct-score count + 1.
  std::span<const double> cuts(std::size_t assigned) const { return assigned_[assigned].cuts; }
  // Number of rows (unweighted) scoring above cut j.
  std::span<const std::size_t> rows_above(std::size_t assigned) const {
    return assigned_[assigned].rows_above;
  }
  std::size_t row_count(std::size_t assigned) const { return assigned_[assigned].rows_above.back(); }

  double positives_above(std::size_t assigned, std::size_t cut, std::size_t true_group) const {
    return assigned_[assigned].cumulative[(cut * true_groups_ + true_group) * 2];
  }
  double negatives_above(std::size_t assigned, std::size_t cut, std::size_t true_group) const {
    return assigned_[assigned].cumulative[(cut * true_groups_ + true_group) * 2 + 1];
  }
  double total_positives(std::size_t true_group) const { return total_pos_[true_group]; }
  double total_negatives(std::size_t true_group) const { return total_neg_[true_group]; }

  // Index of the cut equivalent to an arbitrary threshold t: the number of
  // distinct scores s with s >= t.
  std::size_t cut_index(std::size_t assigned, double threshold) const;

 private:
  struct AssignedGroup {
    std::vector<double> distinct;  // descending
    std::vector<double> cuts;
    std::vector<std::size_t> rows_above;
    std::vector<double> cumulative;  // [cut][true group][pos, neg]
  };

  std::vector<std::string> names_;
  std::size_t true_groups_ = 0;
  std::vector<AssignedGroup> assigned_;
  std::vector<double> total_pos_;
  std::vector<double> total_neg_;
};

// Confusion counts (single candidate) at one threshold per assigned group.
ConfusionTensor counts_at(const CumulativeTable& table, std::span<const double> thresholds);
// Same, addressing cuts by index.
ConfusionTensor counts_at_cuts(const CumulativeTable& table, std::span<const std::size_t> cuts);

// Reference implementation: applies f(x) - t[G'(x)] >= 0 row by row.
ConfusionTensor counts_naive(const ScoredDataset& ds, const GroupAssignment& assignment,
                             std::span<const double> thresholds,
                             std::span<const double> row_weights = {});

// Tallies arbitrary binary predictions against the true groups.
ConfusionTensor tally_predictions(const ScoredDataset& ds, std::span<const std::uint8_t> predictions,
                                  std::span<const double> row_weights = {});

}  // namespace fairthresh
