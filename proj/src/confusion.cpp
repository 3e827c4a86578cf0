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

#include "fairthresh/confusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairthresh/error.hpp"

namespace fairthresh {

namespace {

double weight_of(std::span<const double> weights, std::size_t row) {
  return weights.empty() ? 1.0 : weights[row];
}

void check_weights(const ScoredDataset& ds, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != ds.size()) {
    throw UsageError("row weights length differs from dataset");
  }
}

// Separates a > b; never equal to b, so s >= cut holds exactly for s >= a.
double cut_between(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid > b ? mid : a;
}

double sentinel_offset(double x) { return std::max(1.0, std::abs(x)); }

}  // namespace

ConfusionTensor::ConfusionTensor(std::size_t groups, std::size_t candidates)
    : groups_(groups),
      candidates_(candidates),
      counts_(groups * candidates),
      global_(candidates) {}

void ConfusionTensor::refresh_global() {
  for (std::size_t c = 0; c < candidates_; ++c) {
    ConfusionCounts sum;
    for (std::size_t g = 0; g < groups_; ++g) sum += at(g, c);
    global_[c] = sum;
  }
}

CumulativeTable CumulativeTable::build(const ScoredDataset& ds, const GroupAssignment& assignment,
                                       std::span<const double> row_weights) {
  if (assignment.of_row.size() != ds.size()) {
    throw UsageError("assignment length differs from dataset");
  }
  check_weights(ds, row_weights);
  const std::size_t k_true = ds.group_count();
  const std::size_t k_assigned = assignment.names.size();

  CumulativeTable table;
  table.names_ = assignment.names;
  table.true_groups_ = k_true;
  table.assigned_.resize(k_assigned);
  table.total_pos_.assign(k_true, 0.0);
  table.total_neg_.assign(k_true, 0.0);

  std::vector<std::vector<std::size_t>> members(k_assigned);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (assignment.of_row[i] >= k_assigned) throw UsageError("assigned group out of range");
    members[assignment.of_row[i]].push_back(i);
  }

  const auto scores = ds.scores();
  const auto labels = ds.labels();
  const auto groups = ds.groups();
  for (std::size_t a = 0; a < k_assigned; ++a) {
    auto& rows = members[a];
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t l, std::size_t r) { return scores[l] > scores[r]; });
    AssignedGroup& out = table.assigned_[a];
    std::vector<double> running(k_true * 2, 0.0);
    out.cumulative.insert(out.cumulative.end(), running.begin(), running.end());
    out.rows_above.push_back(0);
    std::size_t i = 0;
    while (i < rows.size()) {
      const double s = scores[rows[i]];
      for (; i < rows.size() && scores[rows[i]] == s; ++i) {
        const std::size_t row = rows[i];
        running[groups[row] * 2 + (labels[row] ? 0 : 1)] += weight_of(row_weights, row);
      }
      out.distinct.push_back(s);
      out.rows_above.push_back(i);
      out.cumulative.insert(out.cumulative.end(), running.begin(), running.end());
    }
    const std::size_t d = out.distinct.size();
    out.cuts.resize(d + 1);
    if (d == 0) {
      out.cuts[0] = 0.0;
    } else {
      out.cuts[0] = out.distinct[0] + sentinel_offset(out.distinct[0]);
      for (std::size_t j = 1; j < d; ++j) out.cuts[j] = cut_between(out.distinct[j - 1], out.distinct[j]);
      out.cuts[d] = out.distinct[d - 1] - sentinel_offset(out.distinct[d - 1]);
    }
    for (std::size_t g = 0; g < k_true; ++g) {
      table.total_pos_[g] += running[g * 2];
      table.total_neg_[g] += running[g * 2 + 1];
    }
  }
  return table;
}

std::size_t CumulativeTable::cut_index(std::size_t assigned, double threshold) const {
  const auto& distinct = assigned_[assigned].distinct;
  // distinct is descending: count the prefix with s >= threshold.
  auto it = std::partition_point(distinct.begin(), distinct.end(),
                                 [&](double s) { return s - threshold >= 0.0; });
  return static_cast<std::size_t>(it - distinct.begin());
}

ConfusionTensor counts_at_cuts(const CumulativeTable& table, std::span<const std::size_t> cuts) {
  if (cuts.size() != table.assigned_count() || cuts.empty()) {
    throw UsageError("expected " + std::to_string(table.assigned_count()) +
                     " thresholds, got " + std::to_string(cuts.size()));
  }
  const std::size_t k_true = table.true_group_count();
  ConfusionTensor tensor(k_true, 1);
  for (std::size_t g = 0; g < k_true; ++g) {
    double tp = 0.0;
    double fp = 0.0;
    for (std::size_t a = 0; a < cuts.size(); ++a) {
      if (cuts[a] >= table.cuts(a).size()) throw UsageError("cut index out of range");
      tp += table.positives_above(a, cuts[a], g);
      fp += table.negatives_above(a, cuts[a], g);
    }
    tensor.at(g, 0) = ConfusionCounts{tp, fp, table.total_positives(g) - tp,
                                      table.total_negatives(g) - fp};
  }
  tensor.refresh_global();
  return tensor;
}

ConfusionTensor counts_at(const CumulativeTable& table, std::span<const double> thresholds) {
  if (thresholds.size() != table.assigned_count() || thresholds.empty()) {
    throw UsageError("expected " + std::to_string(table.assigned_count()) +
                     " thresholds, got " + std::to_string(thresholds.size()));
  }
  std::vector<std::size_t> cuts(thresholds.size());
  for (std::size_t a = 0; a < thresholds.size(); ++a) cuts[a] = table.cut_index(a, thresholds[a]);
  return counts_at_cuts(table, cuts);
}

ConfusionTensor counts_naive(const ScoredDataset& ds, const GroupAssignment& assignment,
                             std::span<const double> thresholds,
                             std::span<const double> row_weights) {
  if (thresholds.empty() || thresholds.size() != assignment.names.size()) {
    throw UsageError("expected " + std::to_string(assignment.names.size()) +
                     " thresholds, got " + std::to_string(thresholds.size()));
  }
  if (assignment.of_row.size() != ds.size()) {
    throw UsageError("assignment length differs from dataset");
  }
  check_weights(ds, row_weights);
  ConfusionTensor tensor(ds.group_count(), 1);
  const auto scores = ds.scores();
  const auto labels = ds.labels();
  const auto groups = ds.groups();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const bool positive = scores[i] - thresholds[assignment.of_row[i]] >= 0.0;
    const double w = weight_of(row_weights, i);
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

ConfusionTensor tally_predictions(const ScoredDataset& ds, std::span<const std::uint8_t> predictions,
                                  std::span<const double> row_weights) {
  if (predictions.size() != ds.size()) throw UsageError("predictions length differs from dataset");
  check_weights(ds, row_weights);
  ConfusionTensor tensor(ds.group_count(), 1);
  const auto labels = ds.labels();
  const auto groups = ds.groups();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double w = weight_of(row_weights, i);
    ConfusionCounts& c = tensor.at(groups[i], 0);
    if (labels[i]) {
      (predictions[i] ? c.tp : c.fn) += w;
    } else {
      (predictions[i] ? c.fp : c.tn) += w;
    }
  }
  tensor.refresh_global();
  return tensor;
}

}  // namespace fairthresh
