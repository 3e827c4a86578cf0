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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairthresh/confusion.hpp"
#include "fairthresh/dataset.hpp"

namespace fairthresh {

// num / den, or 0 when den == 0. Every kernel in the catalog divides through
// this so that degenerate candidates score 0 instead of NaN.
inline double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

enum class View { overall, per_group, diff, max_diff, average, max, min, ratio };

std::string_view to_string(View view);
std::optional<View> parse_view(std::string_view text);

using Kernel = std::function<double(const ConfusionCounts&)>;
// Receives the counts of one group followed by the global counts.
using TotalKernel = std::function<double(const ConfusionCounts&, const ConfusionCounts&)>;

class Metric;

// A named scalar function of confusion counts with a direction flag.
// Fairness measures are obtained as views (diff, ratio, min, ...) over the
// per-group values.
class GroupMetric {
 public:
  GroupMetric(std::string name, Kernel kernel, bool greater_is_better = true);
  // A total metric: the kernel also sees the global counts.
  static GroupMetric total(std::string name, TotalKernel kernel, bool greater_is_better = true);

  const std::string& name() const { return name_; }
  bool greater_is_better() const { return greater_is_better_; }
  bool is_total() const { return total_; }

  // Value on a single set of counts. A total metric treats them as global too.
  double operator()(const ConfusionCounts& counts) const { return kernel_(counts, counts); }
  double operator()(const ConfusionCounts& group, const ConfusionCounts& global) const {
    return kernel_(group, global);
  }

  std::vector<double> per_group(const ConfusionTensor& tensor, std::size_t candidate = 0) const;

  Metric view(View v) const;
  Metric overall() const;
  Metric diff() const;
  Metric max_diff() const;
  Metric average() const;
  Metric max() const;
  Metric min() const;
  Metric ratio() const;

 private:
  GroupMetric(std::string name, TotalKernel kernel, bool greater_is_better, bool total);

  std::string name_;
  TotalKernel kernel_;
  bool greater_is_better_;
  bool total_;
};

// Which counts a metric is computed on.
enum class Weighting { plain, conditional };

// The count tensors available to a metric. `conditional` is required only by
// metrics with Weighting::conditional.
struct TensorSet {
  const ConfusionTensor* plain = nullptr;
  const ConfusionTensor* conditional = nullptr;
};

// A scalar, directed measure over a batch of candidates: a view of a
// GroupMetric, or a combination of such views. This is what fit() optimizes
// and constrains.
class Metric {
 public:
  using BatchFn = std::function<void(const ConfusionTensor&, std::span<double>)>;

  Metric(std::string name, bool greater_is_better, BatchFn fn);

  const std::string& name() const { return name_; }
  bool greater_is_better() const { return greater_is_better_; }
  Weighting weighting() const { return weighting_; }

  // One value per candidate of the selected tensor, written to `out`.
  void evaluate(const TensorSet& tensors, std::span<double> out) const;
  std::vector<double> evaluate(const TensorSet& tensors) const;
  double evaluate(const ConfusionTensor& plain, const ConfusionTensor* conditional = nullptr) const;

  // The same measure computed on conditionally weighted counts.
  Metric conditional() const;

  // Set for metrics built as GroupMetric views.
  const GroupMetric* base() const { return base_.get(); }
  std::optional<View> view() const { return view_; }

 private:
  friend class GroupMetric;

  std::string name_;
  bool greater_is_better_;
  Weighting weighting_ = Weighting::plain;
  BatchFn fn_;
  std::shared_ptr<const GroupMetric> base_;
  std::optional<View> view_;
};

// Mean (max) of several metrics evaluated on the same counts.
Metric mean_of(std::string name, std::vector<Metric> parts, bool greater_is_better);
Metric max_of(std::string name, std::vector<Metric> parts, bool greater_is_better);

// Aggregates per-group values the way the views do. Exposed for reporting.
double aggregate(View view, std::span<const double> values);

namespace metrics {

const GroupMetric& accuracy();
const GroupMetric& balanced_accuracy();
const GroupMetric& f1();
const GroupMetric& mcc();
const GroupMetric& recall();
const GroupMetric& precision();
const GroupMetric& specificity();
const GroupMetric& false_pos_rate();
const GroupMetric& false_neg_rate();
const GroupMetric& pos_pred_rate();
const GroupMetric& acceptance_rate();
const GroupMetric& rejection_rate();
const GroupMetric& cond_accept();
const GroupMetric& cond_reject();
const GroupMetric& treatment();
const GroupMetric& min_accuracy();
const GroupMetric& bias_amplification();

Metric demographic_parity();
Metric disparate_impact();
Metric predictive_parity();
Metric equal_opportunity();
Metric equalized_odds();
Metric equalized_odds_max();
Metric cond_use_accuracy();
Metric treatment_equality();

}  // namespace metrics

// Looks up a catalog GroupMetric by bare name.
std::optional<GroupMetric> find_group_metric(std::string_view name);

// Every name accepted by catalog_lookup (bare metric names and named views).
std::vector<std::string> catalog_names();

// Parses `<name>`, `<name>.<view>`, `utility:c_tp,c_fp,c_fn,c_tn` or
// `cond:<name>[.<view>]`. A bare metric name means its overall view.
// Throws MetricSpecError listing the valid names.
Metric catalog_lookup(std::string_view spec);

struct UtilitySpec {
  std::array<double, 4> costs{};  // tp, fp, fn, tn
  std::string name = "utility";
};

// Mean cost per decision; lower is better.
GroupMetric utility_metric(const UtilitySpec& spec);

// Per (group, stratum) weights N_stratum / N_(group, stratum).
class ConditionalWeights {
 public:
  ConditionalWeights(std::size_t groups, std::size_t strata, std::vector<double> cells);

  double weight(std::size_t group, std::size_t stratum) const {
    return cells_[group * strata_ + stratum];
  }
  std::size_t group_count() const { return groups_; }
  std::size_t stratum_count() const { return strata_; }

  std::vector<double> row_weights(const ScoredDataset& ds) const;

 private:
  std::size_t groups_;
  std::size_t strata_;
  std::vector<double> cells_;
};

ConditionalWeights conditional_weights(const ScoredDataset& ds);

struct BiasAmplification {
  std::vector<double> per_group;
  double average = 0.0;
};

// Per-group |fn - fp| / n_g and its average over groups.
BiasAmplification bias_amp_abs(const ConfusionTensor& tensor, std::size_t candidate = 0);

// Per-group y_a * delta_a + (1 - y_a) * (-delta_a) for the attribute -> task
// direction, with plug-in probabilities.
std::vector<double> bias_amp_signed_terms(const ScoredDataset& ds,
                                          std::span<const std::uint8_t> predictions);
double bias_amp_signed(const ScoredDataset& ds, std::span<const std::uint8_t> predictions);

}  // namespace fairthresh
