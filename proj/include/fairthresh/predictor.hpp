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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairthresh/dataset.hpp"
#include "fairthresh/frontier.hpp"
#include "fairthresh/inferred.hpp"
#include "fairthresh/metrics.hpp"

namespace fairthresh {

enum class PlanKind { true_groups, hard_inferred, soft_inferred, transform };
enum class SoftSearch { slow, hybrid };

std::string_view to_string(PlanKind kind);

// How rows are mapped to thresholds. The mapping is recomputed from each
// dataset passed to predict/evaluate, so it only depends on columns that are
// available at prediction time (plus the true groups for the transforms that
// need them).
struct GroupAssignmentPlan {
  PlanKind kind = PlanKind::true_groups;
  double dk_threshold = kDefaultDontKnowThreshold;
  SoftSearch soft_search = SoftSearch::slow;
  TransformKind transform = TransformKind::label_split;
  std::uint64_t seed = 0;
  // Threshold of the original classifier: original decisions are
  // score >= baseline_threshold.
  double baseline_threshold = 0.0;

  // Per-row assigned groups; not defined for soft_inferred.
  GroupAssignment assign(const ScoredDataset& ds) const;
};

struct ReportRow {
  std::string metric;
  std::string scope;  // "overall" or a group name
  double original = 0.0;
  double updated = 0.0;
};

struct EvaluationReport {
  std::vector<ReportRow> rows;
  std::vector<std::string> notes;

  const ReportRow* find(std::string_view metric, std::string_view scope = "overall") const;
};

// The post-processing facade: owns the fit split, fits thresholds and
// applies them to new data.
class FairPredictor {
 public:
  explicit FairPredictor(ScoredDataset fit_data, GroupAssignmentPlan plan = {});

  const FitResult& fit(FitSpec spec);

  bool fitted() const { return thresholds_.has_value(); }
  const ThresholdAssignment& thresholds() const;
  const GroupAssignmentPlan& plan() const { return plan_; }
  const std::optional<FitResult>& last_fit() const { return last_fit_; }
  const ScoredDataset& fit_data() const { return data_; }

  // Installs thresholds from elsewhere (e.g. a thresholds file).
  void set_thresholds(ThresholdAssignment t);
  // Installs the baseline thresholds explicitly.
  void use_baseline();

  // f(x) - t . G'(x) (or t . g(x) for soft plans). Requires thresholds.
  std::vector<double> predict_proba(const ScoredDataset& ds) const;
  // 1 iff predict_proba >= 0.
  std::vector<std::uint8_t> predict(const ScoredDataset& ds) const;

  std::vector<std::uint8_t> original_predictions(const ScoredDataset& ds) const;

  // Overall values, original vs updated. Empty list = accuracy,
  // balanced_accuracy, f1.
  EvaluationReport evaluate(const ScoredDataset& ds, const std::vector<Metric>& metrics = {}) const;
  // Per-group values of each metric's base GroupMetric.
  EvaluationReport evaluate_per_group(const ScoredDataset& ds,
                                      const std::vector<GroupMetric>& metrics = {}) const;
  // The post-training fairness measures; the conditional row needs strata.
  EvaluationReport evaluate_fairness(const ScoredDataset& ds) const;

 private:
  EvaluationReport overall_rows(const ScoredDataset& ds,
                                const std::vector<std::pair<std::string, Metric>>& metrics) const;
  std::vector<double> shifted(const ScoredDataset& ds, const ThresholdAssignment& t) const;

  ScoredDataset data_;
  GroupAssignmentPlan plan_;
  std::optional<ThresholdAssignment> thresholds_;
  std::optional<FitResult> last_fit_;
};

std::vector<Metric> default_evaluation_metrics();

// The post-training fairness rows, labelled by their catalog names.
std::vector<std::pair<std::string, Metric>> clarify_metrics(bool with_conditional);

}  // namespace fairthresh
