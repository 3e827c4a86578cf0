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

#include "fairthresh/predictor.hpp"

#include <algorithm>
#include <iostream>

#include "fairthresh/error.hpp"

namespace fairthresh {

namespace {

struct Tensors {
  ConfusionTensor plain;
  std::optional<ConfusionTensor> conditional;

  TensorSet set() const { return {&plain, conditional ? &*conditional : nullptr}; }
};

Tensors tally(const ScoredDataset& ds, std::span<const std::uint8_t> predictions) {
  Tensors t{tally_predictions(ds, predictions), std::nullopt};
  if (ds.has_strata()) {
    const auto weights = conditional_weights(ds).row_weights(ds);
    t.conditional = tally_predictions(ds, predictions, weights);
  }
  return t;
}

std::vector<std::uint8_t> decide(std::span<const double> shifted) {
  std::vector<std::uint8_t> out(shifted.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) out[i] = shifted[i] >= 0.0 ? 1 : 0;
  return out;
}

}  // namespace

std::string_view to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::true_groups:
      return "true_groups";
    case PlanKind::hard_inferred:
      return "hard_inferred";
    case PlanKind::soft_inferred:
      return "soft_inferred";
    case PlanKind::transform:
      return "transform";
  }
  return "?";
}

GroupAssignment GroupAssignmentPlan::assign(const ScoredDataset& ds) const {
  switch (kind) {
    case PlanKind::true_groups:
      return true_group_assignment(ds);
    case PlanKind::hard_inferred:
      return assign_hard(ds, dk_threshold);
    case PlanKind::transform:
      return group_transform(transform, ds, base_predictions(ds, baseline_threshold), seed);
    case PlanKind::soft_inferred:
      break;
  }
  throw UsageError("soft plans have no hard group assignment");
}

const ReportRow* EvaluationReport::find(std::string_view metric, std::string_view scope) const {
  for (const auto& row : rows) {
    if (row.metric == metric && row.scope == scope) return &row;
  }
  return nullptr;
}

std::vector<Metric> default_evaluation_metrics() {
  return {metrics::accuracy().overall(), metrics::balanced_accuracy().overall(),
          metrics::f1().overall()};
}

std::vector<std::pair<std::string, Metric>> clarify_metrics(bool with_conditional) {
  std::vector<std::pair<std::string, Metric>> out;
  for (const char* name :
       {"demographic_parity", "disparate_impact", "cond_accept.diff", "cond_reject.diff",
        "accuracy.diff", "recall.diff", "acceptance_rate.diff", "rejection_rate.diff",
        "treatment_equality"}) {
    out.emplace_back(name, catalog_lookup(name));
  }
  if (with_conditional) out.emplace_back("cond:pos_pred_rate.diff", catalog_lookup("cond:pos_pred_rate.diff"));
  return out;
}

FairPredictor::FairPredictor(ScoredDataset fit_data, GroupAssignmentPlan plan)
    : data_(std::move(fit_data)), plan_(plan) {
  if (plan_.kind == PlanKind::soft_inferred || plan_.kind == PlanKind::hard_inferred) {
    if (!data_.has_soft_groups()) throw DataError("inferred groups need soft-score columns g:<group>");
  }
}

const FitResult& FairPredictor::fit(FitSpec spec) {
  if (plan_.kind == PlanKind::soft_inferred) {
    spec.baseline.assign(data_.group_count(), plan_.baseline_threshold);
    last_fit_ = plan_.soft_search == SoftSearch::slow ? slow_search(data_, spec)
                                                      : hybrid_search(data_, spec);
  } else {
    GroupAssignment assignment = plan_.assign(data_);
    spec.baseline.assign(assignment.size(), plan_.baseline_threshold);
    last_fit_ = fit_assignment(data_, std::move(assignment), std::move(spec)).result;
  }
  thresholds_ = last_fit_->solution;
  return *last_fit_;
}

const ThresholdAssignment& FairPredictor::thresholds() const {
  if (!thresholds_) throw UsageError("no thresholds: call fit() or use_baseline() first");
  return *thresholds_;
}

void FairPredictor::set_thresholds(ThresholdAssignment t) {
  if (t.groups.size() != t.thresholds.size()) {
    throw UsageError("thresholds: group names and values differ in length");
  }
  thresholds_ = std::move(t);
}

void FairPredictor::use_baseline() {
  ThresholdAssignment t;
  t.groups = plan_.kind == PlanKind::soft_inferred ? data_.group_names() : plan_.assign(data_).names;
  t.thresholds.assign(t.groups.size(), plan_.baseline_threshold);
  thresholds_ = std::move(t);
}

std::vector<double> FairPredictor::shifted(const ScoredDataset& ds, const ThresholdAssignment& t) const {
  auto threshold_of = [&](const std::string& name) -> std::optional<double> {
    auto it = std::find(t.groups.begin(), t.groups.end(), name);
    if (it == t.groups.end()) return std::nullopt;
    return t.thresholds[static_cast<std::size_t>(it - t.groups.begin())];
  };
  const auto scores = ds.scores();
  std::vector<double> out(ds.size());

  if (plan_.kind == PlanKind::soft_inferred) {
    if (!ds.has_soft_groups()) throw DataError("soft plan needs soft-score columns g:<group>");
    std::vector<double> t_by_column(ds.group_count());
    for (std::size_t j = 0; j < ds.group_count(); ++j) {
      const auto v = threshold_of(ds.group_names()[j]);
      if (!v) throw DataError("no threshold for group '" + ds.group_names()[j] + "'");
      t_by_column[j] = *v;
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto g = ds.soft_groups(i);
      double shift = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) shift += t_by_column[j] * g[j];
      out[i] = scores[i] - shift;
    }
    return out;
  }

  const GroupAssignment assignment = plan_.assign(ds);
  std::vector<double> t_by_assigned(assignment.size(), plan_.baseline_threshold);
  for (std::size_t a = 0; a < assignment.size(); ++a) {
    if (const auto v = threshold_of(assignment.names[a])) {
      t_by_assigned[a] = *v;
    } else if (std::find(assignment.of_row.begin(), assignment.of_row.end(), a) !=
               assignment.of_row.end()) {
      std::clog << "warning: no threshold for assigned group '" << assignment.names[a]
                << "'; using the baseline\n";
    }
  }
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = scores[i] - t_by_assigned[assignment.of_row[i]];
  return out;
}

std::vector<double> FairPredictor::predict_proba(const ScoredDataset& ds) const {
  return shifted(ds, thresholds());
}

std::vector<std::uint8_t> FairPredictor::predict(const ScoredDataset& ds) const {
  return decide(predict_proba(ds));
}

std::vector<std::uint8_t> FairPredictor::original_predictions(const ScoredDataset& ds) const {
  return base_predictions(ds, plan_.baseline_threshold);
}

EvaluationReport FairPredictor::overall_rows(
    const ScoredDataset& ds, const std::vector<std::pair<std::string, Metric>>& list) const {
  const Tensors original = tally(ds, original_predictions(ds));
  const Tensors updated = tally(ds, predict(ds));
  EvaluationReport report;
  for (const auto& [label, metric] : list) {
    report.rows.push_back(ReportRow{label, "overall", metric.evaluate(original.set())[0],
                                    metric.evaluate(updated.set())[0]});
  }
  return report;
}

EvaluationReport FairPredictor::evaluate(const ScoredDataset& ds,
                                         const std::vector<Metric>& metrics_in) const {
  const auto& list = metrics_in.empty() ? default_evaluation_metrics() : metrics_in;
  std::vector<std::pair<std::string, Metric>> labelled;
  for (const auto& m : list) labelled.emplace_back(m.name(), m);
  return overall_rows(ds, labelled);
}

EvaluationReport FairPredictor::evaluate_per_group(const ScoredDataset& ds,
                                                   const std::vector<GroupMetric>& metrics_in) const {
  std::vector<GroupMetric> list = metrics_in;
  if (list.empty()) list = {metrics::accuracy(), metrics::balanced_accuracy(), metrics::f1()};
  const ConfusionTensor original = tally_predictions(ds, original_predictions(ds));
  const ConfusionTensor updated = tally_predictions(ds, predict(ds));
  EvaluationReport report;
  for (const auto& m : list) {
    const auto before = m.per_group(original);
    const auto after = m.per_group(updated);
    for (std::size_t g = 0; g < ds.group_count(); ++g) {
      report.rows.push_back(ReportRow{m.name(), ds.group_names()[g], before[g], after[g]});
    }
  }
  return report;
}

EvaluationReport FairPredictor::evaluate_fairness(const ScoredDataset& ds) const {
  EvaluationReport report = overall_rows(ds, clarify_metrics(ds.has_strata()));
  if (!ds.has_strata()) {
    report.notes.push_back(
        "cond:pos_pred_rate.diff (conditional demographic disparity) omitted: no cond column");
  }
  return report;
}

}  // namespace fairthresh
