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

#include "fairthresh/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "fairthresh/error.hpp"

namespace fairthresh {

namespace {

constexpr std::pair<View, std::string_view> kViewNames[] = {
    {View::overall, "overall"}, {View::per_group, "per_group"}, {View::diff, "diff"},
    {View::max_diff, "max_diff"}, {View::average, "average"}, {View::max, "max"},
    {View::min, "min"}, {View::ratio, "ratio"},
};

TotalKernel lift(Kernel k) {
  return [k = std::move(k)](const ConfusionCounts& group, const ConfusionCounts&) { return k(group); };
}

const ConfusionTensor& select(const TensorSet& tensors, Weighting weighting) {
  const ConfusionTensor* t = weighting == Weighting::plain ? tensors.plain : tensors.conditional;
  if (t == nullptr) {
    throw UsageError(weighting == Weighting::plain
                         ? "metric needs plain confusion counts"
                         : "conditional metric needs a dataset with a cond column");
  }
  return *t;
}

}  // namespace

std::string_view to_string(View view) {
  for (const auto& [v, name] : kViewNames) {
    if (v == view) return name;
  }
  return "?";
}

std::optional<View> parse_view(std::string_view text) {
  for (const auto& [v, name] : kViewNames) {
    if (name == text) return v;
  }
  return std::nullopt;
}

double aggregate(View view, std::span<const double> values) {
  const std::size_t k = values.size();
  switch (view) {
    case View::average: {
      double sum = 0.0;
      for (double v : values) sum += v;
      return safe_div(sum, static_cast<double>(k));
    }
    case View::max:
      return k == 0 ? 0.0 : *std::max_element(values.begin(), values.end());
    case View::min:
      return k == 0 ? 0.0 : *std::min_element(values.begin(), values.end());
    case View::diff:
    case View::max_diff: {
      double sum = 0.0;
      double worst = 0.0;
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          const double d = std::abs(values[i] - values[j]);
          sum += d;
          worst = std::max(worst, d);
          ++pairs;
        }
      }
      return view == View::diff ? safe_div(sum, static_cast<double>(pairs)) : worst;
    }
    case View::ratio: {
      // Mean over pairs of smaller / larger magnitude; 1 with fewer than two groups.
      if (k < 2) return 1.0;
      double sum = 0.0;
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          const double a = std::abs(values[i]);
          const double b = std::abs(values[j]);
          sum += safe_div(std::min(a, b), std::max(a, b));
          ++pairs;
        }
      }
      return sum / static_cast<double>(pairs);
    }
    case View::overall:
    case View::per_group:
      break;
  }
  throw UsageError("view '" + std::string(to_string(view)) + "' does not aggregate group values");
}

GroupMetric::GroupMetric(std::string name, Kernel kernel, bool greater_is_better)
    : GroupMetric(std::move(name), lift(std::move(kernel)), greater_is_better, false) {}

GroupMetric::GroupMetric(std::string name, TotalKernel kernel, bool greater_is_better, bool total)
    : name_(std::move(name)),
      kernel_(std::move(kernel)),
      greater_is_better_(greater_is_better),
      total_(total) {}

GroupMetric GroupMetric::total(std::string name, TotalKernel kernel, bool greater_is_better) {
  return GroupMetric(std::move(name), std::move(kernel), greater_is_better, true);
}

std::vector<double> GroupMetric::per_group(const ConfusionTensor& tensor, std::size_t candidate) const {
  std::vector<double> out(tensor.group_count());
  const ConfusionCounts& global = tensor.global(candidate);
  for (std::size_t g = 0; g < out.size(); ++g) out[g] = kernel_(tensor.at(g, candidate), global);
  return out;
}

Metric GroupMetric::view(View v) const {
  if (v == View::per_group) {
    Metric m(name_ + ".per_group", greater_is_better_,
             [name = name_](const ConfusionTensor&, std::span<double>) {
               throw UsageError("'" + name + ".per_group' is not a scalar; use per_group()");
             });
    m.base_ = std::make_shared<const GroupMetric>(*this);
    m.view_ = v;
    return m;
  }
  bool gib = greater_is_better_;
  if (v == View::diff || v == View::max_diff) gib = false;
  if (v == View::ratio) gib = true;
  std::string name = v == View::overall ? name_ : name_ + "." + std::string(to_string(v));
  TotalKernel kernel = kernel_;
  Metric::BatchFn fn;
  if (v == View::overall) {
    fn = [kernel](const ConfusionTensor& t, std::span<double> out) {
      for (std::size_t c = 0; c < out.size(); ++c) out[c] = kernel(t.global(c), t.global(c));
    };
  } else {
    fn = [kernel, v](const ConfusionTensor& t, std::span<double> out) {
      std::vector<double> values(t.group_count());
      for (std::size_t c = 0; c < out.size(); ++c) {
        const ConfusionCounts& global = t.global(c);
        for (std::size_t g = 0; g < values.size(); ++g) values[g] = kernel(t.at(g, c), global);
        out[c] = aggregate(v, values);
      }
    };
  }
  Metric m(std::move(name), gib, std::move(fn));
  m.base_ = std::make_shared<const GroupMetric>(*this);
  m.view_ = v;
  return m;
}

Metric GroupMetric::overall() const { return view(View::overall); }
Metric GroupMetric::diff() const { return view(View::diff); }
Metric GroupMetric::max_diff() const { return view(View::max_diff); }
Metric GroupMetric::average() const { return view(View::average); }
Metric GroupMetric::max() const { return view(View::max); }
Metric GroupMetric::min() const { return view(View::min); }
Metric GroupMetric::ratio() const { return view(View::ratio); }

Metric::Metric(std::string name, bool greater_is_better, BatchFn fn)
    : name_(std::move(name)), greater_is_better_(greater_is_better), fn_(std::move(fn)) {}

void Metric::evaluate(const TensorSet& tensors, std::span<double> out) const {
  const ConfusionTensor& t = select(tensors, weighting_);
  if (out.size() != t.candidate_count()) throw UsageError("output size differs from candidate count");
  fn_(t, out);
}

std::vector<double> Metric::evaluate(const TensorSet& tensors) const {
  std::vector<double> out(select(tensors, weighting_).candidate_count());
  evaluate(tensors, out);
  return out;
}

double Metric::evaluate(const ConfusionTensor& plain, const ConfusionTensor* conditional) const {
  const TensorSet set{&plain, conditional};
  if (select(set, weighting_).candidate_count() != 1) {
    throw UsageError("expected a single-candidate tensor");
  }
  double out = 0.0;
  evaluate(set, std::span<double>(&out, 1));
  return out;
}

Metric Metric::conditional() const {
  if (weighting_ == Weighting::conditional) return *this;
  Metric m = *this;
  m.weighting_ = Weighting::conditional;
  m.name_ = "cond:" + name_;
  return m;
}

namespace {

Metric combine(std::string name, std::vector<Metric> parts, bool greater_is_better, bool use_max) {
  if (parts.empty()) throw UsageError("combined metric needs parts");
  auto fn = [parts, use_max](const ConfusionTensor& t, std::span<double> out) {
    std::vector<double> buffer(out.size());
    std::fill(out.begin(), out.end(), use_max ? -INFINITY : 0.0);
    const TensorSet set{&t, &t};
    for (const auto& p : parts) {
      p.evaluate(set, buffer);
      for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = use_max ? std::max(out[c], buffer[c]) : out[c] + buffer[c];
      }
    }
    if (!use_max) {
      for (double& v : out) v /= static_cast<double>(parts.size());
    }
  };
  return Metric(std::move(name), greater_is_better, std::move(fn));
}

}  // namespace

Metric mean_of(std::string name, std::vector<Metric> parts, bool greater_is_better) {
  return combine(std::move(name), std::move(parts), greater_is_better, false);
}

Metric max_of(std::string name, std::vector<Metric> parts, bool greater_is_better) {
  return combine(std::move(name), std::move(parts), greater_is_better, true);
}

namespace metrics {

#define FAIRTHRESH_METRIC(fn, label, gib, expr)                                       \
  const GroupMetric& fn() {                                                           \
    static const GroupMetric m(                                                       \
        label, [](const ConfusionCounts& c) { return (expr); }, gib);                 \
    return m;                                                                         \
  }

FAIRTHRESH_METRIC(accuracy, "accuracy", true, safe_div(c.tp + c.tn, c.total()))
FAIRTHRESH_METRIC(balanced_accuracy, "balanced_accuracy", true,
                  (safe_div(c.tp, c.tp + c.fn) + safe_div(c.tn, c.tn + c.fp)) / 2.0)
FAIRTHRESH_METRIC(f1, "f1", true, safe_div(2.0 * c.tp, 2.0 * c.tp + c.fp + c.fn))
FAIRTHRESH_METRIC(mcc, "mcc", true,
                  safe_div(c.tp * c.tn - c.fp * c.fn,
                           std::sqrt((c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn))))
FAIRTHRESH_METRIC(recall, "recall", true, safe_div(c.tp, c.tp + c.fn))
FAIRTHRESH_METRIC(precision, "precision", true, safe_div(c.tp, c.tp + c.fp))
FAIRTHRESH_METRIC(specificity, "specificity", true, safe_div(c.tn, c.tn + c.fp))
FAIRTHRESH_METRIC(false_pos_rate, "false_pos_rate", false, safe_div(c.fp, c.fp + c.tn))
FAIRTHRESH_METRIC(false_neg_rate, "false_neg_rate", false, safe_div(c.fn, c.fn + c.tp))
FAIRTHRESH_METRIC(pos_pred_rate, "pos_pred_rate", true, safe_div(c.tp + c.fp, c.total()))
FAIRTHRESH_METRIC(acceptance_rate, "acceptance_rate", true, safe_div(c.tp, c.tp + c.fp))
FAIRTHRESH_METRIC(rejection_rate, "rejection_rate", true, safe_div(c.tn, c.tn + c.fn))
FAIRTHRESH_METRIC(cond_accept, "cond_accept", true, safe_div(c.tp + c.fn, c.tp + c.fp))
FAIRTHRESH_METRIC(cond_reject, "cond_reject", true, safe_div(c.fp + c.tn, c.fn + c.tn))
FAIRTHRESH_METRIC(treatment, "treatment", false, safe_div(c.fn, c.fp))
FAIRTHRESH_METRIC(min_accuracy, "min_accuracy", true,
                  std::min(safe_div(c.tp, c.tp + c.fp), safe_div(c.tn, c.fn + c.tn)))
FAIRTHRESH_METRIC(bias_amplification, "bias_amplification", false,
                  safe_div(std::abs(c.fn - c.fp), c.total()))

#undef FAIRTHRESH_METRIC


// Named views are plain GroupMetric views so they keep their base metric for
// per-group reporting.
Metric demographic_parity() { return pos_pred_rate().diff(); }
Metric disparate_impact() { return pos_pred_rate().ratio(); }
Metric predictive_parity() { return precision().diff(); }
Metric equal_opportunity() { return recall().diff(); }
Metric treatment_equality() { return treatment().diff(); }
Metric equalized_odds() {
  return mean_of("equalized_odds", {recall().diff(), false_pos_rate().diff()}, false);
}
Metric equalized_odds_max() {
  return max_of("equalized_odds_max", {recall().diff(), false_pos_rate().diff()}, false);
}
Metric cond_use_accuracy() {
  return mean_of("cond_use_accuracy", {precision().diff(), rejection_rate().diff()}, false);
}

}  // namespace metrics

namespace {

using GroupMetricFn = const GroupMetric& (*)();
using NamedViewFn = Metric (*)();

const std::vector<std::pair<std::string_view, GroupMetricFn>>& group_metric_table() {
  static const std::vector<std::pair<std::string_view, GroupMetricFn>> table = {
      {"accuracy", &metrics::accuracy},
      {"balanced_accuracy", &metrics::balanced_accuracy},
      {"f1", &metrics::f1},
      {"mcc", &metrics::mcc},
      {"recall", &metrics::recall},
      {"precision", &metrics::precision},
      {"specificity", &metrics::specificity},
      {"false_pos_rate", &metrics::false_pos_rate},
      {"false_neg_rate", &metrics::false_neg_rate},
      {"pos_pred_rate", &metrics::pos_pred_rate},
      {"acceptance_rate", &metrics::acceptance_rate},
      {"rejection_rate", &metrics::rejection_rate},
      {"cond_accept", &metrics::cond_accept},
      {"cond_reject", &metrics::cond_reject},
      {"treatment", &metrics::treatment},
      {"min_accuracy", &metrics::min_accuracy},
      {"bias_amplification", &metrics::bias_amplification},
  };
  return table;
}

const std::vector<std::pair<std::string_view, NamedViewFn>>& named_view_table() {
  static const std::vector<std::pair<std::string_view, NamedViewFn>> table = {
      {"demographic_parity", &metrics::demographic_parity},
      {"disparate_impact", &metrics::disparate_impact},
      {"predictive_parity", &metrics::predictive_parity},
      {"equal_opportunity", &metrics::equal_opportunity},
      {"equalized_odds", &metrics::equalized_odds},
      {"equalized_odds_max", &metrics::equalized_odds_max},
      {"cond_use_accuracy", &metrics::cond_use_accuracy},
      {"treatment_equality", &metrics::treatment_equality},
  };
  return table;
}

[[noreturn]] void unknown_metric(std::string_view spec, std::string_view why) {
  std::ostringstream msg;
  msg << why << " '" << spec << "'. Valid names:";
  for (const auto& n : catalog_names()) msg << ' ' << n;
  msg << ". Views:";
  for (const auto& [v, name] : kViewNames) msg << ' ' << name;
  msg << ". Also utility:c_tp,c_fp,c_fn,c_tn and cond:<metric>.";
  throw MetricSpecError(msg.str());
}

}  // namespace

std::optional<GroupMetric> find_group_metric(std::string_view name) {
  for (const auto& [n, fn] : group_metric_table()) {
    if (n == name) return fn();
  }
  return std::nullopt;
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const auto& [n, fn] : group_metric_table()) names.emplace_back(n);
  for (const auto& [n, fn] : named_view_table()) names.emplace_back(n);
  return names;
}

Metric catalog_lookup(std::string_view spec) {
  if (spec.rfind("cond:", 0) == 0) {
    const std::string_view rest = spec.substr(5);
    if (rest.rfind("cond:", 0) == 0) unknown_metric(spec, "nested conditional metric");
    return catalog_lookup(rest).conditional();
  }
  if (spec.rfind("utility:", 0) == 0) {
    UtilitySpec u;
    std::string_view rest = spec.substr(8);
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t comma = rest.find(',');
      if ((i < 3) != (comma != std::string_view::npos)) {
        unknown_metric(spec, "utility needs four comma-separated costs in");
      }
      std::string_view field = rest.substr(0, comma);
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), u.costs[i]);
      if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(u.costs[i])) {
        unknown_metric(spec, "bad utility cost in");
      }
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return utility_metric(u).overall();
  }
  for (const auto& [n, fn] : named_view_table()) {
    if (n == spec) return fn();
  }
  const std::size_t dot = spec.find('.');
  const auto base = find_group_metric(spec.substr(0, dot));
  if (!base) unknown_metric(spec, "unknown metric");
  if (dot == std::string_view::npos) return base->overall();
  const auto view = parse_view(spec.substr(dot + 1));
  if (!view) unknown_metric(spec, "unknown view in");
  return base->view(*view);
}

GroupMetric utility_metric(const UtilitySpec& spec) {
  for (double c : spec.costs) {
    if (!std::isfinite(c)) throw MetricSpecError("utility costs must be finite");
  }
  const auto costs = spec.costs;
  return GroupMetric(
      spec.name,
      [costs](const ConfusionCounts& c) {
        return safe_div(c.tp * costs[0] + c.fp * costs[1] + c.fn * costs[2] + c.tn * costs[3],
                        c.total());
      },
      false);
}

ConditionalWeights::ConditionalWeights(std::size_t groups, std::size_t strata,
                                       std::vector<double> cells)
    : groups_(groups), strata_(strata), cells_(std::move(cells)) {
  if (cells_.size() != groups_ * strata_) throw UsageError("conditional weight table size mismatch");
}

std::vector<double> ConditionalWeights::row_weights(const ScoredDataset& ds) const {
  if (!ds.has_strata()) throw DataError("conditional metrics need a cond column");
  if (ds.group_count() != groups_ || ds.stratum_names().size() != strata_) {
    throw UsageError("conditional weights were computed for a different dataset");
  }
  std::vector<double> w(ds.size());
  const auto groups = ds.groups();
  const auto strata = ds.strata();
  for (std::size_t i = 0; i < ds.size(); ++i) w[i] = weight(groups[i], strata[i]);
  return w;
}

ConditionalWeights conditional_weights(const ScoredDataset& ds) {
  if (!ds.has_strata()) throw DataError("conditional metrics need a cond column");
  const std::size_t k = ds.group_count();
  const std::size_t s = ds.stratum_names().size();
  std::vector<double> cell(k * s, 0.0);
  std::vector<double> stratum(s, 0.0);
  const auto groups = ds.groups();
  const auto strata = ds.strata();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    cell[groups[i] * s + strata[i]] += 1.0;
    stratum[strata[i]] += 1.0;
  }
  std::vector<double> weights(k * s, 0.0);
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t j = 0; j < s; ++j) weights[g * s + j] = safe_div(stratum[j], cell[g * s + j]);
  }
  return ConditionalWeights(k, s, std::move(weights));
}

BiasAmplification bias_amp_abs(const ConfusionTensor& tensor, std::size_t candidate) {
  BiasAmplification out;
  out.per_group = metrics::bias_amplification().per_group(tensor, candidate);
  out.average = aggregate(View::average, out.per_group);
  return out;
}

std::vector<double> bias_amp_signed_terms(const ScoredDataset& ds,
                                          std::span<const std::uint8_t> predictions) {
  if (predictions.size() != ds.size()) throw UsageError("predictions length differs from dataset");
  const std::size_t k = ds.group_count();
  std::vector<double> rows(k, 0.0), label_pos(k, 0.0), pred_pos(k, 0.0);
  double all_pos = 0.0;
  const auto groups = ds.groups();
  const auto labels = ds.labels();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    rows[groups[i]] += 1.0;
    label_pos[groups[i]] += labels[i];
    pred_pos[groups[i]] += predictions[i] ? 1.0 : 0.0;
    all_pos += labels[i];
  }
  const double n = static_cast<double>(ds.size());
  std::vector<double> terms(k);
  for (std::size_t a = 0; a < k; ++a) {
    // P(A=a, T=1) > P(A=a) P(T=1), compared on counts scaled by n^2.
    const bool y = label_pos[a] * n > rows[a] * all_pos;
    const double delta = safe_div(pred_pos[a], rows[a]) - safe_div(label_pos[a], rows[a]);
    terms[a] = y ? delta : -delta;
  }
  return terms;
}

double bias_amp_signed(const ScoredDataset& ds, std::span<const std::uint8_t> predictions) {
  return aggregate(View::average, bias_amp_signed_terms(ds, predictions));
}

}  // namespace fairthresh
