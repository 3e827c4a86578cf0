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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "fairthresh/dataset.hpp"
#include "fairthresh/deep_head.hpp"
#include "fairthresh/error.hpp"
#include "fairthresh/frontier.hpp"
#include "fairthresh/inferred.hpp"
#include "fairthresh/io.hpp"
#include "fairthresh/metrics.hpp"
#include "fairthresh/predictor.hpp"

namespace fs = std::filesystem;
using namespace fairthresh;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitBudget = 4;

struct Options {
  std::string data;
  std::string objective = "accuracy";
  std::string constraint;
  double value = 0.0;
  std::string objective_direction;
  std::string constraint_direction;
  std::string levelling_up = "off";
  std::size_t coarse_T = 0;
  std::size_t fine_T = 0;
  std::size_t max_combinations = GridConfig{}.max_combinations;
  bool no_refine = false;
  std::size_t threads = 1;
  std::string split = "validation";

  std::string infer_groups;
  double dk_threshold = kDefaultDontKnowThreshold;
  std::string group_transform;
  std::uint64_t seed = 0;
  double baseline_threshold = 0.0;

  std::string out;
  std::string frontier;
  std::string frontier_json;
  std::string thresholds;
  std::string heads;
  std::vector<std::string> metrics;
  bool per_group = false;
  std::string precision = "6";
};

bool full_precision(const Options& o) { return o.precision == "full"; }

ScoredDataset load(const Options& o) {
  if (o.data.empty()) throw UsageError("--data is required");
  return load_dataset(read_csv(fs::path(o.data)));
}

GroupAssignmentPlan make_plan(const Options& o) {
  GroupAssignmentPlan plan;
  plan.baseline_threshold = o.baseline_threshold;
  plan.dk_threshold = o.dk_threshold;
  plan.seed = o.seed;
  if (!o.infer_groups.empty() && !o.group_transform.empty()) {
    throw UsageError("--infer-groups and --group-transform are mutually exclusive");
  }
  if (o.infer_groups == "fast") {
    plan.kind = PlanKind::hard_inferred;
  } else if (o.infer_groups == "slow" || o.infer_groups == "hybrid") {
    plan.kind = PlanKind::soft_inferred;
    plan.soft_search = o.infer_groups == "slow" ? SoftSearch::slow : SoftSearch::hybrid;
  } else if (!o.group_transform.empty()) {
    plan.kind = PlanKind::transform;
    if (o.group_transform == "random") {
      plan.transform = TransformKind::random_split;
    } else if (o.group_transform == "label") {
      plan.transform = TransformKind::label_split;
    } else {
      plan.transform = TransformKind::inferred_x_predicted;
    }
  }
  return plan;
}

FitSpec make_spec(const Options& o) {
  FitSpec spec;
  spec.objective = catalog_lookup(o.objective);
  if (!o.constraint.empty()) spec.constraint = catalog_lookup(o.constraint);
  spec.value = o.value;
  if (o.objective_direction == "max") spec.maximize_objective = true;
  if (o.objective_direction == "min") spec.maximize_objective = false;
  if (o.constraint_direction == "le") spec.constraint_sense = ConstraintSense::at_most;
  if (o.constraint_direction == "ge") spec.constraint_sense = ConstraintSense::at_least;
  if (o.levelling_up == "+") spec.levelling_up = LevellingUp::up;
  if (o.levelling_up == "-") spec.levelling_up = LevellingUp::down;
  spec.grid.coarse_T = o.coarse_T;
  spec.grid.fine_T = o.fine_T;
  spec.grid.max_combinations = o.max_combinations;
  spec.grid.refine = !o.no_refine;
  spec.grid.threads = o.threads;
  spec.split = o.split;
  return spec;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

bool wants_json(const std::string& path) { return fs::path(path).extension() == ".json"; }

FairPredictor fitted_from_file(const Options& o, ScoredDataset ds) {
  if (o.thresholds.empty()) throw UsageError("--thresholds is required");
  ThresholdsFile file = parse_thresholds(read_file(o.thresholds));
  FairPredictor predictor(std::move(ds), file.plan);
  predictor.set_thresholds(std::move(file.thresholds));
  return predictor;
}

int run_fit(const Options& o, bool thresholds_out) {
  FitSpec spec = make_spec(o);
  FairPredictor predictor(load(o), make_plan(o));
  const FitResult& result = predictor.fit(std::move(spec));
  const bool full = full_precision(o);

  std::string frontier_path = o.frontier;
  if (thresholds_out) {
    if (o.out.empty()) throw UsageError("--out is required");
    write_file_atomic(o.out, thresholds_to_json({predictor.thresholds(), predictor.plan()}));
    if (frontier_path.empty()) frontier_path = (fs::path(o.out).parent_path() / "frontier.csv").string();
  } else if (frontier_path.empty()) {
    frontier_path = o.out;
  }
  emit(frontier_path, frontier_to_csv(result.frontier, result.solution.groups, full));
  if (!o.frontier_json.empty()) write_file_atomic(o.frontier_json, frontier_to_json(result.frontier));

  std::clog << "selected: objective=" << format_real(result.selected.objective, full)
            << " constraint=" << format_real(result.selected.constraint, full) << " t=(";
  for (std::size_t i = 0; i < result.solution.thresholds.size(); ++i) {
    std::clog << (i ? ", " : "") << result.solution.groups[i] << "="
              << format_real(result.solution.thresholds[i], full);
  }
  std::clog << ")\n";
  return 0;
}

std::vector<Metric> parse_metric_list(const std::vector<std::string>& names) {
  std::vector<Metric> out;
  for (const auto& n : names) out.push_back(catalog_lookup(n));
  return out;
}

std::vector<GroupMetric> parse_group_metric_list(const std::vector<std::string>& names) {
  std::vector<GroupMetric> out;
  for (const auto& n : names) {
    auto m = find_group_metric(n);
    if (!m) {
      const Metric full = catalog_lookup(n);
      if (full.base() == nullptr) {
        throw MetricSpecError("metric '" + n + "' has no per-group values");
      }
      m = *full.base();
    }
    out.push_back(*m);
  }
  return out;
}

std::string render(const Options& o, const EvaluationReport& report) {
  for (const auto& note : report.notes) std::clog << "note: " << note << "\n";
  return wants_json(o.out) ? report_to_json(report) : report_to_csv(report, full_precision(o));
}

int run_evaluate(const Options& o) {
  ScoredDataset ds = load(o);
  FairPredictor predictor = fitted_from_file(o, ds);
  EvaluationReport report = o.per_group
                                 ? predictor.evaluate_per_group(ds, parse_group_metric_list(o.metrics))
                                 : predictor.evaluate(ds, parse_metric_list(o.metrics));
  emit(o.out, render(o, report));
  return 0;
}

int run_fairness(const Options& o) {
  ScoredDataset ds = load(o);
  FairPredictor predictor = fitted_from_file(o, ds);
  emit(o.out, render(o, predictor.evaluate_fairness(ds)));
  return 0;
}

int run_predict(const Options& o) {
  ScoredDataset ds = load(o);
  FairPredictor predictor = fitted_from_file(o, ds);
  const auto shifted = predictor.predict_proba(ds);
  const bool full = full_precision(o);
  std::string out = "row,shifted,decision\n";
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    out += std::to_string(i) + "," + format_real(shifted[i], full) + "," +
           (shifted[i] >= 0.0 ? "1" : "0") + "\n";
  }
  emit(o.out, out);
  return 0;
}

int run_merge_head(const Options& o) {
  if (o.heads.empty()) throw UsageError("--heads is required");
  if (o.thresholds.empty()) throw UsageError("--thresholds is required");
  const DeepHeads heads = parse_heads(read_file(o.heads));
  const ThresholdsFile file = parse_thresholds(read_file(o.thresholds));
  const CoefficientRecord record = extract_coefficients(file.thresholds, heads);
  if (!heads.embeddings.empty()) {
    const MergeReport check = verify_merge(heads, record.t);
    std::clog << "verified " << check.rows << " embeddings: max gap "
              << format_real(check.max_abs_gap) << ", " << check.disagreements
              << " decision disagreements\n";
    if (!check.passed()) throw DataError("merged head does not reproduce the two-headed scores");
  }
  emit(o.out, coefficients_to_json(record));
  return 0;
}

void print_catalog(std::ostream& os) {
  os << "valid metrics:";
  for (const auto& name : catalog_names()) os << " " << name;
  os << "\nalso: <metric>.<view>, cond:<metric>.<view>, utility:c_tp,c_fp,c_fn,c_tn\n";
}

void add_data(CLI::App* cmd, Options& o) {
  cmd->add_option("--data", o.data, "Data CSV (score,label,group[,cond][,g:<group>...])")->required();
  cmd->add_option("--precision", o.precision, "Real formatting: 6 or full")
      ->check(CLI::IsMember({"6", "full"}));
}

void add_plan(CLI::App* cmd, Options& o) {
  cmd->add_option("--infer-groups", o.infer_groups, "Use inferred groups")
      ->check(CLI::IsMember({"fast", "slow", "hybrid"}));
  cmd->add_option("--dk-threshold", o.dk_threshold, "Don't-know threshold for fast inference")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--group-transform", o.group_transform, "Split groups into subgroups")
      ->check(CLI::IsMember({"random", "label", "inferredxlabel"}));
  cmd->add_option("--seed", o.seed, "Seed for --group-transform random");
  cmd->add_option("--baseline-threshold", o.baseline_threshold, "Threshold of the original classifier");
}

void add_search(CLI::App* cmd, Options& o) {
  cmd->add_option("--objective", o.objective, "Objective metric");
  cmd->add_option("--constraint", o.constraint, "Constraint metric");
  cmd->add_option("--value", o.value, "Constraint bound");
  cmd->add_option("--objective-direction", o.objective_direction, "Override: max or min")
      ->check(CLI::IsMember({"max", "min"}));
  cmd->add_option("--constraint-direction", o.constraint_direction, "Override: le or ge")
      ->check(CLI::IsMember({"le", "ge"}));
  cmd->add_option("--levelling-up", o.levelling_up, "off, + or -")->check(CLI::IsMember({"off", "+", "-"}));
  cmd->add_option("--coarse-T", o.coarse_T, "Coarse grid points per group (0 = auto)");
  cmd->add_option("--fine-T", o.fine_T, "Fine grid points per group (0 = auto)");
  cmd->add_option("--max-combinations", o.max_combinations, "Enumeration budget");
  cmd->add_flag("--no-refine", o.no_refine, "Skip the fine stage");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--split", o.split, "Tag of the split being fitted");
  cmd->add_option("--frontier", o.frontier, "Frontier CSV path");
  cmd->add_option("--frontier-json", o.frontier_json, "Frontier JSON path");
  add_plan(cmd, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold-based group fairness enforcement"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "Fit per-group thresholds; writes thresholds JSON and frontier CSV");
  add_data(fit, o);
  add_search(fit, o);
  fit->add_option("--out", o.out, "Thresholds JSON path")->required();

  auto* frontier = app.add_subcommand("frontier", "Compute and write the frontier only");
  add_data(frontier, o);
  add_search(frontier, o);
  frontier->add_option("--out", o.out, "Frontier CSV path (default stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "Report metrics before and after thresholding");
  add_data(evaluate, o);
  evaluate->add_option("--thresholds", o.thresholds, "Thresholds JSON")->required();
  evaluate->add_option("--metrics", o.metrics, "Metric specs (repeatable)");
  evaluate->add_flag("--per-group", o.per_group, "Report per group");
  evaluate->add_option("--out", o.out, "Report path, .csv or .json (default stdout)");

  auto* fairness = app.add_subcommand("fairness", "Report the standard fairness measures");
  add_data(fairness, o);
  fairness->add_option("--thresholds", o.thresholds, "Thresholds JSON")->required();
  fairness->add_option("--out", o.out, "Report path, .csv or .json (default stdout)");

  auto* predict = app.add_subcommand("predict", "Write per-row shifted scores and decisions");
  add_data(predict, o);
  predict->add_option("--thresholds", o.thresholds, "Thresholds JSON")->required();
  predict->add_option("--out", o.out, "Output CSV (default stdout)");

  auto* merge = app.add_subcommand("merge-head", "Merge a two-headed network into one head");
  merge->add_option("--heads", o.heads, "Heads JSON")->required();
  merge->add_option("--thresholds", o.thresholds, "Thresholds JSON")->required();
  merge->add_option("--out", o.out, "Coefficients JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit) return run_fit(o, true);
    if (*frontier) return run_fit(o, false);
    if (*evaluate) return run_evaluate(o);
    if (*fairness) return run_fairness(o);
    if (*predict) return run_predict(o);
    if (*merge) return run_merge_head(o);
  } catch (const MetricSpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (std::string_view(e.what()).find("Valid names") == std::string_view::npos) print_catalog(std::cerr);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
