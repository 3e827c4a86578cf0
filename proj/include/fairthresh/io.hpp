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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fairthresh/frontier.hpp"
#include "fairthresh/predictor.hpp"

namespace fairthresh {

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Real formatting for reports: 6 significant digits, or round-trip
// precision when `full` is set.
std::string format_real(double value, bool full = false);

struct ThresholdsFile {
  ThresholdAssignment thresholds;
  GroupAssignmentPlan plan;
};

// {"groups": [...], "t": [...], "plan": {...}}
std::string thresholds_to_json(const ThresholdsFile& file);
ThresholdsFile parse_thresholds(const std::string& json_text);

// `objective,constraint,t_<group>...`, rows by descending objective.
std::string frontier_to_csv(std::span<const FrontierPoint> frontier,
                            const std::vector<std::string>& groups, bool full_precision = false);
// [{"objective": r, "constraint": r, "t": [...]}, ...]
std::string frontier_to_json(std::span<const FrontierPoint> frontier);

// `metric,scope,original,updated`
std::string report_to_csv(const EvaluationReport& report, bool full_precision = false);
std::string report_to_json(const EvaluationReport& report);

}  // namespace fairthresh
