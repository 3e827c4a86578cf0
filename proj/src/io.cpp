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

#include "fairthresh/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fairthresh/error.hpp"
#include "json.hpp"

namespace fairthresh {

namespace {

using nlohmann::json;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<const FrontierPoint*> by_descending_objective(std::span<const FrontierPoint> frontier) {
  std::vector<const FrontierPoint*> rows;
  for (const auto& p : frontier) rows.push_back(&p);
  std::stable_sort(rows.begin(), rows.end(), [](const FrontierPoint* l, const FrontierPoint* r) {
    if (l->objective != r->objective) return l->objective > r->objective;
    if (l->constraint != r->constraint) return l->constraint < r->constraint;
    return std::lexicographical_compare(l->thresholds.begin(), l->thresholds.end(),
                                        r->thresholds.begin(), r->thresholds.end());
  });
  return rows;
}

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& text, const std::pair<Enum, const char*> (&names)[N],
                std::string_view what) {
  for (const auto& [value, name] : names) {
    if (text == name) return value;
  }
  throw DataError("thresholds: unknown " + std::string(what) + " '" + text + "'");
}

constexpr std::pair<PlanKind, const char*> kPlanKinds[] = {
    {PlanKind::true_groups, "true_groups"},
    {PlanKind::hard_inferred, "hard_inferred"},
    {PlanKind::soft_inferred, "soft_inferred"},
    {PlanKind::transform, "transform"},
};
constexpr std::pair<TransformKind, const char*> kTransforms[] = {
    {TransformKind::random_split, "random"},
    {TransformKind::label_split, "label"},
    {TransformKind::inferred_x_predicted, "inferredxlabel"},
};
constexpr std::pair<SoftSearch, const char*> kSoftSearch[] = {
    {SoftSearch::slow, "slow"},
    {SoftSearch::hybrid, "hybrid"},
};

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot replace '" + path.string() + "': " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_real(double value, bool full) {
  if (value == 0.0) value = 0.0;  // no "-0"
  char buf[64];
  if (full) {
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
  }
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string thresholds_to_json(const ThresholdsFile& file) {
  const auto& plan = file.plan;
  json p = {{"kind", std::string(to_string(plan.kind))},
            {"baseline_threshold", plan.baseline_threshold}};
  switch (plan.kind) {
    case PlanKind::hard_inferred:
      p["dk_threshold"] = plan.dk_threshold;
      break;
    case PlanKind::soft_inferred:
      p["soft_search"] = plan.soft_search == SoftSearch::slow ? "slow" : "hybrid";
      break;
    case PlanKind::transform:
      p["transform"] = std::string(to_string(plan.transform));
      p["seed"] = plan.seed;
      break;
    case PlanKind::true_groups:
      break;
  }
  const json j = {{"groups", file.thresholds.groups}, {"t", file.thresholds.thresholds}, {"plan", p}};
  return j.dump(2) + "\n";
}

ThresholdsFile parse_thresholds(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("thresholds: invalid JSON: ") + e.what());
  }
  ThresholdsFile file;
  try {
    file.thresholds.groups = j.at("groups").get<std::vector<std::string>>();
    file.thresholds.thresholds = j.at("t").get<std::vector<double>>();
    if (j.contains("plan")) {
      const json& p = j.at("plan");
      auto& plan = file.plan;
      plan.kind = parse_enum(p.value("kind", std::string("true_groups")), kPlanKinds, "plan kind");
      plan.baseline_threshold = p.value("baseline_threshold", 0.0);
      plan.dk_threshold = p.value("dk_threshold", kDefaultDontKnowThreshold);
      plan.soft_search = parse_enum(p.value("soft_search", std::string("slow")), kSoftSearch, "soft search");
      plan.transform = parse_enum(p.value("transform", std::string("label")), kTransforms, "transform");
      plan.seed = p.value("seed", std::uint64_t{0});
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("thresholds: ") + e.what());
  }
  if (file.thresholds.groups.size() != file.thresholds.thresholds.size()) {
    throw DataError("thresholds: groups and t differ in length");
  }
  return file;
}

std::string frontier_to_csv(std::span<const FrontierPoint> frontier,
                            const std::vector<std::string>& groups, bool full_precision) {
  std::string out = "objective,constraint";
  for (const auto& g : groups) out += "," + csv_field("t_" + g);
  out += "\n";
  for (const FrontierPoint* p : by_descending_objective(frontier)) {
    out += format_real(p->objective, full_precision) + "," + format_real(p->constraint, full_precision);
    for (double t : p->thresholds) out += "," + format_real(t, true);
    out += "\n";
  }
  return out;
}

std::string frontier_to_json(std::span<const FrontierPoint> frontier) {
  json arr = json::array();
  for (const FrontierPoint* p : by_descending_objective(frontier)) {
    arr.push_back({{"objective", p->objective}, {"constraint", p->constraint}, {"t", p->thresholds}});
  }
  return arr.dump(2) + "\n";
}

std::string report_to_csv(const EvaluationReport& report, bool full_precision) {
  std::string out = "metric,scope,original,updated\n";
  for (const auto& row : report.rows) {
    out += csv_field(row.metric) + "," + csv_field(row.scope) + "," +
           format_real(row.original, full_precision) + "," + format_real(row.updated, full_precision) +
           "\n";
  }
  return out;
}

std::string report_to_json(const EvaluationReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"metric", row.metric},
                    {"scope", row.scope},
                    {"original", row.original},
                    {"updated", row.updated}});
  }
  return json{{"rows", rows}, {"notes", report.notes}}.dump(2) + "\n";
}

}  // namespace fairthresh
