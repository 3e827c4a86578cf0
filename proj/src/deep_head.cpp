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

#include "fairthresh/deep_head.hpp"

#include <cmath>

#include "fairthresh/error.hpp"
#include "json.hpp"

namespace fairthresh {

namespace {

using nlohmann::json;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

json parse_object(std::string_view text, std::string_view what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string(what) + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw DataError(std::string(what) + ": expected a JSON object");
  return j;
}

template <typename T>
T field(const json& j, const char* key, std::string_view what) {
  if (!j.contains(key)) throw DataError(std::string(what) + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

void DeepHeads::validate() const {
  const std::size_t d = dim();
  if (d == 0) throw DataError("heads: w_f is empty");
  if (w_g.size() != b_g.size()) {
    throw DataError("heads: w_g has " + std::to_string(w_g.size()) + " rows but b_g has " +
                    std::to_string(b_g.size()) + " entries");
  }
  for (const auto& row : w_g) {
    if (row.size() != d) throw DataError("heads: w_g row length differs from w_f");
  }
  for (const auto& row : embeddings) {
    if (row.size() != d) throw DataError("heads: embedding row length differs from w_f");
  }
}

double MergedHead::score(std::span<const double> x) const {
  if (x.size() != w.size()) throw DataError("merged head: input dimension mismatch");
  return dot(w, x) + b;
}

MergedHead merge_heads(const DeepHeads& heads, std::span<const double> t) {
  heads.validate();
  if (t.size() != heads.group_count()) {
    throw DataError("merge: " + std::to_string(t.size()) + " thresholds for " +
                    std::to_string(heads.group_count()) + " group outputs");
  }
  MergedHead out{heads.w_f, heads.b_f};
  for (std::size_t j = 0; j < t.size(); ++j) {
    for (std::size_t i = 0; i < out.w.size(); ++i) out.w[i] -= t[j] * heads.w_g[j][i];
    out.b -= t[j] * heads.b_g[j];
  }
  return out;
}

double two_head_score(const DeepHeads& heads, std::span<const double> t, std::span<const double> x) {
  if (x.size() != heads.dim() || t.size() != heads.group_count()) {
    throw DataError("two-head score: dimension mismatch");
  }
  const double f = dot(heads.w_f, x) + heads.b_f;
  double shift = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) shift += t[j] * (dot(heads.w_g[j], x) + heads.b_g[j]);
  return f - shift;
}

MergeReport verify_merge(const DeepHeads& heads, std::span<const double> t, double tolerance) {
  const MergedHead merged = merge_heads(heads, t);
  MergeReport report;
  report.rows = heads.embeddings.size();
  for (const auto& x : heads.embeddings) {
    const double two_head = two_head_score(heads, t, x);
    const double single = merged.score(x);
    report.max_abs_gap = std::max(report.max_abs_gap, std::abs(two_head - single));
    // Within the tolerance band the deployed (merged) score decides.
    if (std::abs(two_head) <= tolerance) {
      ++report.boundary_rows;
    } else if ((two_head >= 0.0) != (single >= 0.0)) {
      ++report.disagreements;
    }
  }
  report.sign_agreement_rate =
      report.rows == 0 ? 1.0
                       : 1.0 - static_cast<double>(report.disagreements) / static_cast<double>(report.rows);
  return report;
}

DeepHeads parse_heads(std::string_view json_text) {
  const json j = parse_object(json_text, "heads");
  for (const char* key : {"w_f", "b_f", "w_g", "b_g"}) {
    if (!j.contains(key)) throw DataError(std::string("incomplete heads: missing '") + key + "'");
  }
  DeepHeads heads;
  heads.w_f = field<std::vector<double>>(j, "w_f", "heads");
  heads.b_f = field<double>(j, "b_f", "heads");
  heads.w_g = field<std::vector<std::vector<double>>>(j, "w_g", "heads");
  heads.b_g = field<std::vector<double>>(j, "b_g", "heads");
  if (j.contains("embeddings") && !j.at("embeddings").is_null()) {
    heads.embeddings = field<std::vector<std::vector<double>>>(j, "embeddings", "heads");
  }
  heads.validate();
  return heads;
}

std::string heads_to_json(const DeepHeads& heads) {
  json j = {{"w_f", heads.w_f}, {"b_f", heads.b_f}, {"w_g", heads.w_g}, {"b_g", heads.b_g}};
  if (!heads.embeddings.empty()) j["embeddings"] = heads.embeddings;
  return j.dump();
}

CoefficientRecord extract_coefficients(const ThresholdAssignment& t, const DeepHeads& heads) {
  if (t.groups.size() != t.thresholds.size()) {
    throw DataError("thresholds: group names and values differ in length");
  }
  return CoefficientRecord{t.groups, t.thresholds, merge_heads(heads, t.thresholds)};
}

std::string coefficients_to_json(const CoefficientRecord& record) {
  const json j = {{"groups", record.groups}, {"t", record.t}, {"w", record.head.w}, {"b", record.head.b}};
  return j.dump(2) + "\n";
}

CoefficientRecord parse_coefficients(std::string_view json_text) {
  const json j = parse_object(json_text, "coefficients");
  CoefficientRecord r;
  r.groups = field<std::vector<std::string>>(j, "groups", "coefficients");
  r.t = field<std::vector<double>>(j, "t", "coefficients");
  r.head.w = field<std::vector<double>>(j, "w", "coefficients");
  r.head.b = field<double>(j, "b", "coefficients");
  if (r.groups.size() != r.t.size()) throw DataError("coefficients: groups and t differ in length");
  return r;
}

}  // namespace fairthresh
