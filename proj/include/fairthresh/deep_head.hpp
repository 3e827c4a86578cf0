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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairthresh/frontier.hpp"

namespace fairthresh {

// The two linear heads on a shared backbone B(x):
//   f(x) = w_f . B(x) + b_f          (classifier)
//   g(x) = W_g B(x) + b_g            (group predictor, k outputs)
// The group head is expected to be trained with squared loss so g(x) stays
// near one-hot; nothing here checks that.
struct DeepHeads {
  std::vector<double> w_f;
  double b_f = 0.0;
  std::vector<std::vector<double>> w_g;  // k rows of length d
  std::vector<double> b_g;
  std::vector<std::vector<double>> embeddings;  // optional, m rows of length d

  std::size_t dim() const { return w_f.size(); }
  std::size_t group_count() const { return w_g.size(); }

  // Throws DataError on inconsistent shapes.
  void validate() const;
};

struct MergedHead {
  std::vector<double> w;
  double b = 0.0;

  double score(std::span<const double> x) const;
  friend bool operator==(const MergedHead&, const MergedHead&) = default;
};

// w = w_f - sum_j t_j W_g[j], b = b_f - sum_j t_j b_g[j].
MergedHead merge_heads(const DeepHeads& heads, std::span<const double> t);

// f(x) - t . g(x) computed from the two heads.
double two_head_score(const DeepHeads& heads, std::span<const double> t, std::span<const double> x);

struct MergeReport {
  std::size_t rows = 0;
  double max_abs_gap = 0.0;
  double sign_agreement_rate = 1.0;
  std::size_t disagreements = 0;
  // Rows whose two-head score lies within the tolerance of 0.
  std::size_t boundary_rows = 0;

  bool passed(double tolerance = 1e-9) const {
    return max_abs_gap <= tolerance && disagreements == 0;
  }
};

// Compares the two-head decision with the merged head on every embedding row.
// Sign disagreements are counted only where the two-head score is farther
// than `tolerance` from the decision boundary.
MergeReport verify_merge(const DeepHeads& heads, std::span<const double> t, double tolerance = 1e-9);

// Heads JSON: {"w_f": [...], "b_f": r, "w_g": [[...]], "b_g": [...], "embeddings": [[...]]}.
// Missing head fields raise DataError("incomplete heads: ...").
DeepHeads parse_heads(std::string_view json_text);
std::string heads_to_json(const DeepHeads& heads);

struct CoefficientRecord {
  std::vector<std::string> groups;
  std::vector<double> t;
  MergedHead head;

  friend bool operator==(const CoefficientRecord&, const CoefficientRecord&) = default;
};

CoefficientRecord extract_coefficients(const ThresholdAssignment& t, const DeepHeads& heads);
// {"groups": [...], "t": [...], "w": [...], "b": r}
std::string coefficients_to_json(const CoefficientRecord& record);
CoefficientRecord parse_coefficients(std::string_view json_text);

}  // namespace fairthresh
