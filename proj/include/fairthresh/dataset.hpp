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
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fairthresh {

// A header plus string cells, as read from a CSV file.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_csv(std::istream& in);
Table read_csv(const std::filesystem::path& path);

struct LoadOptions {
  // Groups that must be present even when no soft-score column names them.
  // A declared group with no rows is rejected.
  std::vector<std::string> declared_groups;
};

// Classifier scores, binary labels and group memberships for n rows.
//
// Group indices refer to `group_names`, which lists groups in order of first
// appearance. Strata (the conditioning factor) and soft group scores are
// optional; soft scores are stored row-major with one column per group, in
// `group_names` order.
class ScoredDataset {
 public:
  ScoredDataset() = default;
  ScoredDataset(std::vector<double> scores, std::vector<std::uint8_t> labels,
                std::vector<std::size_t> groups,
                std::vector<std::string> group_names);

  std::size_t size() const { return scores_.size(); }
  std::size_t group_count() const { return group_names_.size(); }

  std::span<const double> scores() const { return scores_; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<const std::size_t> groups() const { return groups_; }
  const std::vector<std::string>& group_names() const { return group_names_; }

  bool has_strata() const { return !stratum_names_.empty(); }
  std::span<const std::size_t> strata() const { return strata_; }
  const std::vector<std::string>& stratum_names() const { return stratum_names_; }

  bool has_soft_groups() const { return !soft_groups_.empty(); }
  // Soft scores of row i, one per group.
  std::span<const double> soft_groups(std::size_t row) const;

  void set_strata(std::vector<std::size_t> strata, std::vector<std::string> names);
  void set_soft_groups(std::vector<double> row_major);

  std::size_t group_index(const std::string& name) const;

 private:
  void validate() const;

  std::vector<double> scores_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::size_t> groups_;
  std::vector<std::string> group_names_;
  std::vector<std::size_t> strata_;
  std::vector<std::string> stratum_names_;
  std::vector<double> soft_groups_;
};

// Builds a validated dataset from columns `score,label,group[,cond][,g:<name>...]`.
// Throws DataError naming the offending column, row or group.
ScoredDataset load_dataset(const Table& table, const LoadOptions& options = {});

// Which threshold each row receives. `names` are the assigned (threshold)
// groups; `of_row[i]` indexes into `names`. Independent of the true groups.
struct GroupAssignment {
  std::vector<std::string> names;
  std::vector<std::size_t> of_row;

  std::size_t size() const { return names.size(); }
};

GroupAssignment true_group_assignment(const ScoredDataset& ds);

// Drops assigned groups that receive no rows and renumbers the rest.
// Returns the names of the dropped groups.
std::vector<std::string> drop_empty_groups(GroupAssignment& assignment);

}  // namespace fairthresh
