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

#include "fairthresh/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "fairthresh/error.hpp"

namespace fairthresh {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_real(const std::string& text, std::string_view column, std::size_t row) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataError("row " + std::to_string(row + 1) + ": column '" + std::string(column) +
                    "' is not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

Table read_csv(std::istream& in) {
  Table table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      // Strip a UTF-8 byte order mark.
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (trim(line).empty()) continue;
      for (auto& name : split_csv_line(line)) table.header.push_back(trim(std::move(name)));
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    for (auto& c : cells) c = trim(std::move(c));
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DataError("empty CSV: no header row");
  return table;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_csv(in);
}

ScoredDataset::ScoredDataset(std::vector<double> scores, std::vector<std::uint8_t> labels,
                             std::vector<std::size_t> groups, std::vector<std::string> group_names)
    : scores_(std::move(scores)),
      labels_(std::move(labels)),
      groups_(std::move(groups)),
      group_names_(std::move(group_names)) {
  validate();
}

void ScoredDataset::validate() const {
  const std::size_t n = scores_.size();
  if (labels_.size() != n || groups_.size() != n) {
    throw DataError("column lengths differ");
  }
  if (group_names_.empty()) throw DataError("no groups");
  std::vector<std::size_t> rows_per_group(group_names_.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores_[i])) {
      throw DataError("row " + std::to_string(i + 1) + ": NaN or infinite score");
    }
    if (labels_[i] > 1) throw DataError("row " + std::to_string(i + 1) + ": non-binary label");
    if (groups_[i] >= group_names_.size()) {
      throw DataError("row " + std::to_string(i + 1) + ": group index out of range");
    }
    ++rows_per_group[groups_[i]];
  }
  for (std::size_t g = 0; g < group_names_.size(); ++g) {
    if (rows_per_group[g] == 0) throw DataError("empty group '" + group_names_[g] + "'");
  }
}

std::span<const double> ScoredDataset::soft_groups(std::size_t row) const {
  const std::size_t k = group_names_.size();
  return std::span<const double>(soft_groups_).subspan(row * k, k);
}

void ScoredDataset::set_strata(std::vector<std::size_t> strata, std::vector<std::string> names) {
  if (strata.size() != size()) throw DataError("strata column length differs");
  for (std::size_t s : strata) {
    if (s >= names.size()) throw DataError("stratum index out of range");
  }
  strata_ = std::move(strata);
  stratum_names_ = std::move(names);
}

void ScoredDataset::set_soft_groups(std::vector<double> row_major) {
  if (row_major.size() != size() * group_names_.size()) {
    throw DataError("soft group scores need one column per group");
  }
  for (double v : row_major) {
    if (!std::isfinite(v)) throw DataError("non-finite soft group score");
  }
  soft_groups_ = std::move(row_major);
}

std::size_t ScoredDataset::group_index(const std::string& name) const {
  auto it = std::find(group_names_.begin(), group_names_.end(), name);
  if (it == group_names_.end()) throw DataError("unknown group '" + name + "'");
  return static_cast<std::size_t>(it - group_names_.begin());
}

ScoredDataset load_dataset(const Table& table, const LoadOptions& options) {
  auto find_column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (table.header[c] == name) return c;
    }
    return std::nullopt;
  };
  auto require = [&](std::string_view name) {
    auto c = find_column(name);
    if (!c) throw DataError("missing column '" + std::string(name) + "'");
    return *c;
  };
  const std::size_t score_col = require("score");
  const std::size_t label_col = require("label");
  const std::size_t group_col = require("group");
  const auto cond_col = find_column("cond");

  std::vector<std::pair<std::string, std::size_t>> soft_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].rfind("g:", 0) == 0) soft_cols.emplace_back(table.header[c].substr(2), c);
  }

  const std::size_t n = table.rows.size();
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  std::vector<std::size_t> groups(n);
  std::vector<std::string> group_names;
  std::unordered_map<std::string, std::size_t> group_ids;
  std::vector<std::size_t> strata;
  std::vector<std::string> stratum_names;
  std::unordered_map<std::string, std::size_t> stratum_ids;

  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      throw DataError("row " + std::to_string(r + 1) + ": expected " +
                      std::to_string(table.header.size()) + " cells, got " +
                      std::to_string(row.size()));
    }
    scores[r] = parse_real(row[score_col], "score", r);
    if (std::isnan(scores[r])) throw DataError("row " + std::to_string(r + 1) + ": NaN score");
    if (!std::isfinite(scores[r])) {
      throw DataError("row " + std::to_string(r + 1) + ": infinite score");
    }
    const double label = parse_real(row[label_col], "label", r);
    if (label != 0.0 && label != 1.0) {
      throw DataError("row " + std::to_string(r + 1) + ": non-binary label '" + row[label_col] +
                      "'");
    }
    labels[r] = label == 1.0 ? 1 : 0;
    const std::string& g = row[group_col];
    auto [it, inserted] = group_ids.try_emplace(g, group_names.size());
    if (inserted) group_names.push_back(g);
    groups[r] = it->second;
    if (cond_col) {
      const std::string& s = row[*cond_col];
      auto [sit, sinserted] = stratum_ids.try_emplace(s, stratum_names.size());
      if (sinserted) stratum_names.push_back(s);
      strata.push_back(sit->second);
    }
  }

  auto check_declared = [&](const std::string& name) {
    if (!group_ids.contains(name)) throw DataError("empty group '" + name + "'");
  };
  for (const auto& name : options.declared_groups) check_declared(name);
  for (const auto& [name, col] : soft_cols) check_declared(name);
  if (group_names.empty()) throw DataError("empty group: dataset has no rows");

  ScoredDataset ds(std::move(scores), std::move(labels), std::move(groups), group_names);
  if (cond_col) ds.set_strata(std::move(strata), std::move(stratum_names));

  if (!soft_cols.empty()) {
    const std::size_t k = group_names.size();
    std::vector<std::size_t> col_of_group(k, table.header.size());
    for (const auto& [name, col] : soft_cols) col_of_group[group_ids.at(name)] = col;
    for (std::size_t g = 0; g < k; ++g) {
      if (col_of_group[g] == table.header.size()) {
        throw DataError("missing soft-score column 'g:" + group_names[g] + "'");
      }
    }
    std::vector<double> soft(n * k);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t g = 0; g < k; ++g) {
        soft[r * k + g] = parse_real(table.rows[r][col_of_group[g]], "g:" + group_names[g], r);
      }
    }
    ds.set_soft_groups(std::move(soft));
  }
  return ds;
}

GroupAssignment true_group_assignment(const ScoredDataset& ds) {
  return GroupAssignment{ds.group_names(), {ds.groups().begin(), ds.groups().end()}};
}

std::vector<std::string> drop_empty_groups(GroupAssignment& assignment) {
  std::vector<std::size_t> rows(assignment.names.size(), 0);
  for (std::size_t a : assignment.of_row) ++rows[a];
  std::vector<std::size_t> remap(assignment.names.size(), 0);
  std::vector<std::string> kept;
  std::vector<std::string> dropped;
  for (std::size_t a = 0; a < assignment.names.size(); ++a) {
    if (rows[a] == 0) {
      dropped.push_back(assignment.names[a]);
    } else {
      remap[a] = kept.size();
      kept.push_back(assignment.names[a]);
    }
  }
  if (dropped.empty()) return dropped;
  for (auto& a : assignment.of_row) a = remap[a];
  assignment.names = std::move(kept);
  return dropped;
}

}  // namespace fairthresh
