// Copyright 2026 The Anatomy-kNN Authors
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

#ifndef ANATOMY_ANATOMIZER_HPP_
#define ANATOMY_ANATOMIZER_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "anatomy/dataset.hpp"
#include "json.hpp"

namespace anatomy {

enum class GroupId : std::uint32_t {};

constexpr std::uint32_t to_underlying(GroupId gid) { return static_cast<std::uint32_t>(gid); }

struct Group {
  GroupId gid{};
  std::vector<RowId> members;  // ascending row id

  bool operator==(const Group&) const = default;
};

// Disjoint l-diverse groups plus the rows that could not be placed.
struct GroupPartition {
  std::vector<Group> groups;  // gid 1, 2, ... in formation order
  std::vector<RowId> suppressed;
  int l = 0;

  std::size_t grouped_rows() const;
  bool operator==(const GroupPartition&) const = default;
};

enum class BucketOrder {
  kShuffled,  // each sensitive-value bucket is shuffled with the seed first
  kRowId,     // buckets are drained in ascending row id
};

struct GroupingOptions {
  std::uint64_t seed = 0;
  BucketOrder order = BucketOrder::kShuffled;
  // With fewer than l distinct sensitive values, suppress everything instead
  // of throwing.
  bool allow_infeasible = false;
};

// Greedy bucketization: rows are bucketed by sensitive value and every group
// takes one row from each of the l currently largest buckets (ties by
// sensitive value text). Stops when fewer than l buckets are non-empty; the
// rest is suppressed. Every group has exactly l members with l distinct
// sensitive values.
GroupPartition build_groups(const Dataset& train, int l, const GroupingOptions& options);
GroupPartition build_groups(const Dataset& train, int l, std::uint64_t seed);

struct GroupCheck {
  GroupId gid{};
  std::size_t size = 0;
  std::size_t max_frequency = 0;
  std::string most_frequent;
  bool ok = false;
  std::string problem;  // set for structural problems (unknown row, empty)
};

struct LDiversityReport {
  bool ok = true;
  std::vector<GroupCheck> groups;
};

// True iff freq(v, G) / |G| <= 1 / l for every value of every group.
LDiversityReport verify_l_diversity(const GroupPartition& partition, const Dataset& train);

// (class, quasi-identifiers..., gid) per grouped instance.
struct IdentifierTable {
  struct Row {
    RowId source{};  // not published; kept for auditing
    std::string class_label;
    std::vector<Cell> quasi;
    GroupId gid{};

    bool operator==(const Row&) const = default;
  };

  Schema schema;  // the anatomized schema: source schema without excluded columns
  std::vector<Row> rows;
  int l = 0;
};

// (gid, sensitive value) per grouped instance.
struct SensitiveTable {
  struct Row {
    GroupId gid{};
    Cell value;

    bool operator==(const Row&) const = default;
  };

  std::string sensitive_name;
  std::vector<Row> rows;
};

LDiversityReport verify_l_diversity(const SensitiveTable& st, int l);

// Throws ValidationError if a member id is not a row of `train`.
std::pair<IdentifierTable, SensitiveTable> emit_tables(const Dataset& train,
                                                       const GroupPartition& partition);

struct AnatomizedDataset {
  Dataset data;  // fresh sequential row ids
  std::vector<GroupId> origin_gid;
  std::vector<RowId> origin_row;  // source row of the identifier side
  int l = 0;
};

// Inner join on gid. For every identifier row, one joined row per sensitive
// row of its group, keeping quasi-identifiers, the sensitive value and the
// class label. Throws ValidationError on a gid present in only one table.
AnatomizedDataset join_anatomized(const IdentifierTable& it, const SensitiveTable& st);

// Convenience: build_groups + emit_tables + join_anatomized.
struct Anatomization {
  GroupPartition partition;
  IdentifierTable it;
  SensitiveTable st;
  AnatomizedDataset joined;
};
Anatomization anatomize(const Dataset& train, int l, const GroupingOptions& options);

void write_identifier_table(std::ostream& out, const IdentifierTable& it);
void write_sensitive_table(std::ostream& out, const SensitiveTable& st);

// Gid column of a serialized identifier table (the last column).
std::vector<GroupId> read_identifier_gids(std::istream& in);
// Values are read back as text.
SensitiveTable read_sensitive_table(std::istream& in);

// Every gid has the same number of rows in both tables.
bool tables_consistent(const std::vector<GroupId>& it_gids, const SensitiveTable& st,
                       std::string* problem = nullptr);

nlohmann::json partition_to_json(const GroupPartition& partition);
GroupPartition partition_from_json(const nlohmann::json& j);

}  // namespace anatomy

#endif  // ANATOMY_ANATOMIZER_HPP_
