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

#include "anatomy/anatomizer.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

#include "anatomy/csv.hpp"
#include "anatomy/error.hpp"

namespace anatomy {

std::size_t GroupPartition::grouped_rows() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.members.size();
  return n;
}

GroupPartition build_groups(const Dataset& train, int l, std::uint64_t seed) {
  return build_groups(train, l, GroupingOptions{.seed = seed});
}

GroupPartition build_groups(const Dataset& train, int l, const GroupingOptions& options) {
  if (l < 2) throw ValidationError("build_groups: l must be >= 2, got " + std::to_string(l));
  const std::size_t s = train.schema().sensitive_index();

  std::map<std::string, std::vector<RowId>> by_value;
  for (const auto& row : train.rows()) by_value[format_cell(row.values[s])].push_back(row.id);

  GroupPartition out;
  out.l = l;
  if (by_value.size() < static_cast<std::size_t>(l)) {
    if (!options.allow_infeasible) {
      throw ValidationError("build_groups: " + std::to_string(by_value.size()) +
                            " distinct sensitive value(s), need at least l = " +
                            std::to_string(l));
    }
    for (const auto& row : train.rows()) out.suppressed.push_back(row.id);
    std::sort(out.suppressed.begin(), out.suppressed.end());
    return out;
  }

  std::vector<std::vector<RowId>> buckets;
  std::mt19937_64 rng(options.seed);
  for (auto& [value, ids] : by_value) {
    std::sort(ids.begin(), ids.end());
    if (options.order == BucketOrder::kShuffled) std::shuffle(ids.begin(), ids.end(), rng);
    buckets.push_back(std::move(ids));
  }
  std::vector<std::size_t> next(buckets.size(), 0);

  // (remaining, bucket) ordered by remaining desc, then bucket (= value order) asc
  auto cmp = [](const std::pair<std::size_t, std::size_t>& a,
                const std::pair<std::size_t, std::size_t>& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::set<std::pair<std::size_t, std::size_t>, decltype(cmp)> live(cmp);
  for (std::size_t b = 0; b < buckets.size(); ++b) live.insert({buckets[b].size(), b});

  std::vector<std::pair<std::size_t, std::size_t>> drawn;
  while (live.size() >= static_cast<std::size_t>(l)) {
    drawn.assign(live.begin(), std::next(live.begin(), l));
    Group group;
    group.gid = GroupId{static_cast<std::uint32_t>(out.groups.size() + 1)};
    for (const auto& entry : drawn) {
      live.erase(entry);
      auto [remaining, b] = entry;
      group.members.push_back(buckets[b][next[b]++]);
      if (remaining > 1) live.insert({remaining - 1, b});
    }
    std::sort(group.members.begin(), group.members.end());
    out.groups.push_back(std::move(group));
  }
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    out.suppressed.insert(out.suppressed.end(), buckets[b].begin() + next[b], buckets[b].end());
  }
  std::sort(out.suppressed.begin(), out.suppressed.end());
  return out;
}

namespace {

GroupCheck check_values(GroupId gid, const std::vector<std::string>& values, int l) {
  GroupCheck check;
  check.gid = gid;
  check.size = values.size();
  if (values.empty()) {
    check.problem = "empty group";
    return check;
  }
  std::map<std::string, std::size_t> freq;
  for (const auto& v : values) ++freq[v];
  for (const auto& [v, n] : freq) {
    if (n > check.max_frequency) {
      check.max_frequency = n;
      check.most_frequent = v;
    }
  }
  // freq/|G| <= 1/l  <=>  freq * l <= |G|
  check.ok = check.max_frequency * static_cast<std::size_t>(l) <= check.size;
  return check;
}

std::unordered_map<std::uint64_t, std::size_t> position_index(const Dataset& data) {
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) index[to_underlying(data.row(i).id)] = i;
  return index;
}

}  // namespace

LDiversityReport verify_l_diversity(const GroupPartition& partition, const Dataset& train) {
  LDiversityReport report;
  const auto index = position_index(train);
  const std::size_t s = train.schema().sensitive_index();
  for (const auto& group : partition.groups) {
    std::vector<std::string> values;
    std::string unknown;
    for (RowId id : group.members) {
      auto it = index.find(to_underlying(id));
      if (it == index.end()) {
        unknown = "unknown row id " + std::to_string(to_underlying(id));
        break;
      }
      values.push_back(format_cell(train.row(it->second).values[s]));
    }
    GroupCheck check = check_values(group.gid, values, partition.l);
    if (!unknown.empty()) {
      check.ok = false;
      check.problem = unknown;
    }
    report.ok = report.ok && check.ok;
    report.groups.push_back(std::move(check));
  }
  return report;
}

LDiversityReport verify_l_diversity(const SensitiveTable& st, int l) {
  std::map<std::uint32_t, std::vector<std::string>> by_gid;
  for (const auto& row : st.rows) by_gid[to_underlying(row.gid)].push_back(format_cell(row.value));
  LDiversityReport report;
  for (const auto& [gid, values] : by_gid) {
    auto check = check_values(GroupId{gid}, values, l);
    report.ok = report.ok && check.ok;
    report.groups.push_back(std::move(check));
  }
  return report;
}

std::pair<IdentifierTable, SensitiveTable> emit_tables(const Dataset& train,
                                                       const GroupPartition& partition) {
  const Schema& schema = train.schema();
  IdentifierTable it;
  it.schema = schema.without_excluded();
  it.l = partition.l;
  SensitiveTable st;
  st.sensitive_name = schema[schema.sensitive_index()].name;

  const auto index = position_index(train);
  std::vector<GroupId> gid_of(train.size(), GroupId{0});
  for (const auto& group : partition.groups) {
    for (RowId id : group.members) {
      auto found = index.find(to_underlying(id));
      if (found == index.end()) {
        throw ValidationError("emit_tables: partition references unknown row id " +
                              std::to_string(to_underlying(id)));
      }
      gid_of[found->second] = group.gid;
    }
  }
  // IT follows the dataset order. ST is sorted by (gid, value) so that its
  // order inside a group says nothing about which IT row a value belongs to.
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (to_underlying(gid_of[i]) == 0) continue;
    const Instance& x = train.row(i);
    IdentifierTable::Row row;
    row.source = x.id;
    row.class_label = as_text(x.values[schema.class_index()]);
    for (std::size_t q : schema.quasi_indices()) row.quasi.push_back(x.values[q]);
    row.gid = gid_of[i];
    it.rows.push_back(std::move(row));
    st.rows.push_back({gid_of[i], x.values[schema.sensitive_index()]});
  }
  std::stable_sort(st.rows.begin(), st.rows.end(), [](const auto& a, const auto& b) {
    if (a.gid != b.gid) return to_underlying(a.gid) < to_underlying(b.gid);
    return format_cell(a.value) < format_cell(b.value);
  });
  return {std::move(it), std::move(st)};
}

AnatomizedDataset join_anatomized(const IdentifierTable& it, const SensitiveTable& st) {
  std::map<std::uint32_t, std::vector<const Cell*>> sensitive_by_gid;
  for (const auto& row : st.rows) sensitive_by_gid[to_underlying(row.gid)].push_back(&row.value);
  std::set<std::uint32_t> it_gids;
  for (const auto& row : it.rows) it_gids.insert(to_underlying(row.gid));
  for (const auto& [gid, values] : sensitive_by_gid) {
    if (!it_gids.contains(gid)) {
      throw ValidationError("join_anatomized: gid " + std::to_string(gid) +
                            " appears only in the sensitive table");
    }
  }

  const Schema& schema = it.schema;
  const auto& quasi = schema.quasi_indices();
  AnatomizedDataset out;
  out.l = it.l;
  std::vector<Instance> rows;
  std::uint64_t next_id = 0;
  for (const auto& row : it.rows) {
    auto found = sensitive_by_gid.find(to_underlying(row.gid));
    if (found == sensitive_by_gid.end()) {
      throw ValidationError("join_anatomized: gid " + std::to_string(to_underlying(row.gid)) +
                            " appears only in the identifier table");
    }
    if (row.quasi.size() != quasi.size()) {
      throw ValidationError("join_anatomized: identifier row arity does not match schema");
    }
    for (const Cell* value : found->second) {
      Instance x;
      x.id = RowId{next_id++};
      x.values.resize(schema.size());
      for (std::size_t q = 0; q < quasi.size(); ++q) x.values[quasi[q]] = row.quasi[q];
      x.values[schema.sensitive_index()] = *value;
      x.values[schema.class_index()] = row.class_label;
      rows.push_back(std::move(x));
      out.origin_gid.push_back(row.gid);
      out.origin_row.push_back(row.source);
    }
  }
  out.data = Dataset(schema, std::move(rows));
  return out;
}

Anatomization anatomize(const Dataset& train, int l, const GroupingOptions& options) {
  Anatomization a;
  a.partition = build_groups(train, l, options);
  std::tie(a.it, a.st) = emit_tables(train, a.partition);
  a.joined = join_anatomized(a.it, a.st);
  return a;
}

void write_identifier_table(std::ostream& out, const IdentifierTable& it) {
  const Schema& schema = it.schema;
  csv::Record record{schema[schema.class_index()].name};
  for (std::size_t q : schema.quasi_indices()) record.push_back(schema[q].name);
  record.push_back("gid");
  csv::write_record(out, record);
  for (const auto& row : it.rows) {
    record.clear();
    record.push_back(row.class_label);
    for (const auto& cell : row.quasi) record.push_back(format_cell(cell));
    record.push_back(std::to_string(to_underlying(row.gid)));
    csv::write_record(out, record);
  }
}

void write_sensitive_table(std::ostream& out, const SensitiveTable& st) {
  csv::write_record(out, {"gid", st.sensitive_name});
  for (const auto& row : st.rows) {
    csv::write_record(out, {std::to_string(to_underlying(row.gid)), format_cell(row.value)});
  }
}

namespace {

GroupId parse_gid(const std::string& token) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
    throw DataError("invalid gid \"" + token + "\"");
  }
  return GroupId{value};
}

}  // namespace

std::vector<GroupId> read_identifier_gids(std::istream& in) {
  auto records = csv::read(in);
  if (records.empty() || records.front().empty() || records.front().back() != "gid") {
    throw DataError("identifier table: last header column must be \"gid\"");
  }
  std::vector<GroupId> gids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != records.front().size()) {
      throw DataError("identifier table: ragged row " + std::to_string(r + 1));
    }
    gids.push_back(parse_gid(records[r].back()));
  }
  return gids;
}

SensitiveTable read_sensitive_table(std::istream& in) {
  auto records = csv::read(in);
  if (records.empty() || records.front().size() != 2 || records.front()[0] != "gid") {
    throw DataError("sensitive table: header must be \"gid,<sensitive attribute>\"");
  }
  SensitiveTable st;
  st.sensitive_name = records.front()[1];
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != 2) throw DataError("sensitive table: ragged row " + std::to_string(r + 1));
    st.rows.push_back({parse_gid(records[r][0]), records[r][1]});
  }
  return st;
}

bool tables_consistent(const std::vector<GroupId>& it_gids, const SensitiveTable& st,
                       std::string* problem) {
  std::map<std::uint32_t, long> balance;
  for (GroupId g : it_gids) ++balance[to_underlying(g)];
  for (const auto& row : st.rows) --balance[to_underlying(row.gid)];
  for (const auto& [gid, diff] : balance) {
    if (diff != 0) {
      if (problem) {
        *problem = "gid " + std::to_string(gid) + " has " + std::to_string(diff) +
                   " more identifier than sensitive row(s)";
      }
      return false;
    }
  }
  return true;
}

nlohmann::json partition_to_json(const GroupPartition& partition) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : partition.groups) {
    nlohmann::json members = nlohmann::json::array();
    for (RowId id : g.members) members.push_back(to_underlying(id));
    groups.push_back({{"gid", to_underlying(g.gid)}, {"members", members}});
  }
  nlohmann::json suppressed = nlohmann::json::array();
  for (RowId id : partition.suppressed) suppressed.push_back(to_underlying(id));
  return {{"l", partition.l}, {"groups", groups}, {"suppressed", suppressed}};
}

GroupPartition partition_from_json(const nlohmann::json& j) {
  GroupPartition p;
  try {
    p.l = j.at("l").get<int>();
    for (const auto& g : j.at("groups")) {
      Group group;
      group.gid = GroupId{g.at("gid").get<std::uint32_t>()};
      for (const auto& m : g.at("members")) group.members.push_back(RowId{m.get<std::uint64_t>()});
      p.groups.push_back(std::move(group));
    }
    for (const auto& s : j.at("suppressed")) p.suppressed.push_back(RowId{s.get<std::uint64_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("partition json: ") + e.what());
  }
  return p;
}

}  // namespace anatomy
