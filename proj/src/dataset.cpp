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

#include "anatomy/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <unordered_set>

#include "anatomy/csv.hpp"
#include "anatomy/error.hpp"

namespace anatomy {

std::string_view to_string(AttributeKind kind) {
  return kind == AttributeKind::kNumeric ? "numeric" : "categorical";
}

std::string_view to_string(AttributeRole role) {
  switch (role) {
    case AttributeRole::kQuasiIdentifying:
      return "quasi_identifying";
    case AttributeRole::kSensitive:
      return "sensitive";
    case AttributeRole::kClass:
      return "class";
    case AttributeRole::kExcluded:
      return "excluded";
  }
  return "excluded";
}

Schema::Schema(std::vector<AttributeSchema> attributes) : attributes_(std::move(attributes)) {
  std::optional<std::size_t> sensitive, cls;
  std::set<std::string, std::less<>> names;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    const auto& a = attributes_[i];
    if (a.name.empty()) throw DataError("schema: attribute with empty name");
    if (!names.insert(a.name).second) throw DataError("schema: duplicate attribute " + a.name);
    switch (a.role) {
      case AttributeRole::kSensitive:
        if (sensitive) throw DataError("schema: more than one sensitive attribute");
        sensitive = i;
        break;
      case AttributeRole::kClass:
        if (cls) throw DataError("schema: more than one class attribute");
        if (a.kind != AttributeKind::kCategorical) {
          throw DataError("schema: class attribute " + a.name + " must be categorical");
        }
        cls = i;
        break;
      case AttributeRole::kQuasiIdentifying:
        quasi_.push_back(i);
        break;
      case AttributeRole::kExcluded:
        break;
    }
  }
  if (!sensitive) throw DataError("schema: no sensitive attribute");
  if (!cls) throw DataError("schema: no class attribute");
  sensitive_ = *sensitive;
  class_ = *cls;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    auto role = attributes_[i].role;
    if (role == AttributeRole::kQuasiIdentifying || role == AttributeRole::kSensitive) {
      features_.push_back(i);
    }
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw DataError("schema: unknown attribute " + std::string(name));
  return *i;
}

Schema Schema::without_excluded() const {
  std::vector<AttributeSchema> kept;
  for (const auto& a : attributes_) {
    if (a.role != AttributeRole::kExcluded) kept.push_back(a);
  }
  return Schema(std::move(kept));
}

Schema schema_from_json(const nlohmann::json& j) {
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    if (!j.contains("attributes")) throw DataError("schema: missing \"attributes\"");
    list = &j.at("attributes");
  }
  if (!list->is_array()) throw DataError("schema: \"attributes\" must be an array");
  std::vector<AttributeSchema> attributes;
  for (const auto& item : *list) {
    AttributeSchema a;
    try {
      a.name = item.at("name").get<std::string>();
      auto kind = item.at("kind").get<std::string>();
      auto role = item.at("role").get<std::string>();
      if (kind == "numeric") {
        a.kind = AttributeKind::kNumeric;
      } else if (kind == "categorical") {
        a.kind = AttributeKind::kCategorical;
      } else {
        throw DataError("schema: unknown kind \"" + kind + "\" for " + a.name);
      }
      if (role == "quasi_identifying") {
        a.role = AttributeRole::kQuasiIdentifying;
      } else if (role == "sensitive") {
        a.role = AttributeRole::kSensitive;
      } else if (role == "class") {
        a.role = AttributeRole::kClass;
      } else if (role == "excluded") {
        a.role = AttributeRole::kExcluded;
      } else {
        throw DataError("schema: unknown role \"" + role + "\" for " + a.name);
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("schema: ") + e.what());
    }
    attributes.push_back(std::move(a));
  }
  return Schema(std::move(attributes));
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& a : schema.attributes()) {
    list.push_back({{"name", a.name}, {"kind", to_string(a.kind)}, {"role", to_string(a.role)}});
  }
  return {{"attributes", list}};
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema " + path);
  try {
    return schema_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("schema " + path + ": " + e.what());
  }
}

double as_number(const Cell& cell) {
  if (const double* v = std::get_if<double>(&cell)) return *v;
  throw DataError("expected a numeric cell, found \"" + std::get<std::string>(cell) + "\"");
}

const std::string& as_text(const Cell& cell) {
  if (const std::string* v = std::get_if<std::string>(&cell)) return *v;
  throw DataError("expected a categorical cell, found a number");
}

std::string format_cell(const Cell& cell) {
  if (const std::string* text = std::get_if<std::string>(&cell)) return *text;
  char buffer[64];
  auto result = std::to_chars(buffer, buffer + sizeof(buffer), std::get<double>(cell));
  return std::string(buffer, result.ptr);
}

Dataset::Dataset(Schema schema, std::vector<Instance> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  std::unordered_set<std::uint64_t> ids;
  ids.reserve(rows_.size());
  for (const auto& row : rows_) {
    if (row.values.size() != schema_.size()) {
      throw DataError("dataset: row " + std::to_string(to_underlying(row.id)) + " has " +
                      std::to_string(row.values.size()) + " values, schema has " +
                      std::to_string(schema_.size()));
    }
    for (std::size_t i = 0; i < schema_.size(); ++i) {
      bool numeric = std::holds_alternative<double>(row.values[i]);
      if (numeric != (schema_[i].kind == AttributeKind::kNumeric &&
                      schema_[i].role != AttributeRole::kExcluded)) {
        throw DataError("dataset: cell type mismatch for attribute " + schema_[i].name);
      }
    }
    if (!ids.insert(to_underlying(row.id)).second) {
      throw DataError("dataset: duplicate row id " + std::to_string(to_underlying(row.id)));
    }
  }
}

const std::string& Dataset::class_of(std::size_t i) const {
  return std::get<std::string>(rows_[i].values[schema_.class_index()]);
}

std::vector<std::string> Dataset::class_labels() const {
  std::set<std::string> labels;
  for (std::size_t i = 0; i < rows_.size(); ++i) labels.insert(class_of(i));
  return {labels.begin(), labels.end()};
}

Dataset Dataset::subset(std::span<const std::size_t> positions) const {
  std::vector<Instance> rows;
  rows.reserve(positions.size());
  for (std::size_t p : positions) rows.push_back(rows_.at(p));
  return Dataset(schema_, std::move(rows));
}

namespace {

bool is_missing(const std::string& token) { return token.empty() || token == "?"; }

double parse_number(const std::string& token, const std::string& attribute, std::size_t line) {
  double value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataError("line " + std::to_string(line) + ": non-numeric token \"" + token +
                    "\" in numeric column " + attribute);
  }
  return value;
}

}  // namespace

LoadResult load_csv(std::istream& in, const Schema& schema, MissingPolicy policy) {
  auto records = csv::read(in);
  if (records.empty()) throw DataError("csv: missing header row");
  const auto& header = records.front();
  if (header.size() != schema.size()) {
    throw DataError("csv: header has " + std::to_string(header.size()) + " columns, schema has " +
                    std::to_string(schema.size()));
  }
  // column_of[schema index] = csv column
  std::vector<std::size_t> column_of(schema.size(), header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto i = schema.find(header[c]);
    if (!i) throw DataError("csv: header column \"" + header[c] + "\" not in schema");
    if (column_of[*i] != header.size()) throw DataError("csv: duplicate header " + header[c]);
    column_of[*i] = c;
  }

  LoadResult result;
  std::vector<Instance> rows;
  std::uint64_t next_id = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    std::size_t line = r + 1;
    if (record.size() != header.size()) {
      throw DataError("csv: line " + std::to_string(line) + " has " +
                      std::to_string(record.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    Instance instance;
    instance.values.reserve(schema.size());
    bool missing = false;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& a = schema[i];
      const auto& token = record[column_of[i]];
      if (a.role == AttributeRole::kExcluded) {
        instance.values.emplace_back(token);
        continue;
      }
      if (is_missing(token)) {
        if (policy == MissingPolicy::kError) {
          throw DataError("csv: line " + std::to_string(line) + ": missing value for " + a.name);
        }
        missing = true;
        break;
      }
      if (a.kind == AttributeKind::kNumeric) {
        instance.values.emplace_back(parse_number(token, a.name, line));
      } else {
        instance.values.emplace_back(token);
      }
    }
    if (missing) {
      ++result.dropped;
      continue;
    }
    // ids number the kept rows in file order
    instance.id = RowId{next_id++};
    rows.push_back(std::move(instance));
  }
  if (rows.empty()) throw DataError("csv: no complete rows");
  result.data = Dataset(schema, std::move(rows));
  auto labels = result.data.class_labels();
  if (labels.size() != 2) {
    throw DataError("csv: class attribute " + schema[schema.class_index()].name + " has " +
                    std::to_string(labels.size()) + " labels, expected exactly 2");
  }
  if (result.dropped > 0) {
    std::clog << "load_csv: dropped " << result.dropped << " row(s) with missing values\n";
  }
  return result;
}

LoadResult load_csv(const std::string& path, const Schema& schema, MissingPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_csv(in, schema, policy);
}

void write_csv(std::ostream& out, const Dataset& data) {
  csv::Record record;
  for (const auto& a : data.schema().attributes()) record.push_back(a.name);
  csv::write_record(out, record);
  for (const auto& row : data.rows()) {
    record.clear();
    for (const auto& cell : row.values) record.push_back(format_cell(cell));
    csv::write_record(out, record);
  }
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_csv(out, data);
}

}  // namespace anatomy
