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

#ifndef ANATOMY_DATASET_HPP_
#define ANATOMY_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace anatomy {

enum class AttributeKind { kNumeric, kCategorical };
enum class AttributeRole { kQuasiIdentifying, kSensitive, kClass, kExcluded };

std::string_view to_string(AttributeKind kind);
std::string_view to_string(AttributeRole role);

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;
  AttributeRole role = AttributeRole::kExcluded;

  bool operator==(const AttributeSchema&) const = default;
};

// Ordered attribute list with exactly one sensitive and one (categorical)
// class attribute. Feature attributes are the quasi-identifiers plus the
// sensitive attribute, in schema order.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<AttributeSchema> attributes);

  const std::vector<AttributeSchema>& attributes() const { return attributes_; }
  std::size_t size() const { return attributes_.size(); }
  const AttributeSchema& operator[](std::size_t i) const { return attributes_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws DataError when absent.
  std::size_t index_of(std::string_view name) const;

  std::size_t sensitive_index() const { return sensitive_; }
  std::size_t class_index() const { return class_; }
  const std::vector<std::size_t>& quasi_indices() const { return quasi_; }
  const std::vector<std::size_t>& feature_indices() const { return features_; }
  // Number of identifying attributes, d.
  std::size_t dimension() const { return quasi_.size(); }

  // Same attributes minus the excluded ones.
  Schema without_excluded() const;

  bool operator==(const Schema& other) const { return attributes_ == other.attributes_; }

 private:
  std::vector<AttributeSchema> attributes_;
  std::size_t sensitive_ = 0;
  std::size_t class_ = 0;
  std::vector<std::size_t> quasi_;
  std::vector<std::size_t> features_;
};

Schema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const Schema& schema);
Schema load_schema(const std::string& path);

enum class RowId : std::uint64_t {};

constexpr std::uint64_t to_underlying(RowId id) { return static_cast<std::uint64_t>(id); }

// Numeric attributes hold doubles; categorical and excluded attributes hold
// their text token.
using Cell = std::variant<double, std::string>;

double as_number(const Cell& cell);
const std::string& as_text(const Cell& cell);
// Canonical text form: shortest round-trip decimal for numbers.
std::string format_cell(const Cell& cell);

struct Instance {
  RowId id{};
  std::vector<Cell> values;

  bool operator==(const Instance&) const = default;
};

// Immutable table of instances aligned to a schema. Row ids are unique and
// survive subsetting.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::vector<Instance> rows);

  const Schema& schema() const { return schema_; }
  std::span<const Instance> rows() const { return rows_; }
  const Instance& row(std::size_t i) const { return rows_[i]; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  const std::string& class_of(std::size_t i) const;
  // Sorted distinct class labels present in the rows.
  std::vector<std::string> class_labels() const;

  // Rows at the given positions, in the order given.
  Dataset subset(std::span<const std::size_t> positions) const;

  bool operator==(const Dataset&) const = default;

 private:
  Schema schema_;
  std::vector<Instance> rows_;
};

enum class MissingPolicy { kDropRow, kError };

struct LoadResult {
  Dataset data;
  std::size_t dropped = 0;
};

// Loads a headered CSV. Header names must be exactly the schema's names (in
// any order); "?" or an empty field marks a missing value. Row ids follow
// file order starting at 0. The class attribute must show exactly two labels.
LoadResult load_csv(std::istream& in, const Schema& schema, MissingPolicy policy);
LoadResult load_csv(const std::string& path, const Schema& schema, MissingPolicy policy);

// Canonical serialization: schema column order, one row per instance.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);

}  // namespace anatomy

#endif  // ANATOMY_DATASET_HPP_
