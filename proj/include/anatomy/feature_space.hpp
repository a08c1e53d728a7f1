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

#ifndef ANATOMY_FEATURE_SPACE_HPP_
#define ANATOMY_FEATURE_SPACE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anatomy/dataset.hpp"
#include "anatomy/normalization.hpp"

namespace anatomy {

// One axis of the quadratic metric. Numeric axes hold normalized values.
// Categorical axes hold codes: 0..leaves-1 are exact values, larger codes are
// generalization nodes covering a set of leaves. A categorical term is 0 when
// the training code covers the query leaf and `weight` otherwise.
struct Axis {
  std::string name;
  AttributeKind kind = AttributeKind::kNumeric;
  double weight = 1.0;
  NumericRange range;               // numeric
  std::vector<std::string> leaves;  // categorical
};

// Squared diagonal quadratic form over mixed numeric/categorical axes.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  explicit FeatureSpace(std::vector<Axis> axes);

  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t numeric_count() const { return numeric_.size(); }
  std::size_t categorical_count() const { return categorical_.size(); }
  // Axis index of the j-th numeric / categorical slot.
  std::size_t numeric_axis(std::size_t j) const { return numeric_[j]; }
  std::size_t categorical_axis(std::size_t j) const { return categorical_[j]; }

  // Registers a node covering `leaves` on categorical slot j; returns its code.
  std::int32_t add_node(std::size_t j, std::span<const std::int32_t> leaves);
  std::size_t leaf_count(std::size_t j) const { return leaf_count_[j]; }
  std::size_t words(std::size_t j) const { return (leaf_count_[j] + 63) / 64; }
  // -1 for a value outside the axis domain.
  std::int32_t leaf_code(std::size_t j, std::string_view value) const;

  bool covers(std::size_t j, std::int32_t code, std::int32_t leaf) const {
    if (leaf < 0) return false;
    if (code < static_cast<std::int32_t>(leaf_count_[j])) return code == leaf;
    const std::uint64_t* bits = node_bits(j, code);
    return (bits[leaf >> 6] >> (leaf & 63)) & 1U;
  }
  // Sets the leaf bits covered by `code` in `out` (words(j) entries).
  void accumulate(std::size_t j, std::int32_t code, std::uint64_t* out) const;

  double numeric_weight(std::size_t j) const { return numeric_weight_[j]; }
  double categorical_weight(std::size_t j) const { return categorical_weight_[j]; }

  // Numeric terms first, then categorical, each in slot order. Every caller
  // (index and exhaustive scan) uses this one summation order.
  double distance(const double* numeric, const std::int32_t* categorical,
                  const double* query_numeric, const std::int32_t* query_categorical) const {
    double d = 0.0;
    for (std::size_t j = 0; j < numeric_.size(); ++j) {
      double diff = numeric[j] - query_numeric[j];
      d += numeric_weight_[j] * diff * diff;
    }
    for (std::size_t j = 0; j < categorical_.size(); ++j) {
      if (!covers(j, categorical[j], query_categorical[j])) d += categorical_weight_[j];
    }
    return d;
  }

 private:
  const std::uint64_t* node_bits(std::size_t j, std::int32_t code) const {
    return node_bits_[j].data() + (code - leaf_count_[j]) * words(j);
  }

  std::vector<Axis> axes_;
  std::vector<std::size_t> numeric_;
  std::vector<std::size_t> categorical_;
  std::vector<double> numeric_weight_;
  std::vector<double> categorical_weight_;
  std::vector<std::size_t> leaf_count_;
  std::vector<std::vector<std::uint64_t>> node_bits_;
  std::vector<std::map<std::string, std::int32_t, std::less<>>> leaf_index_;
};

// Encoded training rows, row-major per kind.
struct PointSet {
  std::size_t size = 0;
  std::vector<double> numeric;           // size * numeric_count
  std::vector<std::int32_t> categorical;  // size * categorical_count
  std::vector<std::uint8_t> label;       // index into the model's label list
  std::vector<RowId> ids;
};

struct EncodedQuery {
  std::vector<double> numeric;
  std::vector<std::int32_t> categorical;
};

// Maps instances of a given schema onto a feature space by attribute name.
class QueryEncoder {
 public:
  // Throws ValidationError when a feature attribute is missing from `schema`
  // or has a different kind.
  QueryEncoder(const FeatureSpace& space, const Schema& schema);
  EncodedQuery encode(const Instance& x) const;

 private:
  const FeatureSpace* space_;
  std::vector<std::size_t> numeric_column_;
  std::vector<std::size_t> categorical_column_;
};

}  // namespace anatomy

#endif  // ANATOMY_FEATURE_SPACE_HPP_
