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

#include "anatomy/feature_space.hpp"

#include <algorithm>

#include "anatomy/error.hpp"

namespace anatomy {

FeatureSpace::FeatureSpace(std::vector<Axis> axes) : axes_(std::move(axes)) {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const Axis& a = axes_[i];
    if (!(a.weight >= 0.0)) throw ValidationError("axis " + a.name + ": weight must be >= 0");
    if (a.kind == AttributeKind::kNumeric) {
      numeric_.push_back(i);
      numeric_weight_.push_back(a.weight);
    } else {
      categorical_.push_back(i);
      categorical_weight_.push_back(a.weight);
      leaf_count_.push_back(a.leaves.size());
      node_bits_.emplace_back();
      auto& index = leaf_index_.emplace_back();
      for (std::size_t c = 0; c < a.leaves.size(); ++c) {
        if (!index.emplace(a.leaves[c], static_cast<std::int32_t>(c)).second) {
          throw ValidationError("axis " + a.name + ": duplicate category " + a.leaves[c]);
        }
      }
    }
  }
}

std::int32_t FeatureSpace::add_node(std::size_t j, std::span<const std::int32_t> leaves) {
  if (leaf_count_.at(j) == 0) throw ValidationError("add_node: axis has no leaves");
  auto& bits = node_bits_[j];
  std::size_t w = words(j);
  std::size_t first = bits.size();
  bits.resize(first + w, 0);
  for (std::int32_t leaf : leaves) {
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= leaf_count_[j]) {
      throw ValidationError("add_node: leaf code out of range");
    }
    bits[first + (leaf >> 6)] |= std::uint64_t{1} << (leaf & 63);
  }
  return static_cast<std::int32_t>(leaf_count_[j] + first / w);
}

std::int32_t FeatureSpace::leaf_code(std::size_t j, std::string_view value) const {
  const auto& index = leaf_index_[j];
  auto it = index.find(value);
  return it == index.end() ? -1 : it->second;
}

void FeatureSpace::accumulate(std::size_t j, std::int32_t code, std::uint64_t* out) const {
  if (code < 0) return;
  if (code < static_cast<std::int32_t>(leaf_count_[j])) {
    out[code >> 6] |= std::uint64_t{1} << (code & 63);
    return;
  }
  const std::uint64_t* bits = node_bits(j, code);
  for (std::size_t w = 0; w < words(j); ++w) out[w] |= bits[w];
}

QueryEncoder::QueryEncoder(const FeatureSpace& space, const Schema& schema) : space_(&space) {
  for (std::size_t j = 0; j < space.numeric_count(); ++j) {
    const Axis& a = space.axes()[space.numeric_axis(j)];
    auto col = schema.find(a.name);
    if (!col || schema[*col].kind != AttributeKind::kNumeric ||
        schema[*col].role == AttributeRole::kExcluded) {
      throw ValidationError("query schema lacks numeric feature " + a.name);
    }
    numeric_column_.push_back(*col);
  }
  for (std::size_t j = 0; j < space.categorical_count(); ++j) {
    const Axis& a = space.axes()[space.categorical_axis(j)];
    auto col = schema.find(a.name);
    if (!col || schema[*col].kind != AttributeKind::kCategorical ||
        schema[*col].role == AttributeRole::kExcluded) {
      throw ValidationError("query schema lacks categorical feature " + a.name);
    }
    categorical_column_.push_back(*col);
  }
}

EncodedQuery QueryEncoder::encode(const Instance& x) const {
  EncodedQuery q;
  q.numeric.reserve(numeric_column_.size());
  for (std::size_t j = 0; j < numeric_column_.size(); ++j) {
    const Axis& a = space_->axes()[space_->numeric_axis(j)];
    q.numeric.push_back(normalize_value(a.range, as_number(x.values[numeric_column_[j]])));
  }
  q.categorical.reserve(categorical_column_.size());
  for (std::size_t j = 0; j < categorical_column_.size(); ++j) {
    q.categorical.push_back(space_->leaf_code(j, as_text(x.values[categorical_column_[j]])));
  }
  return q;
}

}  // namespace anatomy
