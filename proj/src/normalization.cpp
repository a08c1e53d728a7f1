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

#include "anatomy/normalization.hpp"

#include <algorithm>
#include <set>

#include "anatomy/error.hpp"

namespace anatomy {

const NormalizationStats::Entry* NormalizationStats::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const NormalizationStats::Entry& NormalizationStats::at(std::string_view name) const {
  const Entry* e = find(name);
  if (!e) throw ValidationError("normalization: no statistics for " + std::string(name));
  return *e;
}

double normalize_value(const NumericRange& range, double value) {
  if (!(range.max > range.min)) return 0.0;
  return (value - range.min) / (range.max - range.min);
}

double NormalizationStats::normalize(std::string_view name, double value) const {
  const Entry& e = at(name);
  if (e.kind != AttributeKind::kNumeric) {
    throw ValidationError("normalization: " + std::string(name) + " is not numeric");
  }
  return normalize_value(e.range, value);
}

NormalizationStats fit_normalization(const Dataset& train) {
  if (train.empty()) throw ValidationError("fit_normalization: empty dataset");
  const Schema& schema = train.schema();
  std::vector<NormalizationStats::Entry> entries;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& a = schema[i];
    if (a.role == AttributeRole::kExcluded) continue;
    NormalizationStats::Entry e;
    e.name = a.name;
    e.kind = a.kind;
    if (a.kind == AttributeKind::kNumeric) {
      double lo = as_number(train.row(0).values[i]);
      double hi = lo;
      for (const auto& row : train.rows()) {
        double v = as_number(row.values[i]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      e.range = {lo, hi};
    } else {
      std::set<std::string> seen;
      for (const auto& row : train.rows()) seen.insert(as_text(row.values[i]));
      e.categories.assign(seen.begin(), seen.end());
    }
    entries.push_back(std::move(e));
  }
  return NormalizationStats(std::move(entries));
}

}  // namespace anatomy
