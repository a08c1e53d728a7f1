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

#ifndef ANATOMY_NORMALIZATION_HPP_
#define ANATOMY_NORMALIZATION_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anatomy/dataset.hpp"

namespace anatomy {

struct NumericRange {
  double min = 0;
  double max = 0;

  bool operator==(const NumericRange&) const = default;
};

// Per-attribute statistics fitted on one dataset (a training split). Keyed by
// attribute name so they apply to derived tables whose schema drops columns.
class NormalizationStats {
 public:
  struct Entry {
    std::string name;
    AttributeKind kind = AttributeKind::kNumeric;
    NumericRange range;                   // numeric only
    std::vector<std::string> categories;  // categorical only, sorted

    bool operator==(const Entry&) const = default;
  };

  NormalizationStats() = default;
  explicit NormalizationStats(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  const std::vector<Entry>& entries() const { return entries_; }
  const Entry* find(std::string_view name) const;
  const Entry& at(std::string_view name) const;

  // (v - min) / (max - min); 0 when the fitted column was constant.
  double normalize(std::string_view name, double value) const;

  bool operator==(const NormalizationStats&) const = default;

 private:
  std::vector<Entry> entries_;
};

// Covers every non-excluded attribute of `train`. Throws ValidationError on
// an empty dataset.
NormalizationStats fit_normalization(const Dataset& train);

double normalize_value(const NumericRange& range, double value);

}  // namespace anatomy

#endif  // ANATOMY_NORMALIZATION_HPP_
