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

#include "anatomy/adult.hpp"

#include <array>
#include <istream>
#include <ostream>

#include "anatomy/csv.hpp"
#include "anatomy/error.hpp"

namespace anatomy {

namespace {

constexpr std::size_t kRawColumns = 15;
// positions in the raw record of education, marital-status, capital-gain,
// capital-loss, hours-per-week and income
constexpr std::array<std::size_t, 6> kKept = {3, 5, 10, 11, 12, 14};

}  // namespace

const std::vector<std::string>& adult_columns() {
  static const std::vector<std::string> columns = {
      "education", "marital-status", "capital-gain", "capital-loss", "hours-per-week", "income"};
  return columns;
}

AdultPrepStats prepare_adult(std::istream& raw, std::ostream& out, bool header) {
  AdultPrepStats stats;
  if (header) csv::write_record(out, adult_columns());
  csv::Record kept(kKept.size());
  for (const auto& record : csv::read(raw)) {
    if (record.size() == 1 && !record[0].empty() && record[0][0] == '|') continue;
    if (record.size() != kRawColumns) {
      throw DataError("adult: expected 15 fields, got " + std::to_string(record.size()) +
                      " in record " + std::to_string(stats.read + 1));
    }
    ++stats.read;
    bool missing = false;
    for (const auto& field : record) missing = missing || field == "?" || field.empty();
    if (missing) {
      ++stats.dropped_missing;
      continue;
    }
    for (std::size_t i = 0; i < kKept.size(); ++i) kept[i] = record[kKept[i]];
    if (!kept.back().empty() && kept.back().back() == '.') kept.back().pop_back();
    csv::write_record(out, kept);
    ++stats.kept;
  }
  return stats;
}

}  // namespace anatomy
