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

#ifndef ANATOMY_TESTS_TEST_UTIL_HPP_
#define ANATOMY_TESTS_TEST_UTIL_HPP_

#include <random>
#include <string>
#include <vector>

#include "anatomy/dataset.hpp"

namespace anatomy::testing {

inline AttributeSchema attr(std::string name, AttributeKind kind, AttributeRole role) {
  return {std::move(name), kind, role};
}

constexpr auto kNum = AttributeKind::kNumeric;
constexpr auto kCat = AttributeKind::kCategorical;
constexpr auto kQuasi = AttributeRole::kQuasiIdentifying;
constexpr auto kSens = AttributeRole::kSensitive;
constexpr auto kClass = AttributeRole::kClass;

// A1 numeric quasi, As categorical sensitive, C class.
inline Schema small_schema() {
  return Schema({attr("A1", kNum, kQuasi), attr("As", kCat, kSens), attr("C", kCat, kClass)});
}

inline Instance row(std::uint64_t id, double a1, std::string as, std::string c) {
  return {RowId{id}, {Cell{a1}, Cell{std::move(as)}, Cell{std::move(c)}}};
}

// Random data: `quasi` numeric quasi-identifiers with small integer values
// (so that ties occur), a categorical sensitive attribute with
// `sensitive_values` values and a binary class.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, int quasi,
                              int sensitive_values, int value_range = 5) {
  std::vector<AttributeSchema> attrs;
  for (int q = 0; q < quasi; ++q) attrs.push_back(attr("q" + std::to_string(q), kNum, kQuasi));
  attrs.push_back(attr("s", kCat, kSens));
  attrs.push_back(attr("c", kCat, kClass));
  std::uniform_int_distribution<int> value(0, value_range - 1);
  std::uniform_int_distribution<int> sensitive(0, sensitive_values - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<Instance> rows;
  for (std::size_t i = 0; i < n; ++i) {
    Instance x{RowId{i + 1}, {}};
    for (int q = 0; q < quasi; ++q) x.values.emplace_back(static_cast<double>(value(rng)));
    x.values.emplace_back("v" + std::to_string(sensitive(rng)));
    x.values.emplace_back(std::string(coin(rng) ? "+" : "-"));
    rows.push_back(std::move(x));
  }
  return Dataset(Schema(std::move(attrs)), std::move(rows));
}

}  // namespace anatomy::testing

#endif  // ANATOMY_TESTS_TEST_UTIL_HPP_
