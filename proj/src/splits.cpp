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

#include "anatomy/splits.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "anatomy/error.hpp"

namespace anatomy {

std::vector<Fold> split_folds(const Dataset& data, int folds, std::uint64_t seed) {
  if (folds < 2 || static_cast<std::size_t>(folds) > data.size()) {
    throw ValidationError("split_folds: folds must be in [2, " + std::to_string(data.size()) +
                          "], got " + std::to_string(folds));
  }
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.class_of(i)].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(data.size());
  std::size_t deal = 0;
  for (auto& [label, positions] : by_class) {
    std::shuffle(positions.begin(), positions.end(), rng);
    for (std::size_t p : positions) fold_of[p] = static_cast<int>(deal++ % folds);
  }

  std::vector<Fold> out;
  out.reserve(folds);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? test : train).push_back(i);
    out.push_back({data.subset(train), data.subset(test)});
  }
  return out;
}

std::vector<Dataset> split_partitions(const Dataset& data, int parts, std::uint64_t seed) {
  if (parts < 2 || static_cast<std::size_t>(parts) > data.size()) {
    throw ValidationError("split_partitions: parts must be in [2, " +
                          std::to_string(data.size()) + "], got " + std::to_string(parts));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Dataset> out;
  std::size_t base = data.size() / parts;
  std::size_t extra = data.size() % parts;
  std::size_t begin = 0;
  for (int p = 0; p < parts; ++p) {
    std::size_t size = base + (static_cast<std::size_t>(p) < extra ? 1 : 0);
    std::vector<std::size_t> chunk(order.begin() + begin, order.begin() + begin + size);
    out.push_back(data.subset(chunk));
    begin += size;
  }
  return out;
}

}  // namespace anatomy
