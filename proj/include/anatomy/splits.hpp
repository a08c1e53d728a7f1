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

#ifndef ANATOMY_SPLITS_HPP_
#define ANATOMY_SPLITS_HPP_

#include <cstdint>
#include <vector>

#include "anatomy/dataset.hpp"

namespace anatomy {

struct Fold {
  Dataset train;
  Dataset test;
};

// Class-stratified k-fold split. Rows of each class are shuffled with `seed`
// and dealt round-robin, continuing the deal across classes, so fold sizes
// differ by at most one both overall and per class. Rows keep their original
// relative order inside each train/test set.
std::vector<Fold> split_folds(const Dataset& data, int folds, std::uint64_t seed);

// Seeded shuffle cut into `parts` contiguous chunks; the first N mod parts
// chunks get one extra row. Chunk rows appear in shuffled order, so
// concatenating chunks yields prefixes of one shuffle.
std::vector<Dataset> split_partitions(const Dataset& data, int parts, std::uint64_t seed);

}  // namespace anatomy

#endif  // ANATOMY_SPLITS_HPP_
