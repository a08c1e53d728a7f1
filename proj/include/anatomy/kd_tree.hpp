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

#ifndef ANATOMY_KD_TREE_HPP_
#define ANATOMY_KD_TREE_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "anatomy/feature_space.hpp"

namespace anatomy {

// A point index and its squared distance to a query.
struct Candidate {
  double distance = 0;
  std::uint32_t index = 0;
};

// Every point whose distance is <= the k-th smallest distance, in no
// particular order. Both search routes return exactly this set.
std::vector<Candidate> within_kth_exhaustive(const FeatureSpace& space, const PointSet& points,
                                             const EncodedQuery& query, std::size_t k);

// k-d tree over a mixed numeric/categorical point set. Nodes carry numeric
// bounding boxes and the union of covered leaves per categorical slot, which
// gives a lower bound on the distance to anything inside.
class KdTree {
 public:
  KdTree() = default;
  KdTree(const FeatureSpace& space, const PointSet& points, std::size_t leaf_size = 16);

  std::vector<Candidate> within_kth(const EncodedQuery& query, std::size_t k) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  double lower_bound(std::size_t node, const EncodedQuery& query) const;

  const FeatureSpace* space_ = nullptr;
  const PointSet* points_ = nullptr;
  std::size_t leaf_size_ = 16;
  std::size_t words_per_node_ = 0;
  std::vector<std::size_t> word_offset_;  // per categorical slot
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> box_;               // node * numeric * {min, max}
  std::vector<std::uint64_t> coverage_;   // node * words_per_node_
};

}  // namespace anatomy

#endif  // ANATOMY_KD_TREE_HPP_
