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

#ifndef ANATOMY_KNN_HPP_
#define ANATOMY_KNN_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "anatomy/dataset.hpp"
#include "anatomy/feature_space.hpp"
#include "anatomy/kd_tree.hpp"
#include "anatomy/normalization.hpp"

namespace anatomy {

// Shape matrix of the quadratic metric over the feature attributes
// (quasi-identifiers + sensitive, schema order), applied after min-max
// normalization with `stats`.
struct DistanceSpec {
  enum class Shape { kIdentity, kDiagonal };

  Shape shape = Shape::kIdentity;
  std::vector<double> weights;  // kDiagonal: one per feature attribute, >= 0
  NormalizationStats stats;

  static DistanceSpec identity(NormalizationStats stats);
  static DistanceSpec diagonal(NormalizationStats stats, std::vector<double> weights);
};

// Axes for the feature attributes of `schema` under `distance`.
FeatureSpace make_feature_space(const Schema& schema, const DistanceSpec& distance);

enum class TiePolicy {
  kLowestRowId,   // distance ties and vote ties go to the lowest row id
  kSeededRandom,  // ties broken by a generator keyed on (seed, query key)
  kAllTies,       // every row tied with the k-th distance votes
};

enum class SearchMethod { kKdTree, kExhaustive };

struct KnnOptions {
  int k = 1;
  TiePolicy ties = TiePolicy::kLowestRowId;
  std::uint64_t seed = 0;
  SearchMethod search = SearchMethod::kKdTree;
};

struct Neighbor {
  RowId id{};
  double distance = 0;  // squared quadratic form
  std::uint8_t label = 0;

  bool operator==(const Neighbor&) const = default;
};

// Immutable k-NN classifier over an encoded training set.
class KnnModel {
 public:
  // Throws ValidationError when k < 1 or k exceeds the training size. Even k
  // is accepted with a warning on stderr.
  KnnModel(FeatureSpace space, PointSet points, std::vector<std::string> labels,
           KnnOptions options);

  // Encodes `train` with `distance` (exact values: original or anatomized).
  static KnnModel fit(const Dataset& train, const DistanceSpec& distance, KnnOptions options);

  const FeatureSpace& space() const { return *space_; }
  const PointSet& points() const { return *points_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const KnnOptions& options() const { return options_; }
  std::size_t size() const { return points_->size; }

  QueryEncoder encoder(const Schema& schema) const { return QueryEncoder(*space_, schema); }

  // Ordered by (distance, row id). Length k, except kAllTies which returns
  // every row tied with the k-th distance as well. `key` seeds tie breaking.
  std::vector<Neighbor> neighbors(const EncodedQuery& query, std::uint64_t key) const;
  std::vector<Neighbor> neighbors(const Instance& x, const Schema& schema) const;

  std::string classify(const EncodedQuery& query, std::uint64_t key) const;
  std::string classify(const Instance& x, const Schema& schema) const;

  // Label vote over a neighbor list (majority, ties per policy).
  std::string vote(const std::vector<Neighbor>& neighbors, std::uint64_t key) const;

 private:
  std::shared_ptr<const FeatureSpace> space_;
  std::shared_ptr<const PointSet> points_;
  std::shared_ptr<const KdTree> tree_;
  std::vector<std::string> labels_;
  KnnOptions options_;
};

// Misclassified fraction of `test` (keys are test row ids). Evaluated with
// `threads` workers (0 = hardware concurrency); the result does not depend
// on the thread count. Throws ValidationError on an empty test set.
double error_rate(const KnnModel& model, const Dataset& test, unsigned threads = 0);

// Per-row predictions in test order.
std::vector<std::string> predict(const KnnModel& model, const Dataset& test, unsigned threads = 0);

}  // namespace anatomy

#endif  // ANATOMY_KNN_HPP_
