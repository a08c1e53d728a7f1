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

#include "anatomy/knn.hpp"

#include <algorithm>
#include <iostream>
#include <random>
#include <thread>

#include "anatomy/error.hpp"
#include "anatomy/rng.hpp"

namespace anatomy {

DistanceSpec DistanceSpec::identity(NormalizationStats stats) {
  return DistanceSpec{Shape::kIdentity, {}, std::move(stats)};
}

DistanceSpec DistanceSpec::diagonal(NormalizationStats stats, std::vector<double> weights) {
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("distance: diagonal weights must be >= 0");
  }
  return DistanceSpec{Shape::kDiagonal, std::move(weights), std::move(stats)};
}

FeatureSpace make_feature_space(const Schema& schema, const DistanceSpec& distance) {
  const auto& features = schema.feature_indices();
  if (distance.shape == DistanceSpec::Shape::kDiagonal &&
      distance.weights.size() != features.size()) {
    throw ValidationError("distance: " + std::to_string(distance.weights.size()) +
                          " weights for " + std::to_string(features.size()) + " features");
  }
  std::vector<Axis> axes;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const auto& a = schema[features[f]];
    const auto& entry = distance.stats.at(a.name);
    if (entry.kind != a.kind) throw ValidationError("distance: kind mismatch for " + a.name);
    Axis axis;
    axis.name = a.name;
    axis.kind = a.kind;
    axis.weight = distance.shape == DistanceSpec::Shape::kDiagonal ? distance.weights[f] : 1.0;
    axis.range = entry.range;
    axis.leaves = entry.categories;
    axes.push_back(std::move(axis));
  }
  return FeatureSpace(std::move(axes));
}

KnnModel::KnnModel(FeatureSpace space, PointSet points, std::vector<std::string> labels,
                   KnnOptions options)
    : space_(std::make_shared<const FeatureSpace>(std::move(space))),
      points_(std::make_shared<const PointSet>(std::move(points))),
      labels_(std::move(labels)),
      options_(options) {
  if (options_.k < 1) throw ValidationError("knn: k must be >= 1");
  if (static_cast<std::size_t>(options_.k) > points_->size) {
    throw ValidationError("knn: k = " + std::to_string(options_.k) + " exceeds training size " +
                          std::to_string(points_->size));
  }
  if (labels_.empty() || labels_.size() > 255) throw ValidationError("knn: bad label set");
  if (options_.k > 1 && options_.k % 2 == 0) {
    std::cerr << "warning: even k = " << options_.k << " can produce vote ties\n";
  }
  if (options_.search == SearchMethod::kKdTree) {
    tree_ = std::make_shared<const KdTree>(*space_, *points_);
  }
}

KnnModel KnnModel::fit(const Dataset& train, const DistanceSpec& distance, KnnOptions options) {
  FeatureSpace space = make_feature_space(train.schema(), distance);
  QueryEncoder encoder(space, train.schema());
  std::vector<std::string> labels = train.class_labels();

  PointSet points;
  points.size = train.size();
  points.numeric.reserve(train.size() * space.numeric_count());
  points.categorical.reserve(train.size() * space.categorical_count());
  for (std::size_t i = 0; i < train.size(); ++i) {
    EncodedQuery e = encoder.encode(train.row(i));
    points.numeric.insert(points.numeric.end(), e.numeric.begin(), e.numeric.end());
    points.categorical.insert(points.categorical.end(), e.categorical.begin(),
                              e.categorical.end());
    auto label = std::lower_bound(labels.begin(), labels.end(), train.class_of(i));
    points.label.push_back(static_cast<std::uint8_t>(label - labels.begin()));
    points.ids.push_back(train.row(i).id);
  }
  return KnnModel(std::move(space), std::move(points), std::move(labels), options);
}

std::vector<Neighbor> KnnModel::neighbors(const EncodedQuery& query, std::uint64_t key) const {
  if (query.numeric.size() != space_->numeric_count() ||
      query.categorical.size() != space_->categorical_count()) {
    throw ValidationError("knn: query does not match the feature space");
  }
  const auto k = static_cast<std::size_t>(options_.k);
  std::vector<Candidate> found = tree_ ? tree_->within_kth(query, k)
                                       : within_kth_exhaustive(*space_, *points_, query, k);
  const PointSet& pts = *points_;
  auto by_distance_then_id = [&](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return pts.ids[a.index] < pts.ids[b.index];
  };
  std::sort(found.begin(), found.end(), by_distance_then_id);

  if (options_.ties == TiePolicy::kSeededRandom && found.size() > k) {
    double kth = found[k - 1].distance;
    auto tie_begin = std::find_if(found.begin(), found.end(),
                                  [kth](const Candidate& c) { return c.distance == kth; });
    std::mt19937_64 rng(derive_seed(options_.seed, key));
    std::shuffle(tie_begin, found.end(), rng);
    found.resize(k);
    std::sort(found.begin(), found.end(), by_distance_then_id);
  } else if (options_.ties != TiePolicy::kAllTies && found.size() > k) {
    found.resize(k);
  }

  std::vector<Neighbor> out;
  out.reserve(found.size());
  for (const auto& c : found) out.push_back({pts.ids[c.index], c.distance, pts.label[c.index]});
  return out;
}

std::vector<Neighbor> KnnModel::neighbors(const Instance& x, const Schema& schema) const {
  return neighbors(encoder(schema).encode(x), to_underlying(x.id));
}

std::string KnnModel::vote(const std::vector<Neighbor>& neighbors, std::uint64_t key) const {
  if (neighbors.empty()) throw ValidationError("knn: no neighbors to vote");
  std::vector<std::size_t> counts(labels_.size(), 0);
  for (const auto& n : neighbors) ++counts[n.label];
  std::size_t top = *std::max_element(counts.begin(), counts.end());
  std::vector<std::size_t> leaders;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == top) leaders.push_back(c);
  }
  if (leaders.size() == 1) return labels_[leaders.front()];
  if (options_.ties == TiePolicy::kSeededRandom) {
    std::mt19937_64 rng(derive_seed(options_.seed ^ 0x5bd1e995ULL, key));
    std::uniform_int_distribution<std::size_t> pick(0, leaders.size() - 1);
    return labels_[leaders[pick(rng)]];
  }
  // nearest (then lowest id) neighbor among the tied labels
  for (const auto& n : neighbors) {
    if (counts[n.label] == top) return labels_[n.label];
  }
  return labels_[leaders.front()];
}

std::string KnnModel::classify(const EncodedQuery& query, std::uint64_t key) const {
  return vote(neighbors(query, key), key);
}

std::string KnnModel::classify(const Instance& x, const Schema& schema) const {
  return classify(encoder(schema).encode(x), to_underlying(x.id));
}

std::vector<std::string> predict(const KnnModel& model, const Dataset& test, unsigned threads) {
  QueryEncoder encoder = model.encoder(test.schema());
  std::vector<std::string> out(test.size());
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(test.size(), 1)));
  auto work = [&](unsigned t) {
    for (std::size_t i = t; i < test.size(); i += threads) {
      const Instance& x = test.row(i);
      out[i] = model.classify(encoder.encode(x), to_underlying(x.id));
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  return out;
}

double error_rate(const KnnModel& model, const Dataset& test, unsigned threads) {
  if (test.empty()) throw ValidationError("error_rate: empty test set");
  auto predictions = predict(model, test, threads);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i) wrong += predictions[i] != test.class_of(i);
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

}  // namespace anatomy
