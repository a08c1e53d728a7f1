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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "anatomy/error.hpp"
#include "anatomy/knn.hpp"
#include "anatomy/normalization.hpp"
#include "test_util.hpp"

namespace anatomy {
namespace {

using namespace anatomy::testing;

// Stats that leave A1 unscaled.
NormalizationStats unit_stats() {
  return NormalizationStats({{"A1", kNum, {0, 1}, {}}, {"As", kCat, {}, {"x", "y"}}});
}

Dataset line(std::vector<std::pair<double, std::string>> points) {
  std::vector<Instance> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    rows.push_back(row(i, points[i].first, "x", points[i].second));
  }
  return Dataset(small_schema(), std::move(rows));
}

KnnOptions with_k(int k) {
  KnnOptions o;
  o.k = k;
  return o;
}

TEST(Neighbors, OneAxisExample) {
  auto train = line({{0, "+"}, {1, "-"}, {2, "+"}});
  auto model = KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(1));
  auto nn = model.neighbors(row(9, 0.1, "x", "+"), train.schema());
  ASSERT_EQ(nn.size(), 1u);
  EXPECT_EQ(to_underlying(nn[0].id), 0u);
  EXPECT_NEAR(nn[0].distance, 0.01, 1e-15);
}

TEST(Neighbors, QueryEqualToTrainingRow) {
  auto train = line({{0, "+"}, {1, "-"}, {2, "+"}});
  auto model = KnnModel::fit(train, DistanceSpec::identity(fit_normalization(train)), with_k(1));
  auto nn = model.neighbors(train.row(1), train.schema());
  EXPECT_EQ(to_underlying(nn[0].id), 1u);
  EXPECT_EQ(nn[0].distance, 0.0);
}

TEST(Neighbors, KEqualsNReturnsAllSorted) {
  auto train = line({{3, "+"}, {0, "-"}, {2, "+"}, {1, "-"}});
  auto model = KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(4));
  auto nn = model.neighbors(row(9, 0, "x", "+"), train.schema());
  ASSERT_EQ(nn.size(), 4u);
  std::vector<std::uint64_t> order;
  for (const auto& n : nn) order.push_back(to_underlying(n.id));
  EXPECT_EQ(order, (std::vector<std::uint64_t>{1, 3, 2, 0}));
}

TEST(Neighbors, InvalidK) {
  auto train = line({{0, "+"}, {1, "-"}});
  EXPECT_THROW(KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(0)),
               ValidationError);
  EXPECT_THROW(KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(3)),
               ValidationError);
  EXPECT_NO_THROW(KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(2)));
}

TEST(Neighbors, SchemaMismatch) {
  auto train = line({{0, "+"}, {1, "-"}});
  auto model = KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(1));
  Schema other({attr("B", kNum, kQuasi), attr("As", kCat, kSens), attr("C", kCat, kClass)});
  EXPECT_THROW(model.neighbors(row(0, 1, "x", "+"), other), ValidationError);
}

TEST(Classify, MajorityVote) {
  auto train = line({{0, "+"}, {0.1, "+"}, {0.2, "-"}, {5, "-"}, {6, "-"}});
  auto k1 = KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(1));
  EXPECT_EQ(k1.classify(row(9, 0.19, "x", "+"), train.schema()), "-");
  auto k3 = KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(3));
  EXPECT_EQ(k3.classify(row(9, 0.19, "x", "+"), train.schema()), "+");
}

TEST(ErrorRate, PerfectAndConstant) {
  auto train = line({{0, "+"}, {10, "-"}});
  auto model = KnnModel::fit(train, DistanceSpec::identity(unit_stats()), with_k(1));
  EXPECT_EQ(error_rate(model, line({{1, "+"}, {9, "-"}})), 0.0);
  auto constant = KnnModel::fit(line({{0, "+"}, {0.1, "+"}, {100, "-"}}),
                                DistanceSpec::identity(unit_stats()), with_k(1));
  EXPECT_EQ(error_rate(constant, line({{0, "+"}, {1, "-"}, {2, "+"}, {3, "-"}})), 0.5);
  EXPECT_THROW(error_rate(model, Dataset(small_schema(), {})), ValidationError);
}

TEST(ErrorRate, IndependentOfThreadCount) {
  std::mt19937_64 rng(4);
  auto train = random_dataset(rng, 300, 3, 4);
  auto test = random_dataset(rng, 200, 3, 4);
  auto model = KnnModel::fit(train, DistanceSpec::identity(fit_normalization(train)), with_k(3));
  auto one = predict(model, test, 1);
  EXPECT_EQ(predict(model, test, 4), one);
  EXPECT_EQ(predict(model, test, 7), one);
}

double raw_distance(const Instance& a, const Instance& b, const NormalizationStats& stats,
                    const Schema& schema) {
  double d = 0;
  for (std::size_t f : schema.feature_indices()) {
    const auto& at = schema[f];
    if (at.kind == kNum) {
      double z = stats.normalize(at.name, as_number(a.values[f])) -
                 stats.normalize(at.name, as_number(b.values[f]));
      d += z * z;
    } else {
      d += as_text(a.values[f]) == as_text(b.values[f]) ? 0.0 : 1.0;
    }
  }
  return d;
}

TEST(Distance, MetricAxioms) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  Schema schema({attr("a", kNum, kQuasi), attr("b", kNum, kQuasi), attr("s", kCat, kSens),
                 attr("c", kCat, kClass)});
  std::vector<Instance> rows;
  for (std::uint64_t i = 0; i < 60; ++i) {
    rows.push_back({RowId{i}, {Cell{u(rng)}, Cell{u(rng) * 10}, Cell{std::string(u(rng) < 0.5 ? "p" : "q")},
                               Cell{std::string(i % 2 ? "+" : "-")}}});
  }
  Dataset d(schema, rows);
  auto model = KnnModel::fit(d, DistanceSpec::identity(fit_normalization(d)), with_k(60));
  for (const auto& x : d.rows()) {
    std::map<std::uint64_t, double> dist;
    for (const auto& n : model.neighbors(x, schema)) dist[to_underlying(n.id)] = n.distance;
    EXPECT_EQ(dist[to_underlying(x.id)], 0.0);
    for (const auto& y : d.rows()) {
      auto from_y = model.neighbors(y, schema);
      for (const auto& n : from_y) {
        if (n.id == x.id) EXPECT_DOUBLE_EQ(n.distance, dist[to_underlying(y.id)]);
      }
      break;  // symmetry against one partner per row keeps this fast
    }
  }
  // triangle inequality on the root of the identity form
  auto stats = fit_normalization(d);
  for (int t = 0; t < 500; ++t) {
    const auto& a = d.row(rng() % 60);
    const auto& b = d.row(rng() % 60);
    const auto& c = d.row(rng() % 60);
    double ab = std::sqrt(raw_distance(a, b, stats, schema));
    double bc = std::sqrt(raw_distance(b, c, stats, schema));
    double ac = std::sqrt(raw_distance(a, c, stats, schema));
    EXPECT_LE(ac, ab + bc + 1e-12);
  }
}

TEST(Neighbors, SortedAndOrderInvariant) {
  std::mt19937_64 rng(12);
  auto d = random_dataset(rng, 150, 2, 3);
  std::vector<Instance> shuffled(d.rows().begin(), d.rows().end());
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  Dataset e(d.schema(), shuffled);
  auto stats = fit_normalization(d);
  auto a = KnnModel::fit(d, DistanceSpec::identity(stats), with_k(5));
  auto b = KnnModel::fit(e, DistanceSpec::identity(stats), with_k(5));
  auto queries = random_dataset(rng, 80, 2, 3);
  for (const auto& q : queries.rows()) {
    auto na = a.neighbors(q, d.schema());
    for (std::size_t i = 1; i < na.size(); ++i) EXPECT_LE(na[i - 1].distance, na[i].distance);
    EXPECT_EQ(na, b.neighbors(q, d.schema()));
    EXPECT_EQ(a.classify(q, d.schema()), b.classify(q, d.schema()));
  }
}

TEST(Neighbors, DiagonalScalingKeepsOrdering) {
  std::mt19937_64 rng(13);
  auto d = random_dataset(rng, 120, 3, 4, 50);
  auto stats = fit_normalization(d);
  auto base = KnnModel::fit(d, DistanceSpec::diagonal(stats, {1, 2, 0.5, 3}), with_k(3));
  auto scaled = KnnModel::fit(d, DistanceSpec::diagonal(stats, {4, 8, 2, 12}), with_k(3));
  auto queries = random_dataset(rng, 60, 3, 4, 50);
  for (const auto& q : queries.rows()) {
    auto na = base.neighbors(q, d.schema());
    auto nb = scaled.neighbors(q, d.schema());
    ASSERT_EQ(na.size(), nb.size());
    for (std::size_t i = 0; i < na.size(); ++i) EXPECT_EQ(na[i].id, nb[i].id);
    EXPECT_EQ(base.classify(q, d.schema()), scaled.classify(q, d.schema()));
  }
  EXPECT_THROW(KnnModel::fit(d, DistanceSpec::diagonal(stats, {1, 2}), with_k(1)), ValidationError);
  EXPECT_THROW(DistanceSpec::diagonal(stats, {1, 2, -1, 1}), ValidationError);
}

// Exhaustive reference written independently of the library's scan.
std::vector<std::pair<double, std::uint64_t>> brute_force(const Dataset& train,
                                                          const NormalizationStats& stats,
                                                          const Instance& q) {
  std::vector<std::pair<double, std::uint64_t>> all;
  for (const auto& x : train.rows()) {
    all.emplace_back(raw_distance(x, q, stats, train.schema()), to_underlying(x.id));
  }
  std::sort(all.begin(), all.end());
  return all;
}

TEST(Neighbors, IndexMatchesBruteForce) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
    int k = std::uniform_int_distribution<int>(1, static_cast<int>(std::min<std::size_t>(n, 9)))(rng);
    auto d = random_dataset(rng, n, 1 + trial % 4, 3);
    auto stats = fit_normalization(d);
    auto queries = random_dataset(rng, 30, 1 + trial % 4, 3);
    for (TiePolicy ties : {TiePolicy::kLowestRowId, TiePolicy::kAllTies, TiePolicy::kSeededRandom}) {
      KnnOptions o = with_k(k);
      o.ties = ties;
      o.seed = trial;
      auto model = KnnModel::fit(d, DistanceSpec::identity(stats), o);
      o.search = SearchMethod::kExhaustive;
      auto scan = KnnModel::fit(d, DistanceSpec::identity(stats), o);
      for (const auto& q : queries.rows()) {
        auto got = model.neighbors(q, d.schema());
        EXPECT_EQ(got, scan.neighbors(q, d.schema()));
        auto ref = brute_force(d, stats, q);
        double kth = ref[k - 1].first;
        std::set<std::uint64_t> tied_or_closer;
        for (const auto& [dist, id] : ref) {
          if (dist <= kth) tied_or_closer.insert(id);
        }
        if (ties == TiePolicy::kLowestRowId) {
          ASSERT_EQ(got.size(), static_cast<std::size_t>(k));
          for (int i = 0; i < k; ++i) EXPECT_EQ(to_underlying(got[i].id), ref[i].second);
        } else if (ties == TiePolicy::kAllTies) {
          std::set<std::uint64_t> ids;
          for (const auto& g : got) ids.insert(to_underlying(g.id));
          EXPECT_EQ(ids, tied_or_closer);
        } else {
          ASSERT_EQ(got.size(), static_cast<std::size_t>(k));
          for (const auto& g : got) EXPECT_TRUE(tied_or_closer.contains(to_underlying(g.id)));
        }
      }
    }
  }
}

TEST(Classify, SeededRandomIsDeterministic) {
  std::mt19937_64 rng(19);
  auto d = random_dataset(rng, 100, 1, 2, 3);
  KnnOptions o = with_k(3);
  o.ties = TiePolicy::kSeededRandom;
  o.seed = 5;
  auto stats = fit_normalization(d);
  auto a = KnnModel::fit(d, DistanceSpec::identity(stats), o);
  auto b = KnnModel::fit(d, DistanceSpec::identity(stats), o);
  auto queries = random_dataset(rng, 50, 1, 2, 3);
  EXPECT_EQ(predict(a, queries, 1), predict(b, queries, 3));
}

}  // namespace
}  // namespace anatomy
