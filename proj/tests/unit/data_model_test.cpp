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
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "anatomy/adult.hpp"
#include "anatomy/csv.hpp"
#include "anatomy/dataset.hpp"
#include "anatomy/error.hpp"
#include "anatomy/normalization.hpp"
#include "anatomy/splits.hpp"
#include "test_util.hpp"

namespace anatomy {
namespace {

using namespace anatomy::testing;

LoadResult load_text(const std::string& text, MissingPolicy policy = MissingPolicy::kDropRow) {
  std::istringstream in(text);
  return load_csv(in, small_schema(), policy);
}

TEST(Csv, QuotedFieldsAndTrimming) {
  std::istringstream in("a, \"b,c\" ,d\n\n\"x\"\"y\",2,3\n");
  auto records = csv::read(in);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0], (csv::Record{"a", "b,c", "d"}));
  EXPECT_EQ(records[1], (csv::Record{"x\"y", "2", "3"}));
}

TEST(Csv, EscapeRoundTrip) {
  std::ostringstream out;
  csv::write_record(out, {"plain", "with,comma", "with\"quote"});
  std::istringstream in(out.str());
  EXPECT_EQ(csv::read(in)[0], (csv::Record{"plain", "with,comma", "with\"quote"}));
}

TEST(Schema, RequiresOneSensitiveAndOneClass) {
  EXPECT_THROW(Schema({attr("a", kNum, kQuasi), attr("c", kCat, kClass)}), DataError);
  EXPECT_THROW(Schema({attr("s", kCat, kSens), attr("t", kCat, kSens), attr("c", kCat, kClass)}),
               DataError);
  EXPECT_THROW(Schema({attr("s", kCat, kSens), attr("c", kNum, kClass)}), DataError);
  EXPECT_THROW(Schema({attr("s", kCat, kSens), attr("s", kCat, kClass)}), DataError);
  Schema ok({attr("s", kCat, kSens), attr("c", kCat, kClass)});
  EXPECT_EQ(ok.dimension(), 0u);
}

TEST(Schema, JsonRoundTrip) {
  Schema s = small_schema();
  EXPECT_EQ(schema_from_json(schema_to_json(s)), s);
  EXPECT_THROW(schema_from_json(nlohmann::json::parse(
                   R"({"attributes":[{"name":"a","kind":"text","role":"class"}]})")),
               DataError);
}

TEST(LoadCsv, ThreeRowsNoMissing) {
  auto r = load_text("A1,As,C\n1,x,+\n2,y,-\n3,x,+\n");
  EXPECT_EQ(r.data.size(), 3u);
  EXPECT_EQ(r.dropped, 0u);
  EXPECT_EQ(to_underlying(r.data.row(2).id), 2u);
}

TEST(LoadCsv, MissingCellDropped) {
  auto r = load_text("A1,As,C\n1,x,+\n?,y,-\n3,x,-\n");
  EXPECT_EQ(r.data.size(), 2u);
  EXPECT_EQ(r.dropped, 1u);
  auto empty = load_text("A1,As,C\n1,x,+\n2,,-\n3,x,-\n");
  EXPECT_EQ(empty.dropped, 1u);
}

TEST(LoadCsv, MissingCellRejectedUnderErrorPolicy) {
  EXPECT_THROW(load_text("A1,As,C\n1,x,+\n?,y,-\n", MissingPolicy::kError), DataError);
}

TEST(LoadCsv, HeaderInAnyOrder) {
  auto r = load_text("C,A1,As\n+,1,x\n-,2,y\n");
  EXPECT_EQ(as_number(r.data.row(1).values[0]), 2.0);
  EXPECT_EQ(as_text(r.data.row(1).values[1]), "y");
}

TEST(LoadCsv, Errors) {
  EXPECT_THROW(load_text("A1,As\n1,x\n"), DataError);
  EXPECT_THROW(load_text("A1,As,D\n1,x,+\n"), DataError);
  EXPECT_THROW(load_text("A1,As,C\nabc,x,+\n2,y,-\n"), DataError);
  EXPECT_THROW(load_text("A1,As,C\n1,x,+\n2,y,+\n"), DataError);  // one class label
  EXPECT_THROW(load_csv("/nonexistent/file.csv", small_schema(), MissingPolicy::kDropRow),
               DataError);
}

TEST(LoadCsv, SerializeReloadIsIdentity) {
  auto first = load_text("A1,As,C\n1.5,\"x,1\",+\n2,y,-\n1e3,x,+\n");
  std::ostringstream out;
  write_csv(out, first.data);
  std::istringstream in(out.str());
  auto second = load_csv(in, small_schema(), MissingPolicy::kError);
  EXPECT_EQ(second.data, first.data);
}

TEST(Dataset, RejectsDuplicateIdsAndBadCells) {
  EXPECT_THROW(Dataset(small_schema(), {row(1, 1, "x", "+"), row(1, 2, "y", "-")}),
               DataError);
  Instance bad{RowId{3}, {Cell{std::string("1")}, Cell{std::string("x")}, Cell{std::string("+")}}};
  EXPECT_THROW(Dataset(small_schema(), {bad}), DataError);
}

TEST(Adult, PreparationKeeps45222Rows) {
  std::ostringstream out;
  AdultPrepStats total;
  for (const char* name : {"adult.data", "adult.test"}) {
    std::ifstream raw(std::string(ANATOMY_DATA_DIR) + "/adult/" + name);
    ASSERT_TRUE(raw) << name;
    auto stats = prepare_adult(raw, out, total.read == 0);
    total.read += stats.read;
    total.kept += stats.kept;
  }
  EXPECT_EQ(total.read, 48842u);
  EXPECT_EQ(total.kept, 45222u);
  std::istringstream in(out.str());
  Schema schema = load_schema(std::string(ANATOMY_DATA_DIR) + "/adult/adult.schema.json");
  auto loaded = load_csv(in, schema, MissingPolicy::kError);
  EXPECT_EQ(loaded.data.size(), 45222u);
  EXPECT_EQ(loaded.data.class_labels(), (std::vector<std::string>{"<=50K", ">50K"}));
  EXPECT_EQ(schema.dimension(), 4u);
}

TEST(Normalization, NumericAndCategorical) {
  Dataset d(small_schema(), {row(0, 0, "a", "+"), row(1, 10, "b", "-"), row(2, 10, "a", "+")});
  auto stats = fit_normalization(d);
  EXPECT_EQ(stats.at("A1").range, (NumericRange{0, 10}));
  EXPECT_EQ(stats.at("As").categories, (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(stats.normalize("A1", 5), 0.5);
}

TEST(Normalization, ConstantColumnNormalizesToZero) {
  Dataset d(small_schema(), {row(0, 5, "a", "+"), row(1, 5, "b", "-")});
  auto stats = fit_normalization(d);
  EXPECT_EQ(stats.at("A1").range, (NumericRange{5, 5}));
  EXPECT_EQ(stats.normalize("A1", 5), 0.0);
  EXPECT_EQ(stats.normalize("A1", 7), 0.0);
}

TEST(Normalization, EmptyDatasetRejected) {
  EXPECT_THROW(fit_normalization(Dataset(small_schema(), {})), ValidationError);
}

Dataset labeled(std::size_t n, std::size_t positives) {
  std::vector<Instance> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(row(i, static_cast<double>(i), "x", i < positives ? "+" : "-"));
  }
  return Dataset(small_schema(), std::move(rows));
}

TEST(SplitFolds, OneRowPerFold) {
  auto folds = split_folds(labeled(10, 5), 10, 1);
  ASSERT_EQ(folds.size(), 10u);
  for (const auto& f : folds) {
    EXPECT_EQ(f.test.size(), 1u);
    EXPECT_EQ(f.train.size(), 9u);
  }
}

TEST(SplitFolds, AdultSizedFolds) {
  auto folds = split_folds(labeled(45222, 11208), 10, 7);
  for (const auto& f : folds) {
    EXPECT_TRUE(f.test.size() == 4522 || f.test.size() == 4523) << f.test.size();
  }
}

TEST(SplitFolds, DeterministicPerSeed) {
  auto d = labeled(57, 20);
  auto a = split_folds(d, 5, 3);
  auto b = split_folds(d, 5, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].test, b[i].test);
  auto c = split_folds(d, 5, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || !(a[i].test == c[i].test);
  EXPECT_TRUE(differs);
}

TEST(SplitFolds, OutOfRange) {
  EXPECT_THROW(split_folds(labeled(10, 5), 1, 0), ValidationError);
  EXPECT_THROW(split_folds(labeled(10, 5), 11, 0), ValidationError);
}

TEST(SplitFolds, DisjointExhaustiveStratifiedProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(2, 300)(rng);
    std::size_t pos = std::uniform_int_distribution<std::size_t>(0, n)(rng);
    int k = std::uniform_int_distribution<int>(2, static_cast<int>(std::min<std::size_t>(n, 12)))(rng);
    auto folds = split_folds(labeled(n, pos), k, trial);
    std::multiset<std::uint64_t> seen;
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;  // min, max
    for (const auto& f : folds) {
      EXPECT_EQ(f.train.size() + f.test.size(), n);
      std::map<std::string, std::size_t> counts;
      for (std::size_t i = 0; i < f.test.size(); ++i) {
        seen.insert(to_underlying(f.test.row(i).id));
        ++counts[f.test.class_of(i)];
      }
      for (const char* label : {"+", "-"}) {
        auto [it, fresh] = per_class.try_emplace(label, counts[label], counts[label]);
        it->second.first = std::min(it->second.first, counts[label]);
        it->second.second = std::max(it->second.second, counts[label]);
      }
      std::set<std::uint64_t> train_ids;
      for (const auto& x : f.train.rows()) train_ids.insert(to_underlying(x.id));
      for (const auto& x : f.test.rows()) EXPECT_FALSE(train_ids.contains(to_underlying(x.id)));
    }
    EXPECT_EQ(seen.size(), n);
    EXPECT_EQ(std::set<std::uint64_t>(seen.begin(), seen.end()).size(), n);
    for (const auto& [label, range] : per_class) EXPECT_LE(range.second - range.first, 1u);
  }
}

TEST(SplitPartitions, Sizes) {
  auto p100 = split_partitions(labeled(100, 50), 5, 1);
  for (const auto& p : p100) EXPECT_EQ(p.size(), 20u);
  auto p101 = split_partitions(labeled(101, 50), 5, 1);
  std::vector<std::size_t> sizes;
  for (const auto& p : p101) sizes.push_back(p.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{21, 20, 20, 20, 20}));
}

TEST(SplitPartitions, DeterministicDisjointExhaustive) {
  auto d = labeled(73, 30);
  auto a = split_partitions(d, 4, 9);
  EXPECT_EQ(a, split_partitions(d, 4, 9));
  std::set<std::uint64_t> ids;
  std::size_t total = 0;
  for (const auto& p : a) {
    total += p.size();
    for (const auto& x : p.rows()) ids.insert(to_underlying(x.id));
  }
  EXPECT_EQ(total, 73u);
  EXPECT_EQ(ids.size(), 73u);
  EXPECT_THROW(split_partitions(d, 1, 0), ValidationError);
}

}  // namespace
}  // namespace anatomy
