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

#ifndef ANATOMY_GENERALIZER_HPP_
#define ANATOMY_GENERALIZER_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "anatomy/dataset.hpp"
#include "anatomy/knn.hpp"
#include "anatomy/normalization.hpp"
#include "json.hpp"

namespace anatomy {

// Full-domain generalization ladder for one quasi-identifying attribute.
// Level 0 is the exact value and the top level is a single "any" value.
//
// Categorical: a rooted value tree; level L maps a leaf to its ancestor L
// steps up (clamped at the root), so the top level is the tree height.
// Numeric: a domain [lo, hi] and cut lists, finest first; each list must be
// a subset of the previous one. Level i (1..cuts) bins by the i-th list and
// the top level is the whole domain.
class Hierarchy {
 public:
  struct Node {
    std::string label;
    int parent = -1;
    int depth = 0;
  };

  static Hierarchy categorical(std::string attribute, const nlohmann::json& tree);
  static Hierarchy numeric(std::string attribute, double lo, double hi,
                           std::vector<std::vector<double>> ladders);
  static Hierarchy from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::string& attribute() const { return attribute_; }
  AttributeKind kind() const { return kind_; }
  int top_level() const { return top_; }

  // categorical
  const std::vector<Node>& nodes() const { return nodes_; }
  // Leaf labels in tree order.
  std::vector<std::string> leaf_labels() const;
  // Node index of the leaf for `value`, or -1.
  int leaf(const std::string& value) const;
  int ancestor(int node, int steps) const;
  bool is_descendant(int leaf, int node) const;
  // All leaf node indices under `node`.
  std::vector<int> leaves_under(int node) const;

  // numeric
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  // [lo, hi] of the bin holding `value` at `level` (level 0: [value, value]).
  std::pair<double, double> interval(double value, int level) const;
  // Integer bin code at `level` >= 1.
  int bin(double value, int level) const;

 private:
  std::string attribute_;
  AttributeKind kind_ = AttributeKind::kCategorical;
  int top_ = 0;
  std::vector<Node> nodes_;
  std::map<std::string, int> leaf_index_;
  double lo_ = 0, hi_ = 0;
  std::vector<std::vector<double>> ladders_;
};

class HierarchySet {
 public:
  HierarchySet() = default;
  explicit HierarchySet(std::vector<Hierarchy> hierarchies);

  const Hierarchy* find(const std::string& attribute) const;
  const Hierarchy& at(const std::string& attribute) const;
  const std::vector<Hierarchy>& all() const { return hierarchies_; }

 private:
  std::vector<Hierarchy> hierarchies_;
};

HierarchySet hierarchies_from_json(const nlohmann::json& j);
HierarchySet load_hierarchies(const std::string& path);

// A quasi-identifier value after generalization: an interval for numeric
// attributes ([v, v] when exact) or a hierarchy node for categorical ones.
struct GeneralizedValue {
  double lo = 0;
  double hi = 0;
  int node = -1;

  bool operator==(const GeneralizedValue&) const = default;
};

struct AnonymizedDataset {
  struct Row {
    RowId id{};
    std::vector<GeneralizedValue> quasi;  // schema quasi order
    Cell sensitive;
    std::string class_label;
  };

  Schema schema;  // source schema without excluded columns
  std::shared_ptr<const HierarchySet> hierarchies;
  std::vector<int> levels;  // per quasi attribute
  std::vector<Row> rows;
  std::vector<RowId> suppressed;
  int k = 0;

  // "[lo,hi]" for intervals, the bare number when exact, node label otherwise.
  std::string format(std::size_t quasi_slot, const GeneralizedValue& value) const;
};

struct GeneralizeOptions {
  // Stop ascending once at most this many rows sit in undersized classes;
  // those rows are suppressed.
  std::size_t max_suppressed = 0;
};

// Greedy full-domain ascent: while some equivalence class is smaller than
// k, promote by one level the attribute whose promotion leaves the fewest
// violating classes (ties: first attribute in schema order).
// Throws ValidationError for k < 2, k > N, or a quasi-identifier without a
// hierarchy, and DataError for values outside a hierarchy's domain.
AnonymizedDataset generalize(const Dataset& train, int k,
                             std::shared_ptr<const HierarchySet> hierarchies,
                             const GeneralizeOptions& options = {});

struct ViolatingClass {
  std::string key;
  std::size_t size = 0;
};

struct KAnonymityReport {
  bool ok = true;
  std::size_t classes = 0;
  std::vector<ViolatingClass> violating;
};

KAnonymityReport verify_k_anonymity(const AnonymizedDataset& data);

// Numeric quasi ranges span the published interval bounds; categorical
// quasi categories are the hierarchy leaves; the sensitive attribute is
// fitted on its exact values.
NormalizationStats fit_normalization(const AnonymizedDataset& data);

// Feature space and encoded points of an anonymized table: interval
// midpoints on numeric axes, hierarchy nodes on categorical axes.
KnnModel fit_anonymized(const AnonymizedDataset& data, const NormalizationStats& stats,
                        KnnOptions options);

// Squared distance between a generalized row and an exact instance `v` of
// `v_schema`. Throws DataError when a value of `v` lies outside a hierarchy.
double generalized_distance(const AnonymizedDataset& data, std::size_t row, const Instance& v,
                            const Schema& v_schema, const NormalizationStats& stats);

void write_anonymized_csv(std::ostream& out, const AnonymizedDataset& data);

}  // namespace anatomy

#endif  // ANATOMY_GENERALIZER_HPP_
