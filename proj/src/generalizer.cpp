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

#include "anatomy/generalizer.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <unordered_map>

#include "anatomy/csv.hpp"
#include "anatomy/error.hpp"

namespace anatomy {

Hierarchy Hierarchy::categorical(std::string attribute, const nlohmann::json& tree) {
  Hierarchy h;
  h.attribute_ = std::move(attribute);
  h.kind_ = AttributeKind::kCategorical;
  std::set<std::string> labels;
  std::function<void(const nlohmann::json&, int, int)> visit = [&](const nlohmann::json& node,
                                                                    int parent, int depth) {
    if (!node.is_object() || !node.contains("value")) {
      throw DataError("hierarchy " + h.attribute_ + ": every node needs a \"value\"");
    }
    std::string label = node.at("value").get<std::string>();
    if (!labels.insert(label).second) {
      throw DataError("hierarchy " + h.attribute_ + ": duplicate node \"" + label + "\"");
    }
    int index = static_cast<int>(h.nodes_.size());
    h.nodes_.push_back({label, parent, depth});
    auto children = node.find("children");
    if (children == node.end() || children->empty()) {
      h.leaf_index_[label] = index;
      h.top_ = std::max(h.top_, depth);
      return;
    }
    for (const auto& child : *children) visit(child, index, depth + 1);
  };
  try {
    visit(tree, -1, 0);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("hierarchy " + h.attribute_ + ": " + e.what());
  }
  return h;
}

Hierarchy Hierarchy::numeric(std::string attribute, double lo, double hi,
                             std::vector<std::vector<double>> ladders) {
  Hierarchy h;
  h.attribute_ = std::move(attribute);
  h.kind_ = AttributeKind::kNumeric;
  if (!(lo <= hi)) throw DataError("hierarchy " + h.attribute_ + ": domain must satisfy lo <= hi");
  h.lo_ = lo;
  h.hi_ = hi;
  for (std::size_t i = 0; i < ladders.size(); ++i) {
    const auto& cuts = ladders[i];
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      if (!(cuts[c] > lo && cuts[c] < hi) || (c > 0 && !(cuts[c] > cuts[c - 1]))) {
        throw DataError("hierarchy " + h.attribute_ +
                        ": cuts must increase strictly inside the domain");
      }
    }
    if (i > 0 && !std::includes(ladders[i - 1].begin(), ladders[i - 1].end(), cuts.begin(),
                                cuts.end())) {
      throw DataError("hierarchy " + h.attribute_ + ": each ladder must coarsen the previous one");
    }
  }
  h.ladders_ = std::move(ladders);
  h.top_ = static_cast<int>(h.ladders_.size()) + 1;
  return h;
}

Hierarchy Hierarchy::from_json(const nlohmann::json& j) {
  try {
    std::string attribute = j.at("attribute").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "categorical") return categorical(attribute, j.at("tree"));
    if (kind == "numeric") {
      const auto& domain = j.at("domain");
      if (!domain.is_array() || domain.size() != 2) {
        throw DataError("hierarchy " + attribute + ": domain must be [lo, hi]");
      }
      auto ladders = j.value("ladders", std::vector<std::vector<double>>{});
      return numeric(attribute, domain[0].get<double>(), domain[1].get<double>(),
                     std::move(ladders));
    }
    throw DataError("hierarchy " + attribute + ": unknown kind \"" + kind + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("hierarchy: ") + e.what());
  }
}

nlohmann::json Hierarchy::to_json() const {
  if (kind_ == AttributeKind::kNumeric) {
    return {{"attribute", attribute_}, {"kind", "numeric"}, {"domain", {lo_, hi_}},
            {"ladders", ladders_}};
  }
  std::function<nlohmann::json(int)> emit = [&](int index) {
    nlohmann::json node = {{"value", nodes_[index].label}};
    nlohmann::json children = nlohmann::json::array();
    for (std::size_t c = 0; c < nodes_.size(); ++c) {
      if (nodes_[c].parent == index) children.push_back(emit(static_cast<int>(c)));
    }
    if (!children.empty()) node["children"] = children;
    return node;
  };
  return {{"attribute", attribute_}, {"kind", "categorical"}, {"tree", emit(0)}};
}

std::vector<std::string> Hierarchy::leaf_labels() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (leaf_index_.contains(nodes_[i].label) && leaf_index_.at(nodes_[i].label) == static_cast<int>(i)) {
      out.push_back(nodes_[i].label);
    }
  }
  return out;
}

int Hierarchy::leaf(const std::string& value) const {
  auto it = leaf_index_.find(value);
  return it == leaf_index_.end() ? -1 : it->second;
}

int Hierarchy::ancestor(int node, int steps) const {
  while (steps-- > 0 && nodes_[node].parent >= 0) node = nodes_[node].parent;
  return node;
}

bool Hierarchy::is_descendant(int leaf, int node) const {
  for (int at = leaf; at >= 0; at = nodes_[at].parent) {
    if (at == node) return true;
  }
  return false;
}

std::vector<int> Hierarchy::leaves_under(int node) const {
  std::vector<int> out;
  for (const auto& [label, index] : leaf_index_) {
    if (is_descendant(index, node)) out.push_back(index);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int Hierarchy::bin(double value, int level) const {
  if (level >= top_) return 0;
  const auto& cuts = ladders_.at(level - 1);
  return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

std::pair<double, double> Hierarchy::interval(double value, int level) const {
  if (level <= 0) return {value, value};
  if (level >= top_) return {lo_, hi_};
  const auto& cuts = ladders_.at(level - 1);
  std::size_t b = static_cast<std::size_t>(bin(value, level));
  return {b == 0 ? lo_ : cuts[b - 1], b == cuts.size() ? hi_ : cuts[b]};
}

HierarchySet::HierarchySet(std::vector<Hierarchy> hierarchies)
    : hierarchies_(std::move(hierarchies)) {
  std::set<std::string> seen;
  for (const auto& h : hierarchies_) {
    if (!seen.insert(h.attribute()).second) {
      throw DataError("duplicate hierarchy for " + h.attribute());
    }
  }
}

const Hierarchy* HierarchySet::find(const std::string& attribute) const {
  for (const auto& h : hierarchies_) {
    if (h.attribute() == attribute) return &h;
  }
  return nullptr;
}

const Hierarchy& HierarchySet::at(const std::string& attribute) const {
  const Hierarchy* h = find(attribute);
  if (!h) throw ValidationError("no generalization hierarchy for " + attribute);
  return *h;
}

HierarchySet hierarchies_from_json(const nlohmann::json& j) {
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    if (!j.contains("hierarchies")) throw DataError("hierarchies: missing \"hierarchies\"");
    list = &j.at("hierarchies");
  }
  std::vector<Hierarchy> out;
  for (const auto& item : *list) out.push_back(Hierarchy::from_json(item));
  return HierarchySet(std::move(out));
}

HierarchySet load_hierarchies(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open hierarchies " + path);
  try {
    return hierarchies_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("hierarchies " + path + ": " + e.what());
  }
}

std::string AnonymizedDataset::format(std::size_t quasi_slot, const GeneralizedValue& value) const {
  const auto& a = schema[schema.quasi_indices()[quasi_slot]];
  if (a.kind == AttributeKind::kCategorical) {
    return hierarchies->at(a.name).nodes()[value.node].label;
  }
  if (value.lo == value.hi) return format_cell(Cell{value.lo});
  return "[" + format_cell(Cell{value.lo}) + "," + format_cell(Cell{value.hi}) + "]";
}

namespace {

// codes[slot][level][row]: integer identity of each row's generalized value
using LevelCodes = std::vector<std::vector<std::vector<std::int32_t>>>;

struct ClassCount {
  std::size_t violating_classes = 0;
  std::size_t violating_rows = 0;
};

std::unordered_map<std::string, std::size_t> class_sizes(const LevelCodes& codes,
                                                         const std::vector<int>& levels,
                                                         std::size_t n) {
  std::unordered_map<std::string, std::size_t> sizes;
  std::string key(levels.size() * sizeof(std::int32_t), '\0');
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t a = 0; a < levels.size(); ++a) {
      std::int32_t c = codes[a][levels[a]][r];
      std::memcpy(key.data() + a * sizeof c, &c, sizeof c);
    }
    ++sizes[key];
  }
  return sizes;
}

ClassCount count_violations(const LevelCodes& codes, const std::vector<int>& levels,
                            std::size_t n, std::size_t k) {
  ClassCount out;
  for (const auto& [key, size] : class_sizes(codes, levels, n)) {
    if (size < k) {
      ++out.violating_classes;
      out.violating_rows += size;
    }
  }
  return out;
}

}  // namespace

AnonymizedDataset generalize(const Dataset& train, int k,
                             std::shared_ptr<const HierarchySet> hierarchies,
                             const GeneralizeOptions& options) {
  if (k < 2) throw ValidationError("generalize: k must be >= 2");
  if (static_cast<std::size_t>(k) > train.size()) {
    throw ValidationError("generalize: k = " + std::to_string(k) + " exceeds N = " +
                          std::to_string(train.size()));
  }
  if (!hierarchies) throw ValidationError("generalize: no hierarchies");
  const Schema& source = train.schema();
  const auto& quasi = source.quasi_indices();
  const std::size_t n = train.size();

  std::vector<const Hierarchy*> hs;
  LevelCodes codes(quasi.size());
  for (std::size_t a = 0; a < quasi.size(); ++a) {
    const auto& attr = source[quasi[a]];
    const Hierarchy& h = hierarchies->at(attr.name);
    if (h.kind() != attr.kind) throw ValidationError("hierarchy kind mismatch for " + attr.name);
    hs.push_back(&h);
    codes[a].assign(h.top_level() + 1, std::vector<std::int32_t>(n));
    if (attr.kind == AttributeKind::kCategorical) {
      for (std::size_t r = 0; r < n; ++r) {
        const auto& value = as_text(train.row(r).values[quasi[a]]);
        int leaf = h.leaf(value);
        if (leaf < 0) {
          throw DataError("value \"" + value + "\" of " + attr.name + " is not in its hierarchy");
        }
        for (int level = 0; level <= h.top_level(); ++level) {
          codes[a][level][r] = h.ancestor(leaf, level);
        }
      }
    } else {
      std::vector<double> values(n);
      for (std::size_t r = 0; r < n; ++r) {
        values[r] = as_number(train.row(r).values[quasi[a]]);
        if (values[r] < h.lo() || values[r] > h.hi()) {
          throw DataError("value " + format_cell(Cell{values[r]}) + " of " + attr.name +
                          " is outside its hierarchy domain");
        }
      }
      std::vector<double> distinct = values;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (std::size_t r = 0; r < n; ++r) {
        codes[a][0][r] = static_cast<std::int32_t>(
            std::lower_bound(distinct.begin(), distinct.end(), values[r]) - distinct.begin());
        for (int level = 1; level <= h.top_level(); ++level) {
          codes[a][level][r] = h.bin(values[r], level);
        }
      }
    }
  }

  const auto kk = static_cast<std::size_t>(k);
  std::vector<int> levels(quasi.size(), 0);
  ClassCount current = count_violations(codes, levels, n, kk);
  while (current.violating_rows > options.max_suppressed) {
    int best = -1;
    ClassCount best_count;
    for (std::size_t a = 0; a < levels.size(); ++a) {
      if (levels[a] >= hs[a]->top_level()) continue;
      ++levels[a];
      ClassCount c = count_violations(codes, levels, n, kk);
      --levels[a];
      if (best < 0 || c.violating_classes < best_count.violating_classes) {
        best = static_cast<int>(a);
        best_count = c;
      }
    }
    if (best < 0) break;  // everything at the top level
    ++levels[best];
    current = best_count;
  }

  AnonymizedDataset out;
  out.schema = source.without_excluded();
  out.hierarchies = std::move(hierarchies);
  out.levels = levels;
  out.k = k;
  const auto sizes = class_sizes(codes, levels, n);
  std::string key(levels.size() * sizeof(std::int32_t), '\0');
  for (std::size_t r = 0; r < n; ++r) {
    const Instance& x = train.row(r);
    for (std::size_t a = 0; a < levels.size(); ++a) {
      std::int32_t c = codes[a][levels[a]][r];
      std::memcpy(key.data() + a * sizeof c, &c, sizeof c);
    }
    if (sizes.at(key) < kk) {
      out.suppressed.push_back(x.id);
      continue;
    }
    AnonymizedDataset::Row row;
    row.id = x.id;
    for (std::size_t a = 0; a < levels.size(); ++a) {
      GeneralizedValue g;
      if (hs[a]->kind() == AttributeKind::kCategorical) {
        g.node = codes[a][levels[a]][r];
      } else {
        std::tie(g.lo, g.hi) = hs[a]->interval(as_number(x.values[quasi[a]]), levels[a]);
      }
      row.quasi.push_back(g);
    }
    row.sensitive = x.values[source.sensitive_index()];
    row.class_label = as_text(x.values[source.class_index()]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

KAnonymityReport verify_k_anonymity(const AnonymizedDataset& data) {
  std::map<std::string, std::size_t> sizes;
  for (const auto& row : data.rows) {
    std::string key;
    for (std::size_t a = 0; a < row.quasi.size(); ++a) {
      if (a) key += '|';
      key += data.format(a, row.quasi[a]);
    }
    ++sizes[key];
  }
  KAnonymityReport report;
  report.classes = sizes.size();
  for (const auto& [key, size] : sizes) {
    if (size < static_cast<std::size_t>(data.k)) {
      report.ok = false;
      report.violating.push_back({key, size});
    }
  }
  return report;
}

NormalizationStats fit_normalization(const AnonymizedDataset& data) {
  if (data.rows.empty()) throw ValidationError("fit_normalization: empty anonymized dataset");
  const Schema& schema = data.schema;
  std::vector<NormalizationStats::Entry> entries;
  const auto& quasi = schema.quasi_indices();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& a = schema[i];
    NormalizationStats::Entry e;
    e.name = a.name;
    e.kind = a.kind;
    auto slot = std::find(quasi.begin(), quasi.end(), i);
    if (slot != quasi.end()) {
      std::size_t q = static_cast<std::size_t>(slot - quasi.begin());
      if (a.kind == AttributeKind::kNumeric) {
        e.range = {data.rows[0].quasi[q].lo, data.rows[0].quasi[q].hi};
        for (const auto& row : data.rows) {
          e.range.min = std::min(e.range.min, row.quasi[q].lo);
          e.range.max = std::max(e.range.max, row.quasi[q].hi);
        }
      } else {
        e.categories = data.hierarchies->at(a.name).leaf_labels();
        std::sort(e.categories.begin(), e.categories.end());
      }
    } else if (i == schema.sensitive_index()) {
      if (a.kind == AttributeKind::kNumeric) {
        double v = as_number(data.rows[0].sensitive);
        e.range = {v, v};
        for (const auto& row : data.rows) {
          e.range.min = std::min(e.range.min, as_number(row.sensitive));
          e.range.max = std::max(e.range.max, as_number(row.sensitive));
        }
      } else {
        std::set<std::string> seen;
        for (const auto& row : data.rows) seen.insert(as_text(row.sensitive));
        e.categories.assign(seen.begin(), seen.end());
      }
    } else {
      std::set<std::string> seen;
      for (const auto& row : data.rows) seen.insert(row.class_label);
      e.categories.assign(seen.begin(), seen.end());
    }
    entries.push_back(std::move(e));
  }
  return NormalizationStats(std::move(entries));
}

namespace {

// Encodes generalized rows into a feature space over the schema's features.
class AnonymizedEncoding {
 public:
  AnonymizedEncoding(const AnonymizedDataset& data, const NormalizationStats& stats)
      : data_(&data) {
    const Schema& schema = data.schema;
    const auto& quasi = schema.quasi_indices();
    std::vector<Axis> axes;
    for (std::size_t f : schema.feature_indices()) {
      const auto& a = schema[f];
      Axis axis;
      axis.name = a.name;
      axis.kind = a.kind;
      auto slot = std::find(quasi.begin(), quasi.end(), f);
      bool is_quasi = slot != quasi.end();
      if (a.kind == AttributeKind::kNumeric) {
        axis.range = stats.at(a.name).range;
      } else if (is_quasi) {
        axis.leaves = data.hierarchies->at(a.name).leaf_labels();
      } else {
        axis.leaves = stats.at(a.name).categories;
      }
      axes.push_back(std::move(axis));
      slots_.push_back({is_quasi ? static_cast<int>(slot - quasi.begin()) : -1, a.kind});
    }
    space_ = FeatureSpace(std::move(axes));

    // hierarchy node index -> feature code, per categorical slot
    std::size_t cat = 0;
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      if (slots_[s].kind != AttributeKind::kCategorical) continue;
      node_code_.emplace_back();
      if (slots_[s].quasi >= 0) {
        const auto& name = schema[quasi[slots_[s].quasi]].name;
        const Hierarchy& h = data.hierarchies->at(name);
        auto& map = node_code_.back();
        map.assign(h.nodes().size(), -1);
        for (std::size_t node = 0; node < h.nodes().size(); ++node) {
          int leaf = h.leaf(h.nodes()[node].label);
          if (leaf == static_cast<int>(node)) {
            map[node] = space_.leaf_code(cat, h.nodes()[node].label);
          } else {
            std::vector<std::int32_t> covered;
            for (int l : h.leaves_under(static_cast<int>(node))) {
              covered.push_back(space_.leaf_code(cat, h.nodes()[l].label));
            }
            map[node] = space_.add_node(cat, covered);
          }
        }
      }
      ++cat;
    }
  }

  const FeatureSpace& space() const { return space_; }

  void encode(std::size_t r, std::vector<double>& numeric, std::vector<std::int32_t>& cat) const {
    const auto& row = data_->rows[r];
    std::size_t c = 0;
    std::size_t nslot = 0;
    for (const auto& slot : slots_) {
      if (slot.kind == AttributeKind::kNumeric) {
        const Axis& axis = space_.axes()[space_.numeric_axis(nslot++)];
        double v = slot.quasi >= 0 ? 0.5 * (row.quasi[slot.quasi].lo + row.quasi[slot.quasi].hi)
                                   : as_number(row.sensitive);
        numeric.push_back(normalize_value(axis.range, v));
      } else {
        if (slot.quasi >= 0) {
          cat.push_back(node_code_[c][row.quasi[slot.quasi].node]);
        } else {
          cat.push_back(space_.leaf_code(c, as_text(row.sensitive)));
        }
        ++c;
      }
    }
  }

 private:
  struct Slot {
    int quasi;  // quasi slot or -1 for the sensitive attribute
    AttributeKind kind;
  };
  const AnonymizedDataset* data_;
  std::vector<Slot> slots_;
  FeatureSpace space_;
  std::vector<std::vector<std::int32_t>> node_code_;
};

}  // namespace

KnnModel fit_anonymized(const AnonymizedDataset& data, const NormalizationStats& stats,
                        KnnOptions options) {
  AnonymizedEncoding encoding(data, stats);
  std::set<std::string> label_set;
  for (const auto& row : data.rows) label_set.insert(row.class_label);
  std::vector<std::string> labels(label_set.begin(), label_set.end());

  PointSet points;
  points.size = data.rows.size();
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    encoding.encode(r, points.numeric, points.categorical);
    auto it = std::lower_bound(labels.begin(), labels.end(), data.rows[r].class_label);
    points.label.push_back(static_cast<std::uint8_t>(it - labels.begin()));
    points.ids.push_back(data.rows[r].id);
  }
  return KnnModel(encoding.space(), std::move(points), std::move(labels), options);
}

double generalized_distance(const AnonymizedDataset& data, std::size_t row, const Instance& v,
                            const Schema& v_schema, const NormalizationStats& stats) {
  const Schema& schema = data.schema;
  for (std::size_t q : schema.quasi_indices()) {
    const auto& a = schema[q];
    const Hierarchy& h = data.hierarchies->at(a.name);
    const Cell& cell = v.values.at(v_schema.index_of(a.name));
    if (a.kind == AttributeKind::kCategorical) {
      if (h.leaf(as_text(cell)) < 0) {
        throw DataError("value \"" + as_text(cell) + "\" of " + a.name + " is not in its hierarchy");
      }
    } else if (as_number(cell) < h.lo() || as_number(cell) > h.hi()) {
      throw DataError("value " + format_cell(cell) + " of " + a.name +
                      " is outside its hierarchy domain");
    }
  }
  AnonymizedEncoding encoding(data, stats);
  std::vector<double> numeric;
  std::vector<std::int32_t> categorical;
  encoding.encode(row, numeric, categorical);
  EncodedQuery q = QueryEncoder(encoding.space(), v_schema).encode(v);
  return encoding.space().distance(numeric.data(), categorical.data(), q.numeric.data(),
                                   q.categorical.data());
}

void write_anonymized_csv(std::ostream& out, const AnonymizedDataset& data) {
  const Schema& schema = data.schema;
  csv::Record record;
  for (const auto& a : schema.attributes()) record.push_back(a.name);
  csv::write_record(out, record);
  const auto& quasi = schema.quasi_indices();
  for (const auto& row : data.rows) {
    record.assign(schema.size(), "");
    for (std::size_t a = 0; a < quasi.size(); ++a) record[quasi[a]] = data.format(a, row.quasi[a]);
    record[schema.sensitive_index()] = format_cell(row.sensitive);
    record[schema.class_index()] = row.class_label;
    csv::write_record(out, record);
  }
}

}  // namespace anatomy
