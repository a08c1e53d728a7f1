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

#include "anatomy/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "anatomy/anatomizer.hpp"
#include "anatomy/csv.hpp"
#include "anatomy/error.hpp"
#include "anatomy/normalization.hpp"
#include "anatomy/rng.hpp"
#include "anatomy/splits.hpp"
#include "anatomy/stats.hpp"

namespace anatomy {

using nlohmann::json;

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::kCv:
      return "cv";
    case Protocol::kConvergence:
      return "convergence";
    case Protocol::kBoundsSim:
      return "bounds_sim";
  }
  return "?";
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kOriginal:
      return "original";
    case Variant::kAnatomized:
      return "anatomized";
    case Variant::kAnonymized:
      return "anonymized";
  }
  return "?";
}

Protocol protocol_from_string(std::string_view text) {
  if (text == "cv") return Protocol::kCv;
  if (text == "convergence") return Protocol::kConvergence;
  if (text == "bounds_sim" || text == "bounds-sim") return Protocol::kBoundsSim;
  throw ValidationError("unknown protocol \"" + std::string(text) + "\"");
}

Variant variant_from_string(std::string_view text) {
  if (text == "original") return Variant::kOriginal;
  if (text == "anatomized") return Variant::kAnatomized;
  if (text == "anonymized") return Variant::kAnonymized;
  throw ValidationError("unknown variant \"" + std::string(text) + "\"");
}

std::string_view to_string(TiePolicy ties) {
  switch (ties) {
    case TiePolicy::kLowestRowId:
      return "lowest_row_id";
    case TiePolicy::kSeededRandom:
      return "seeded_random";
    case TiePolicy::kAllTies:
      return "all_ties";
  }
  return "?";
}

TiePolicy tie_policy_from_string(std::string_view text) {
  if (text == "lowest_row_id") return TiePolicy::kLowestRowId;
  if (text == "seeded_random") return TiePolicy::kSeededRandom;
  if (text == "all_ties") return TiePolicy::kAllTies;
  throw ValidationError("unknown tie policy \"" + std::string(text) + "\"");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("config: " + what); };
  if (variants.empty()) fail("no classifier variant enabled");
  if (k_values.empty()) fail("no k value");
  for (int k : k_values) {
    if (k < 1) fail("k must be >= 1");
  }
  const bool anatomized =
      std::find(variants.begin(), variants.end(), Variant::kAnatomized) != variants.end();
  const bool anonymized =
      std::find(variants.begin(), variants.end(), Variant::kAnonymized) != variants.end();
  if (protocol == Protocol::kBoundsSim) {
    if (l_values.empty()) fail("no l value");
    for (int l : l_values) {
      if (l < 1) fail("l must be >= 1");
      if (l > sensitive_values) fail("l exceeds the number of sensitive values");
    }
    for (int k : k_values) {
      if (k % 2 == 0) fail("bounds simulation needs odd k");
    }
    if (n_train < 1000) fail("n_train must be >= 1000");
    if (n_test < 1) fail("n_test must be >= 1");
    if (!(separation >= 0)) fail("separation must be >= 0");
    if (sensitive_values < 1) fail("sensitive_values must be >= 1");
    if (!(tolerance >= 0)) fail("tolerance must be >= 0");
    return;
  }
  if (anatomized) {
    if (l_values.empty()) fail("anatomized variant needs l values");
    for (int l : l_values) {
      if (l < 2) fail("l must be >= 2");
    }
  }
  if (anonymized) {
    if (protocol == Protocol::kConvergence) fail("convergence does not run the anonymized variant");
    if (anonymity_k_values.empty()) fail("anonymized variant needs anonymity_k values");
    for (int k : anonymity_k_values) {
      if (k < 2) fail("anonymity_k must be >= 2");
    }
  }
  if (!(max_suppressed >= 0 && max_suppressed <= 1)) fail("max_suppressed must be in [0, 1]");
  if (protocol == Protocol::kCv && folds < 2) fail("folds must be >= 2");
  if (protocol == Protocol::kConvergence && partitions < 2) fail("partitions must be >= 2");
}

json config_to_json(const ExperimentConfig& c) {
  json variants = json::array();
  for (Variant v : c.variants) variants.push_back(std::string(to_string(v)));
  return {{"data", c.data_path},
          {"schema", c.schema_path},
          {"hierarchies", c.hierarchies_path},
          {"protocol", std::string(to_string(c.protocol))},
          {"variants", variants},
          {"k", c.k_values},
          {"l", c.l_values},
          {"anonymity_k", c.anonymity_k_values},
          {"folds", c.folds},
          {"partitions", c.partitions},
          {"seed", c.seed},
          {"out", c.output_dir},
          {"ties", std::string(to_string(c.ties))},
          {"threads", c.threads},
          {"max_suppressed", c.max_suppressed},
          {"fit_both", c.fit_both},
          {"n_train", c.n_train},
          {"n_test", c.n_test},
          {"separation", c.separation},
          {"sensitive_values", c.sensitive_values},
          {"tolerance", c.tolerance}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "data") {
        c.data_path = value.get<std::string>();
      } else if (key == "schema") {
        c.schema_path = value.get<std::string>();
      } else if (key == "hierarchies") {
        c.hierarchies_path = value.get<std::string>();
      } else if (key == "protocol") {
        c.protocol = protocol_from_string(value.get<std::string>());
      } else if (key == "variants") {
        c.variants.clear();
        for (const auto& v : value) c.variants.push_back(variant_from_string(v.get<std::string>()));
      } else if (key == "k") {
        c.k_values = value.get<std::vector<int>>();
      } else if (key == "l") {
        c.l_values = value.get<std::vector<int>>();
      } else if (key == "anonymity_k") {
        c.anonymity_k_values = value.get<std::vector<int>>();
      } else if (key == "folds") {
        c.folds = value.get<int>();
      } else if (key == "partitions") {
        c.partitions = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "out") {
        c.output_dir = value.get<std::string>();
      } else if (key == "ties") {
        c.ties = tie_policy_from_string(value.get<std::string>());
      } else if (key == "threads") {
        c.threads = value.get<unsigned>();
      } else if (key == "max_suppressed") {
        c.max_suppressed = value.get<double>();
      } else if (key == "fit_both") {
        c.fit_both = value.get<bool>();
      } else if (key == "n_train") {
        c.n_train = value.get<std::size_t>();
      } else if (key == "n_test") {
        c.n_test = value.get<std::size_t>();
      } else if (key == "separation") {
        c.separation = value.get<double>();
      } else if (key == "sensitive_values") {
        c.sensitive_values = value.get<int>();
      } else if (key == "tolerance") {
        c.tolerance = value.get<double>();
      } else {
        throw ValidationError("config: unknown key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

const std::vector<double>& confidence_levels() {
  static const std::vector<double> levels = {0.8, 0.9, 0.95, 0.98, 0.99};
  return levels;
}

std::string SeriesResult::parameter() const {
  std::string out = "k=" + std::to_string(k);
  if (l > 0) out += ",l=" + std::to_string(l);
  if (anonymity_k > 0) out += ",anonymity_k=" + std::to_string(anonymity_k);
  return out;
}

std::string SeriesResult::label() const {
  return std::string(to_string(variant)) + " " + parameter();
}

void parse_parameter(std::string_view text, SeriesResult& series) {
  series.k = 1;
  series.l = 0;
  series.anonymity_k = 0;
  std::stringstream in{std::string(text)};
  std::string part;
  while (std::getline(in, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw DataError("bad parameter \"" + std::string(text) + "\"");
    std::string key = part.substr(0, eq);
    int value = 0;
    try {
      value = std::stoi(part.substr(eq + 1));
    } catch (const std::exception&) {
      throw DataError("bad parameter \"" + std::string(text) + "\"");
    }
    if (key == "k") {
      series.k = value;
    } else if (key == "l") {
      series.l = value;
    } else if (key == "anonymity_k") {
      series.anonymity_k = value;
    } else {
      throw DataError("bad parameter \"" + std::string(text) + "\"");
    }
  }
}

const SeriesResult* ErrorReport::find(Variant variant, int k, int l, int anonymity_k) const {
  for (const auto& s : series) {
    if (s.variant == variant && s.k == k && s.l == l && s.anonymity_k == anonymity_k) return &s;
  }
  return nullptr;
}

const Comparison* ErrorReport::compare(const std::string& a, const std::string& b) const {
  for (const auto& c : comparisons) {
    if (c.a == a && c.b == b) return &c;
  }
  return nullptr;
}

Dataset load_experiment_data(const ExperimentConfig& config) {
  if (config.schema_path.empty()) throw ValidationError("config: no schema given");
  if (config.data_path.empty()) throw ValidationError("config: no data given");
  Schema schema = load_schema(config.schema_path);
  return load_csv(config.data_path, schema, MissingPolicy::kDropRow).data;
}

namespace {

// A way of turning a training set into something a k-NN model can be fit on.
struct Training {
  Variant variant = Variant::kOriginal;
  int l = 0;
  int anonymity_k = 0;
};

std::vector<Training> trainings_for(const ExperimentConfig& config) {
  std::vector<Training> out;
  for (Variant v : config.variants) {
    switch (v) {
      case Variant::kOriginal:
        out.push_back({v, 0, 0});
        break;
      case Variant::kAnatomized:
        for (int l : config.l_values) out.push_back({v, l, 0});
        break;
      case Variant::kAnonymized:
        for (int k : config.anonymity_k_values) out.push_back({v, 0, k});
        break;
    }
  }
  return out;
}

std::size_t hash_dataset(const Dataset& data) {
  std::ostringstream out;
  write_csv(out, data);
  return std::hash<std::string>{}(out.str());
}

Dataset concat(const std::vector<const Dataset*>& parts) {
  std::vector<Instance> rows;
  for (const Dataset* p : parts) rows.insert(rows.end(), p->rows().begin(), p->rows().end());
  return Dataset(parts.front()->schema(), std::move(rows));
}

// Fits one k-NN model per k on a protected version of `train`.
class FittedVariant {
 public:
  FittedVariant(const Training& t, const Dataset& train, std::uint64_t seed,
                const ExperimentConfig& config, std::shared_ptr<const HierarchySet> hierarchies)
      : training_(t), config_(&config) {
    switch (t.variant) {
      case Variant::kOriginal:
        data_ = train;
        stats_ = fit_normalization(data_);
        break;
      case Variant::kAnatomized: {
        Anatomization a = anatomize(train, t.l, GroupingOptions{derive_seed(seed, t.l)});
        suppressed_ = a.partition.suppressed.size();
        data_ = std::move(a.joined.data);
        stats_ = fit_normalization(data_);
        break;
      }
      case Variant::kAnonymized: {
        GeneralizeOptions options;
        options.max_suppressed =
            static_cast<std::size_t>(std::floor(config.max_suppressed * static_cast<double>(train.size())));
        anonymized_ = generalize(train, t.anonymity_k, std::move(hierarchies), options);
        suppressed_ = anonymized_.suppressed.size();
        stats_ = fit_normalization(anonymized_);
        break;
      }
    }
  }

  KnnModel model(int k, std::uint64_t seed) const {
    KnnOptions options;
    options.k = k;
    options.ties = config_->ties;
    options.seed = seed;
    if (training_.variant == Variant::kAnonymized) {
      return fit_anonymized(anonymized_, stats_, options);
    }
    return KnnModel::fit(data_, DistanceSpec::identity(stats_), options);
  }

  std::size_t suppressed() const { return suppressed_; }

 private:
  Training training_;
  const ExperimentConfig* config_;
  Dataset data_;
  AnonymizedDataset anonymized_;
  NormalizationStats stats_;
  std::size_t suppressed_ = 0;
};

std::string fold_context(const char* what, std::size_t index, const std::exception& e) {
  return std::string(what) + " " + std::to_string(index) + ": " + e.what();
}

}  // namespace

ErrorReport run_cv(const Dataset& data, const ExperimentConfig& config,
                   std::shared_ptr<const HierarchySet> hierarchies) {
  ExperimentConfig cv = config;
  cv.protocol = Protocol::kCv;
  cv.validate();
  const auto trainings = trainings_for(cv);
  for (const auto& t : trainings) {
    if (t.variant == Variant::kAnonymized && !hierarchies) {
      throw ValidationError("anonymized variant needs generalization hierarchies");
    }
  }

  ErrorReport report;
  report.config = config_to_json(config);
  report.seed = config.seed;
  for (int k : cv.k_values) {
    for (const auto& t : trainings) {
      SeriesResult s;
      s.variant = t.variant;
      s.k = k;
      s.l = t.l;
      s.anonymity_k = t.anonymity_k;
      report.series.push_back(s);
    }
  }

  const auto folds = split_folds(data, cv.folds, cv.seed);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Dataset& train = folds[f].train;
    const Dataset& test = folds[f].test;
    const std::uint64_t fold_seed = derive_seed(cv.seed, f);
    const std::size_t before = hash_dataset(test);
    for (std::size_t t = 0; t < trainings.size(); ++t) {
      try {
        FittedVariant fitted(trainings[t], train, fold_seed, cv, hierarchies);
        for (std::size_t ki = 0; ki < cv.k_values.size(); ++ki) {
          KnnModel model = fitted.model(cv.k_values[ki], fold_seed);
          SeriesResult& s = report.series[ki * trainings.size() + t];
          s.folds.push_back(error_rate(model, test, cv.threads));
          s.suppressed.push_back(fitted.suppressed());
        }
      } catch (const ValidationError& e) {
        throw ValidationError(fold_context("fold", f, e));
      } catch (const DataError& e) {
        throw DataError(fold_context("fold", f, e));
      }
    }
    report.test_folds_untouched = report.test_folds_untouched && hash_dataset(test) == before;
  }

  for (auto& s : report.series) {
    s.mean = mean(s.folds);
    s.sd = sample_sd(s.folds);
  }
  for (std::size_t i = 0; i < report.series.size(); ++i) {
    for (std::size_t j = i + 1; j < report.series.size(); ++j) {
      const auto& a = report.series[i];
      const auto& b = report.series[j];
      if (a.k != b.k || a.folds.size() < 2) continue;
      Comparison c;
      c.a = a.label();
      c.b = b.label();
      std::vector<double> diff(a.folds.size());
      for (std::size_t f = 0; f < diff.size(); ++f) diff[f] = a.folds[f] - b.folds[f];
      c.mean_difference = mean(diff);
      for (double level : confidence_levels()) {
        TTestResult r = paired_t_test(a.folds, b.folds, level);
        c.t = r.t;
        c.verdicts.push_back({level, r.significant});
      }
      report.comparisons.push_back(std::move(c));
    }
  }
  return report;
}

std::string ConvergenceCurve::label() const {
  if (variant == Variant::kAnatomized) return "anatomized l=" + std::to_string(l);
  return std::string(to_string(variant));
}

ConvergenceReport run_convergence(const Dataset& data, const ExperimentConfig& config) {
  ExperimentConfig cc = config;
  cc.protocol = Protocol::kConvergence;
  cc.validate();
  const auto trainings = trainings_for(cc);
  const int k = cc.k_values.front();
  const auto parts = split_partitions(data, cc.partitions, cc.seed);
  const std::size_t steps = parts.size() - 1;

  std::vector<std::vector<double>> error_sum(trainings.size(), std::vector<double>(steps, 0.0));
  std::vector<double> n_sum(steps, 0.0);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const std::uint64_t part_seed = derive_seed(cc.seed, p);
    std::vector<const Dataset*> others;
    for (std::size_t q = 0; q < parts.size(); ++q) {
      if (q != p) others.push_back(&parts[q]);
    }
    for (std::size_t j = 0; j < steps; ++j) {
      Dataset train = concat({others.begin(), others.begin() + static_cast<std::ptrdiff_t>(j + 1)});
      n_sum[j] += static_cast<double>(train.size());
      const std::uint64_t step_seed = derive_seed(part_seed, j);
      for (std::size_t t = 0; t < trainings.size(); ++t) {
        try {
          FittedVariant fitted(trainings[t], train, step_seed, cc, nullptr);
          error_sum[t][j] += error_rate(fitted.model(k, step_seed), parts[p], cc.threads);
        } catch (const ValidationError& e) {
          throw ValidationError(fold_context("partition", p, e));
        }
      }
    }
  }

  ConvergenceReport report;
  report.config = config_to_json(config);
  report.seed = config.seed;
  const auto denom = static_cast<double>(parts.size());
  const int d = std::max<int>(1, static_cast<int>(data.schema().dimension()));
  for (std::size_t t = 0; t < trainings.size(); ++t) {
    ConvergenceCurve curve;
    curve.variant = trainings[t].variant;
    curve.l = trainings[t].variant == Variant::kAnatomized ? trainings[t].l : 1;
    for (std::size_t j = 0; j < steps; ++j) {
      curve.measured.push_back({n_sum[j] / denom, error_sum[t][j] / denom});
    }
    if (curve.measured.size() >= 2) {
      curve.model = convergence_fit(curve.measured, d, curve.l,
                                    cc.fit_both ? AsymptoteRule::kLeastSquares
                                                : AsymptoteRule::kMinimumObserved);
    } else {
      curve.model = {curve.measured[0].error, 0.0, d, curve.l};
    }
    for (const auto& m : curve.measured) {
      curve.predicted.push_back(convergence_predict(curve.model, m.n_train));
    }
    curve.max_residual = max_residual(curve.model, curve.measured);
    curve.measured_non_increasing = true;
    curve.predicted_decreasing = true;
    for (std::size_t j = 1; j < steps; ++j) {
      curve.measured_non_increasing =
          curve.measured_non_increasing && curve.measured[j].error <= curve.measured[j - 1].error;
      curve.predicted_decreasing =
          curve.predicted_decreasing && curve.predicted[j] < curve.predicted[j - 1];
    }
    report.curves.push_back(std::move(curve));
  }
  return report;
}

Dataset gaussian_pair(std::size_t n, double separation, int sensitive_values, std::uint64_t seed) {
  if (!(separation >= 0)) throw ValidationError("separation must be >= 0");
  if (sensitive_values < 1) throw ValidationError("sensitive_values must be >= 1");
  Schema schema({{"x", AttributeKind::kNumeric, AttributeRole::kQuasiIdentifying},
                 {"s", AttributeKind::kCategorical, AttributeRole::kSensitive},
                 {"c", AttributeKind::kCategorical, AttributeRole::kClass}});
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> sensitive(0, sensitive_values - 1);
  std::vector<Instance> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool second = coin(rng);
    double x = (second ? 0.5 : -0.5) * separation + noise(rng);
    std::string s = "s" + std::to_string(sensitive(rng));
    rows.push_back({RowId{i}, {Cell{x}, Cell{std::move(s)}, Cell{std::string(second ? "2" : "1")}}});
  }
  return Dataset(std::move(schema), std::move(rows));
}

double gaussian_pair_bayes_error(double separation) {
  return 0.5 * std::erfc(separation / 2.0 / std::sqrt(2.0));
}

const BoundsCell* BoundsReport::find(int l, int k) const {
  for (const auto& c : cells) {
    if (c.l == l && c.k == k) return &c;
  }
  return nullptr;
}

BoundsReport run_bounds_sim(const ExperimentConfig& config) {
  ExperimentConfig bc = config;
  bc.protocol = Protocol::kBoundsSim;
  bc.validate();
  const Dataset train = gaussian_pair(bc.n_train, bc.separation, bc.sensitive_values,
                                      derive_seed(bc.seed, 0));
  const Dataset test = gaussian_pair(bc.n_test, bc.separation, bc.sensitive_values,
                                     derive_seed(bc.seed, 1));
  BoundsReport report;
  report.config = config_to_json(config);
  report.seed = config.seed;
  report.r_star = gaussian_pair_bayes_error(bc.separation);
  report.cover_hart = 2 * report.r_star * (1 - report.r_star);
  report.lower = report.r_star - bc.tolerance;
  report.upper = 2 * report.r_star + bc.tolerance;
  for (int l : bc.l_values) {
    Dataset fitted = train;
    std::size_t suppressed = 0;
    if (l > 1) {
      Anatomization a = anatomize(train, l, GroupingOptions{derive_seed(bc.seed, 100 + l)});
      suppressed = a.partition.suppressed.size();
      fitted = std::move(a.joined.data);
    }
    const NormalizationStats stats = fit_normalization(fitted);
    for (int k : bc.k_values) {
      KnnOptions options;
      options.k = k;
      options.ties = bc.ties;
      options.seed = bc.seed;
      KnnModel model = KnnModel::fit(fitted, DistanceSpec::identity(stats), options);
      BoundsCell cell;
      cell.l = l;
      cell.k = k;
      cell.measured = error_rate(model, test, bc.threads);
      cell.suppressed = suppressed;
      cell.within_bounds = check_bounds(report.r_star, cell.measured, k, bc.tolerance);
      report.all_within = report.all_within && cell.within_bounds;
      report.cells.push_back(cell);
    }
  }
  return report;
}

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "all") return ReportFormat::kAll;
  throw ValidationError("unknown format \"" + std::string(text) + "\"");
}

namespace {

// JSON has no infinity; t statistics use a string sentinel instead.
json number_or_sentinel(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw DataError("expected a number, got \"" + s + "\"");
  }
  return j.get<double>();
}

json header_json(const json& config, std::uint64_t seed, const std::string& version) {
  return {{"schema_version", kReportSchemaVersion},
          {"version", version},
          {"seed", seed},
          {"config", config}};
}

template <typename Report>
void read_header(const json& j, Report& report) {
  if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
    throw DataError("unsupported report schema version");
  }
  report.version = j.at("version").get<std::string>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.config = j.at("config");
}

template <typename F>
auto parse_guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

std::string number_text(double v) { return format_cell(Cell{v}); }

void write_metadata(std::ostream& out, const json& config, std::uint64_t seed,
                    const std::string& version) {
  out << "# schema_version=" << kReportSchemaVersion << '\n';
  out << "# version=" << version << '\n';
  out << "# seed=" << seed << '\n';
  out << "# config=" << config.dump() << '\n';
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
  auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::string& dir, const std::string& name) {
  out.close();
  if (!out) throw DataError("write failed for " + (std::filesystem::path(dir) / name).string());
}

bool wants_json(ReportFormat f) { return f == ReportFormat::kJson || f == ReportFormat::kAll; }
bool wants_csv(ReportFormat f) { return f == ReportFormat::kCsv || f == ReportFormat::kAll; }

}  // namespace

json to_json(const ErrorReport& report) {
  json j = header_json(report.config, report.seed, report.version);
  j["protocol"] = "cv";
  j["test_folds_untouched"] = report.test_folds_untouched;
  json series = json::array();
  for (const auto& s : report.series) {
    series.push_back({{"variant", std::string(to_string(s.variant))},
                      {"parameter", s.parameter()},
                      {"k", s.k},
                      {"l", s.l},
                      {"anonymity_k", s.anonymity_k},
                      {"folds", s.folds},
                      {"suppressed", s.suppressed},
                      {"mean", s.mean},
                      {"sd", s.sd}});
  }
  j["series"] = std::move(series);
  json comparisons = json::array();
  for (const auto& c : report.comparisons) {
    json verdicts = json::array();
    for (const auto& v : c.verdicts) {
      verdicts.push_back({{"confidence", v.confidence}, {"significant", v.significant}});
    }
    comparisons.push_back({{"a", c.a},
                           {"b", c.b},
                           {"mean_difference", c.mean_difference},
                           {"t", number_or_sentinel(c.t)},
                           {"verdicts", std::move(verdicts)}});
  }
  j["comparisons"] = std::move(comparisons);
  return j;
}

ErrorReport error_report_from_json(const json& j) {
  return parse_guarded([&] {
    ErrorReport report;
    read_header(j, report);
    report.test_folds_untouched = j.at("test_folds_untouched").get<bool>();
    for (const auto& s : j.at("series")) {
      SeriesResult r;
      r.variant = variant_from_string(s.at("variant").get<std::string>());
      r.k = s.at("k").get<int>();
      r.l = s.at("l").get<int>();
      r.anonymity_k = s.at("anonymity_k").get<int>();
      r.folds = s.at("folds").get<std::vector<double>>();
      r.suppressed = s.at("suppressed").get<std::vector<std::size_t>>();
      r.mean = s.at("mean").get<double>();
      r.sd = s.at("sd").get<double>();
      report.series.push_back(std::move(r));
    }
    for (const auto& c : j.at("comparisons")) {
      Comparison r;
      r.a = c.at("a").get<std::string>();
      r.b = c.at("b").get<std::string>();
      r.mean_difference = c.at("mean_difference").get<double>();
      r.t = number_from(c.at("t"));
      for (const auto& v : c.at("verdicts")) {
        r.verdicts.push_back({v.at("confidence").get<double>(), v.at("significant").get<bool>()});
      }
      report.comparisons.push_back(std::move(r));
    }
    return report;
  });
}

json to_json(const ConvergenceReport& report) {
  json j = header_json(report.config, report.seed, report.version);
  j["protocol"] = "convergence";
  json curves = json::array();
  for (const auto& c : report.curves) {
    json measured = json::array();
    for (const auto& m : c.measured) measured.push_back({m.n_train, m.error});
    curves.push_back({{"variant", std::string(to_string(c.variant))},
                      {"l", c.l},
                      {"measured", std::move(measured)},
                      {"predicted", c.predicted},
                      {"model",
                       {{"asymptote", c.model.asymptote},
                        {"constant", c.model.constant},
                        {"d", c.model.d},
                        {"l", c.model.l}}},
                      {"beta", beta_constant(c.model.d)},
                      {"max_residual", c.max_residual},
                      {"measured_non_increasing", c.measured_non_increasing},
                      {"predicted_decreasing", c.predicted_decreasing}});
  }
  j["curves"] = std::move(curves);
  return j;
}

ConvergenceReport convergence_report_from_json(const json& j) {
  return parse_guarded([&] {
    ConvergenceReport report;
    read_header(j, report);
    for (const auto& c : j.at("curves")) {
      ConvergenceCurve r;
      r.variant = variant_from_string(c.at("variant").get<std::string>());
      r.l = c.at("l").get<int>();
      for (const auto& m : c.at("measured")) r.measured.push_back({m.at(0), m.at(1)});
      r.predicted = c.at("predicted").get<std::vector<double>>();
      const auto& model = c.at("model");
      r.model = {model.at("asymptote").get<double>(), model.at("constant").get<double>(),
                 model.at("d").get<int>(), model.at("l").get<int>()};
      r.max_residual = c.at("max_residual").get<double>();
      r.measured_non_increasing = c.at("measured_non_increasing").get<bool>();
      r.predicted_decreasing = c.at("predicted_decreasing").get<bool>();
      report.curves.push_back(std::move(r));
    }
    return report;
  });
}

json to_json(const BoundsReport& report) {
  json j = header_json(report.config, report.seed, report.version);
  j["protocol"] = "bounds_sim";
  j["r_star"] = report.r_star;
  j["cover_hart"] = report.cover_hart;
  j["lower"] = report.lower;
  j["upper"] = report.upper;
  j["all_within"] = report.all_within;
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"l", c.l},
                     {"k", c.k},
                     {"measured", c.measured},
                     {"suppressed", c.suppressed},
                     {"within_bounds", c.within_bounds}});
  }
  j["cells"] = std::move(cells);
  return j;
}

BoundsReport bounds_report_from_json(const json& j) {
  return parse_guarded([&] {
    BoundsReport report;
    read_header(j, report);
    report.r_star = j.at("r_star").get<double>();
    report.cover_hart = j.at("cover_hart").get<double>();
    report.lower = j.at("lower").get<double>();
    report.upper = j.at("upper").get<double>();
    report.all_within = j.at("all_within").get<bool>();
    for (const auto& c : j.at("cells")) {
      report.cells.push_back({c.at("l").get<int>(), c.at("k").get<int>(),
                              c.at("measured").get<double>(), c.at("suppressed").get<std::size_t>(),
                              c.at("within_bounds").get<bool>()});
    }
    return report;
  });
}

void write_errors_csv(std::ostream& out, const ErrorReport& report) {
  write_metadata(out, report.config, report.seed, report.version);
  csv::write_record(out, {"variant", "parameter", "x", "y"});
  for (const auto& s : report.series) {
    const std::string variant(to_string(s.variant));
    const std::string parameter = s.parameter();
    for (std::size_t f = 0; f < s.folds.size(); ++f) {
      csv::write_record(out, {variant, parameter, std::to_string(f), number_text(s.folds[f])});
    }
    csv::write_record(out, {variant, parameter, "mean", number_text(s.mean)});
    csv::write_record(out, {variant, parameter, "sd", number_text(s.sd)});
  }
}

ErrorReport read_errors_csv(std::istream& in) {
  ErrorReport report;
  std::string line;
  std::ostringstream body;
  while (std::getline(in, line)) {
    if (line.starts_with("# ")) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2);
      std::string value = line.substr(eq + 1);
      try {
        if (key == "schema_version" && std::stoi(value) != kReportSchemaVersion) {
          throw DataError("unsupported report schema version");
        }
        if (key == "version") report.version = value;
        if (key == "seed") report.seed = std::stoull(value);
        if (key == "config") report.config = json::parse(value);
      } catch (const DataError&) {
        throw;
      } catch (const std::exception& e) {
        throw DataError("errors.csv metadata: " + std::string(e.what()));
      }
      continue;
    }
    body << line << '\n';
  }
  std::istringstream rest(body.str());
  auto records = csv::read(rest);
  if (records.empty() || records[0] != csv::Record{"variant", "parameter", "x", "y"}) {
    throw DataError("errors.csv: missing header");
  }
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.size() != 4) throw DataError("errors.csv: expected 4 fields");
    SeriesResult key;
    key.variant = variant_from_string(r[0]);
    parse_parameter(r[1], key);
    if (report.series.empty() || report.series.back().label() != key.label()) {
      report.series.push_back(key);
    }
    SeriesResult& s = report.series.back();
    double y = 0;
    try {
      y = std::stod(r[3]);
    } catch (const std::exception&) {
      throw DataError("errors.csv: bad value \"" + r[3] + "\"");
    }
    if (r[2] == "mean") {
      s.mean = y;
    } else if (r[2] == "sd") {
      s.sd = y;
    } else {
      s.folds.push_back(y);
    }
  }
  return report;
}

void write_curves_csv(std::ostream& out, const ConvergenceReport& report) {
  write_metadata(out, report.config, report.seed, report.version);
  csv::write_record(out, {"variant", "parameter", "x", "y"});
  for (const auto& c : report.curves) {
    for (std::size_t i = 0; i < c.measured.size(); ++i) {
      csv::write_record(out, {c.label(), "measured", number_text(c.measured[i].n_train),
                              number_text(c.measured[i].error)});
    }
    for (std::size_t i = 0; i < c.measured.size(); ++i) {
      csv::write_record(out, {c.label(), "predicted", number_text(c.measured[i].n_train),
                              number_text(c.predicted[i])});
    }
  }
}

void emit_report(const ErrorReport& report, const std::string& dir, ReportFormat format) {
  if (wants_json(format)) {
    auto out = open_output(dir, "report.json");
    out << to_json(report).dump(2) << '\n';
    finish(out, dir, "report.json");
  }
  if (wants_csv(format)) {
    auto out = open_output(dir, "errors.csv");
    write_errors_csv(out, report);
    finish(out, dir, "errors.csv");
  }
}

void emit_report(const ConvergenceReport& report, const std::string& dir, ReportFormat format) {
  if (wants_json(format)) {
    auto out = open_output(dir, "report.json");
    out << to_json(report).dump(2) << '\n';
    finish(out, dir, "report.json");
  }
  if (wants_csv(format)) {
    auto out = open_output(dir, "curves.csv");
    write_curves_csv(out, report);
    finish(out, dir, "curves.csv");
  }
}

void emit_report(const BoundsReport& report, const std::string& dir, ReportFormat format) {
  if (wants_json(format)) {
    auto out = open_output(dir, "bounds.json");
    out << to_json(report).dump(2) << '\n';
    finish(out, dir, "bounds.json");
  }
  if (wants_csv(format)) {
    auto out = open_output(dir, "bounds.csv");
    write_metadata(out, report.config, report.seed, report.version);
    csv::write_record(out, {"variant", "parameter", "x", "y"});
    for (const auto& c : report.cells) {
      csv::write_record(out, {c.l == 1 ? "original" : "anatomized", "l=" + std::to_string(c.l),
                              std::to_string(c.k), number_text(c.measured)});
    }
    finish(out, dir, "bounds.csv");
  }
}

}  // namespace anatomy
