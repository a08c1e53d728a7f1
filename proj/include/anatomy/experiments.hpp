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

#ifndef ANATOMY_EXPERIMENTS_HPP_
#define ANATOMY_EXPERIMENTS_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "anatomy/dataset.hpp"
#include "anatomy/generalizer.hpp"
#include "anatomy/knn.hpp"
#include "anatomy/theory.hpp"
#include "json.hpp"

namespace anatomy {

inline constexpr int kReportSchemaVersion = 1;

enum class Protocol { kCv, kConvergence, kBoundsSim };
enum class Variant { kOriginal, kAnatomized, kAnonymized };

std::string_view to_string(Protocol protocol);
std::string_view to_string(Variant variant);
Protocol protocol_from_string(std::string_view text);
Variant variant_from_string(std::string_view text);
std::string_view to_string(TiePolicy ties);
TiePolicy tie_policy_from_string(std::string_view text);

struct ExperimentConfig {
  std::string data_path;
  std::string schema_path;
  std::string hierarchies_path;  // needed by the anonymized variant
  Protocol protocol = Protocol::kCv;
  std::vector<Variant> variants = {Variant::kOriginal, Variant::kAnatomized};
  std::vector<int> k_values = {1};
  std::vector<int> l_values = {2};
  std::vector<int> anonymity_k_values;
  int folds = 10;
  int partitions = 5;
  std::uint64_t seed = 7;
  std::string output_dir;
  TiePolicy ties = TiePolicy::kLowestRowId;
  unsigned threads = 0;  // 0: hardware concurrency

  // anonymized baseline: suppression budget as a fraction of training rows
  double max_suppressed = 0.01;

  // convergence
  bool fit_both = false;  // fit R_A by least squares instead of the minimum

  // bounds simulation
  std::size_t n_train = 50000;
  std::size_t n_test = 10000;
  double separation = 2.0;
  int sensitive_values = 10;
  double tolerance = 0.01;

  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
// Keys absent from `j` keep their value in `base`; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

const std::vector<double>& confidence_levels();

struct SeriesResult {
  Variant variant = Variant::kOriginal;
  int k = 1;
  int l = 0;            // anatomized only
  int anonymity_k = 0;  // anonymized only
  std::vector<double> folds;
  std::vector<std::size_t> suppressed;  // per fold
  double mean = 0;
  double sd = 0;

  std::string parameter() const;  // "k=1,l=2"
  std::string label() const;      // "anatomized k=1,l=2"
  bool operator==(const SeriesResult&) const = default;
};

// Parses "k=1,l=2" style parameter strings into a series.
void parse_parameter(std::string_view text, SeriesResult& series);

struct Verdict {
  double confidence = 0;
  bool significant = false;
  bool operator==(const Verdict&) const = default;
};

struct Comparison {
  std::string a;
  std::string b;
  double mean_difference = 0;  // mean(a - b)
  double t = 0;
  std::vector<Verdict> verdicts;
  bool operator==(const Comparison&) const = default;
};

struct ErrorReport {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = ANATOMY_VERSION;
  std::vector<SeriesResult> series;
  std::vector<Comparison> comparisons;
  bool test_folds_untouched = true;

  const SeriesResult* find(Variant variant, int k, int l = 0, int anonymity_k = 0) const;
  const Comparison* compare(const std::string& a, const std::string& b) const;
  bool operator==(const ErrorReport&) const = default;
};

// Loads the dataset named by the config, dropping rows with missing values.
Dataset load_experiment_data(const ExperimentConfig& config);

// Stratified k-fold CV. Only training folds are anatomized or generalized;
// test folds are classified as they are. Every pair of series with the same
// k gets a paired t-test at each confidence level.
ErrorReport run_cv(const Dataset& data, const ExperimentConfig& config,
                   std::shared_ptr<const HierarchySet> hierarchies = nullptr);

struct ConvergenceCurve {
  Variant variant = Variant::kOriginal;
  int l = 1;
  std::vector<MeasuredPoint> measured;  // averaged over test partitions
  std::vector<double> predicted;
  ConvergenceModel model;
  double max_residual = 0;
  bool measured_non_increasing = false;
  bool predicted_decreasing = false;

  std::string label() const;
  bool operator==(const ConvergenceCurve&) const = default;
};

struct ConvergenceReport {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = ANATOMY_VERSION;
  std::vector<ConvergenceCurve> curves;
  bool operator==(const ConvergenceReport&) const = default;
};

// Every partition is a test set once; the others are added one at a time to
// the training set. Variants: original (l = 1) and anatomized at each l.
ConvergenceReport run_convergence(const Dataset& data, const ExperimentConfig& config);

// Two equal-prior classes with unit-variance Gaussians at -sep/2 and +sep/2
// on attribute "x", an independent uniform categorical "s" (sensitive) and
// class "c" in {"1", "2"}.
Dataset gaussian_pair(std::size_t n, double separation, int sensitive_values,
                      std::uint64_t seed);

// Phi(-sep/2)
double gaussian_pair_bayes_error(double separation);

struct BoundsCell {
  int l = 1;
  int k = 1;
  double measured = 0;
  std::size_t suppressed = 0;
  bool within_bounds = false;
  bool operator==(const BoundsCell&) const = default;
};

struct BoundsReport {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = ANATOMY_VERSION;
  double r_star = 0;
  double cover_hart = 0;  // 2 R* (1 - R*)
  double lower = 0;       // R* - tolerance
  double upper = 0;       // 2 R* + tolerance
  std::vector<BoundsCell> cells;
  bool all_within = true;

  const BoundsCell* find(int l, int k) const;
  bool operator==(const BoundsReport&) const = default;
};

// l = 1 uses the training sample directly.
BoundsReport run_bounds_sim(const ExperimentConfig& config);

enum class ReportFormat { kJson, kCsv, kAll };
ReportFormat report_format_from_string(std::string_view text);

nlohmann::json to_json(const ErrorReport& report);
ErrorReport error_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConvergenceReport& report);
ConvergenceReport convergence_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundsReport& report);
BoundsReport bounds_report_from_json(const nlohmann::json& j);

// Long format: variant,parameter,x,y after "#" metadata lines. CV rows are
// one per fold (x = fold index) plus x = "mean" and x = "sd" summaries.
void write_errors_csv(std::ostream& out, const ErrorReport& report);
ErrorReport read_errors_csv(std::istream& in);
// variant,parameter,x,y with parameter "measured" or "predicted", x = n_train.
void write_curves_csv(std::ostream& out, const ConvergenceReport& report);

// report.json / errors.csv
void emit_report(const ErrorReport& report, const std::string& dir, ReportFormat format);
// report.json / curves.csv
void emit_report(const ConvergenceReport& report, const std::string& dir, ReportFormat format);
// bounds.json / bounds.csv
void emit_report(const BoundsReport& report, const std::string& dir, ReportFormat format);

}  // namespace anatomy

#endif  // ANATOMY_EXPERIMENTS_HPP_
