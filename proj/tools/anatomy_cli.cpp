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

// Command-line front end: anatomize, generalize, classify, cv, convergence,
// bounds-sim and verify.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anatomy/anatomizer.hpp"
#include "anatomy/dataset.hpp"
#include "anatomy/error.hpp"
#include "anatomy/experiments.hpp"
#include "anatomy/generalizer.hpp"
#include "anatomy/knn.hpp"
#include "anatomy/normalization.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

// JSON config files. Flat keys apply to the subcommand being run; an object
// under a subcommand name applies to that subcommand.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames().front();
      if (name == "help" || name == "config") continue;
      if (opt->count() > 0) {
        auto results = opt->results();
        if (opt->get_expected_min() == 0) {
          j[name] = true;
        } else if (opt->get_items_expected_max() > 1) {
          j[name] = results;
        } else {
          j[name] = results.back();
        }
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump();
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config: expected a JSON object");
    std::vector<std::string> active;
    for (const CLI::App* sub : app_->get_subcommands()) active.push_back(sub->get_name());
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        for (const auto& [inner, v] : value.items()) items.push_back(item({key}, inner, v));
      } else {
        items.push_back(item(active, key, value));
      }
    }
    return items;
  }

 private:
  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name,
                              const json& value) {
    CLI::ConfigItem out;
    out.parents = std::move(parents);
    out.name = name;
    auto text = [](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_object() || v.is_array()) throw CLI::ConversionError("config: nested value");
      return v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) out.inputs.push_back(text(v));
    } else {
      out.inputs.push_back(text(value));
    }
    return out;
  }

  const CLI::App* app_;
};

struct Common {
  std::uint64_t seed = 7;
  std::string out = "results";
  std::string format = "all";
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--seed", common.seed, "Master random seed")->capture_default_str();
  sub->add_option("--out", common.out, "Output directory")->capture_default_str();
  sub->add_option("--format", common.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "all"}))
      ->capture_default_str();
}

void echo_config(const CLI::App* sub, std::uint64_t seed) {
  JsonConfig formatter(nullptr);
  std::cerr << "# " << sub->get_name() << " config " << formatter.to_config(sub, true, false, "")
            << '\n';
  std::cerr << "# seed " << seed << '\n';
}

std::ofstream open_in(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) throw anatomy::DataError("cannot write " + (fs::path(dir) / name).string());
  return out;
}

anatomy::Dataset load(const std::string& path, const anatomy::Schema& schema) {
  return anatomy::load_csv(path, schema, anatomy::MissingPolicy::kDropRow).data;
}

std::vector<anatomy::Variant> parse_variants(const std::vector<std::string>& names) {
  std::vector<anatomy::Variant> out;
  for (const auto& n : names) out.push_back(anatomy::variant_from_string(n));
  return out;
}

void print_cv(const anatomy::ErrorReport& report) {
  std::cout << std::left << std::setw(40) << "series" << std::setw(12) << "mean" << "sd\n";
  for (const auto& s : report.series) {
    std::cout << std::setw(40) << s.label() << std::setw(12) << std::setprecision(4) << s.mean
              << s.sd << '\n';
  }
  for (const auto& c : report.comparisons) {
    std::cout << c.a << " vs " << c.b << ": t = " << c.t << ", significant at";
    bool any = false;
    for (const auto& v : c.verdicts) {
      if (v.significant) {
        std::cout << ' ' << v.confidence;
        any = true;
      }
    }
    std::cout << (any ? "" : " none") << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anatomization and k-NN classification experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON file with option values; flags override it");
  app.set_version_flag("--version", std::string(ANATOMY_VERSION));

  Common common;
  std::string in, schema_path, hierarchies_path, train_path, test_path, it_path, st_path;
  int l = 2;
  int anonymity_k = 10;
  std::size_t max_suppressed_rows = 0;
  std::string order = "shuffled";
  bool allow_infeasible = false;
  int k = 1;
  std::string ties = "lowest_row_id";
  std::string variant = "original";
  unsigned threads = 0;

  // anatomize
  auto* anatomize_cmd = app.add_subcommand("anatomize", "Split a dataset into l-diverse IT/ST tables");
  add_common(anatomize_cmd, common);
  anatomize_cmd->add_option("--in", in, "Input CSV")->required();
  anatomize_cmd->add_option("--schema", schema_path, "Schema JSON")->required();
  anatomize_cmd->add_option("--l", l, "Diversity parameter")->capture_default_str();
  anatomize_cmd->add_option("--order", order, "Bucket order")
      ->check(CLI::IsMember({"shuffled", "row_id"}))
      ->capture_default_str();
  anatomize_cmd->add_flag("--allow-infeasible", allow_infeasible,
                          "Suppress everything instead of failing when no group can be formed");

  // generalize
  auto* generalize_cmd = app.add_subcommand("generalize", "k-anonymize a dataset by generalization");
  add_common(generalize_cmd, common);
  generalize_cmd->add_option("--in", in, "Input CSV")->required();
  generalize_cmd->add_option("--schema", schema_path, "Schema JSON")->required();
  generalize_cmd->add_option("--hierarchies", hierarchies_path, "Hierarchy JSON")->required();
  generalize_cmd->add_option("--k", anonymity_k, "Anonymity parameter")->capture_default_str();
  generalize_cmd->add_option("--max-suppressed", max_suppressed_rows, "Rows that may be suppressed")
      ->capture_default_str();

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Train k-NN and classify a test file");
  add_common(classify_cmd, common);
  classify_cmd->add_option("--train", train_path, "Training CSV")->required();
  classify_cmd->add_option("--test", test_path, "Test CSV")->required();
  classify_cmd->add_option("--schema", schema_path, "Schema JSON")->required();
  classify_cmd->add_option("--k", k, "Neighbors")->capture_default_str();
  classify_cmd->add_option("--ties", ties, "Tie policy")
      ->check(CLI::IsMember({"lowest_row_id", "seeded_random", "all_ties"}))
      ->capture_default_str();
  classify_cmd->add_option("--variant", variant, "Training data variant")
      ->check(CLI::IsMember({"original", "anatomized", "anonymized"}))
      ->capture_default_str();
  classify_cmd->add_option("--l", l, "Diversity parameter (anatomized)")->capture_default_str();
  classify_cmd->add_option("--anonymity-k", anonymity_k, "Anonymity parameter (anonymized)")
      ->capture_default_str();
  classify_cmd->add_option("--hierarchies", hierarchies_path, "Hierarchy JSON (anonymized)");
  classify_cmd->add_option("--max-suppressed", max_suppressed_rows, "Rows that may be suppressed")
      ->capture_default_str();
  classify_cmd->add_option("--threads", threads, "Worker threads (0: all cores)");

  // experiments share one config
  anatomy::ExperimentConfig ex;
  std::vector<std::string> variants = {"original", "anatomized"};
  auto add_experiment = [&](CLI::App* sub, bool with_data) {
    add_common(sub, common);
    if (with_data) {
      sub->add_option("--in", ex.data_path, "Input CSV")->required();
      sub->add_option("--schema", ex.schema_path, "Schema JSON")->required();
      sub->add_option("--variants", variants, "original, anatomized, anonymized")
          ->delimiter(',')
          ->capture_default_str();
    }
    sub->add_option("--k", ex.k_values, "Neighbor counts")->delimiter(',')->capture_default_str();
    sub->add_option("--l", ex.l_values, "Diversity parameters")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--ties", ties, "Tie policy")
        ->check(CLI::IsMember({"lowest_row_id", "seeded_random", "all_ties"}))
        ->capture_default_str();
    sub->add_option("--threads", ex.threads, "Worker threads (0: all cores)");
  };

  auto* cv_cmd = app.add_subcommand("cv", "Cross-validated error rates with paired t-tests");
  add_experiment(cv_cmd, true);
  cv_cmd->add_option("--folds", ex.folds, "Folds")->capture_default_str();
  cv_cmd->add_option("--hierarchies", ex.hierarchies_path, "Hierarchy JSON (anonymized)");
  cv_cmd->add_option("--anonymity-k", ex.anonymity_k_values, "Anonymity parameters")
      ->delimiter(',');
  cv_cmd->add_option("--max-suppressed", ex.max_suppressed,
                     "Suppression budget of the anonymized variant, fraction of training rows")
      ->capture_default_str();

  auto* convergence_cmd =
      app.add_subcommand("convergence", "Incremental-training error curves and fitted model");
  add_experiment(convergence_cmd, true);
  convergence_cmd->add_option("--partitions", ex.partitions, "Partitions")->capture_default_str();
  convergence_cmd->add_flag("--fit-both", ex.fit_both,
                            "Fit the asymptote by least squares instead of the minimum");

  auto* bounds_cmd = app.add_subcommand("bounds-sim", "Error bounds on a synthetic Gaussian pair");
  add_experiment(bounds_cmd, false);
  bounds_cmd->add_option("--n-train", ex.n_train, "Training rows")->capture_default_str();
  bounds_cmd->add_option("--n-test", ex.n_test, "Test rows")->capture_default_str();
  bounds_cmd->add_option("--separation", ex.separation, "Distance between class means")
      ->capture_default_str();
  bounds_cmd->add_option("--sensitive-values", ex.sensitive_values, "Sensitive domain size")
      ->capture_default_str();
  bounds_cmd->add_option("--tolerance", ex.tolerance, "Bound tolerance")->capture_default_str();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Check l-diversity of published IT/ST tables");
  verify_cmd->add_option("--it", it_path, "Identifier table CSV")->required();
  verify_cmd->add_option("--st", st_path, "Sensitive table CSV")->required();
  verify_cmd->add_option("--l", l, "Diversity parameter")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    echo_config(sub, common.seed);
    const auto format = anatomy::report_format_from_string(common.format);

    if (sub == anatomize_cmd) {
      auto schema = anatomy::load_schema(schema_path);
      auto data = load(in, schema);
      anatomy::GroupingOptions options;
      options.seed = common.seed;
      options.order = order == "row_id" ? anatomy::BucketOrder::kRowId
                                        : anatomy::BucketOrder::kShuffled;
      options.allow_infeasible = allow_infeasible;
      auto result = anatomy::anatomize(data, l, options);
      {
        auto out = open_in(common.out, "it.csv");
        anatomy::write_identifier_table(out, result.it);
      }
      {
        auto out = open_in(common.out, "st.csv");
        anatomy::write_sensitive_table(out, result.st);
      }
      {
        auto out = open_in(common.out, "anatomized.csv");
        anatomy::write_csv(out, result.joined.data);
      }
      {
        auto out = open_in(common.out, "partition.json");
        out << anatomy::partition_to_json(result.partition).dump(2) << '\n';
      }
      std::cout << "groups " << result.partition.groups.size() << ", suppressed "
                << result.partition.suppressed.size() << ", anatomized rows "
                << result.joined.data.size() << '\n';
      return 0;
    }

    if (sub == generalize_cmd) {
      auto schema = anatomy::load_schema(schema_path);
      auto data = load(in, schema);
      auto hierarchies =
          std::make_shared<const anatomy::HierarchySet>(anatomy::load_hierarchies(hierarchies_path));
      auto result = anatomy::generalize(data, anonymity_k, hierarchies, {max_suppressed_rows});
      auto check = anatomy::verify_k_anonymity(result);
      {
        auto out = open_in(common.out, "anonymized.csv");
        anatomy::write_anonymized_csv(out, result);
      }
      std::cout << "levels";
      for (int level : result.levels) std::cout << ' ' << level;
      std::cout << ", classes " << check.classes << ", suppressed " << result.suppressed.size()
                << ", k-anonymous " << (check.ok ? "yes" : "no") << '\n';
      return check.ok ? 0 : kDataError;
    }

    if (sub == classify_cmd) {
      auto schema = anatomy::load_schema(schema_path);
      auto train = load(train_path, schema);
      auto test = load(test_path, schema);
      anatomy::KnnOptions options;
      options.k = k;
      options.ties = anatomy::tie_policy_from_string(ties);
      options.seed = common.seed;
      std::unique_ptr<anatomy::KnnModel> model;
      if (variant == "original") {
        model = std::make_unique<anatomy::KnnModel>(anatomy::KnnModel::fit(
            train, anatomy::DistanceSpec::identity(anatomy::fit_normalization(train)), options));
      } else if (variant == "anatomized") {
        auto a = anatomy::anatomize(train, l, anatomy::GroupingOptions{common.seed});
        model = std::make_unique<anatomy::KnnModel>(anatomy::KnnModel::fit(
            a.joined.data, anatomy::DistanceSpec::identity(anatomy::fit_normalization(a.joined.data)),
            options));
      } else {
        if (hierarchies_path.empty()) {
          throw anatomy::ValidationError("--hierarchies is required for the anonymized variant");
        }
        auto hierarchies = std::make_shared<const anatomy::HierarchySet>(
            anatomy::load_hierarchies(hierarchies_path));
        auto g = anatomy::generalize(train, anonymity_k, hierarchies, {max_suppressed_rows});
        model = std::make_unique<anatomy::KnnModel>(
            anatomy::fit_anonymized(g, anatomy::fit_normalization(g), options));
      }
      auto predicted = anatomy::predict(*model, test, threads);
      std::size_t wrong = 0;
      auto out = open_in(common.out, "predictions.csv");
      out << "id,actual,predicted\n";
      for (std::size_t i = 0; i < test.size(); ++i) {
        wrong += predicted[i] != test.class_of(i);
        out << anatomy::to_underlying(test.row(i).id) << ',' << test.class_of(i) << ','
            << predicted[i] << '\n';
      }
      std::cout << "error rate " << (test.empty() ? 0.0 : static_cast<double>(wrong) / test.size())
                << " on " << test.size() << " rows\n";
      return 0;
    }

    if (sub == cv_cmd || sub == convergence_cmd || sub == bounds_cmd) {
      ex.seed = common.seed;
      ex.output_dir = common.out;
      ex.ties = anatomy::tie_policy_from_string(ties);
      if (sub == bounds_cmd) {
        ex.protocol = anatomy::Protocol::kBoundsSim;
        ex.variants = {anatomy::Variant::kOriginal, anatomy::Variant::kAnatomized};
        if (bounds_cmd->get_option("--l")->count() == 0) ex.l_values = {1, 2, 3};
        if (bounds_cmd->get_option("--k")->count() == 0) ex.k_values = {1, 3};
        auto report = anatomy::run_bounds_sim(ex);
        anatomy::emit_report(report, common.out, format);
        std::cout << "R* = " << report.r_star << ", bounds [" << report.lower << ", "
                  << report.upper << "], 2R*(1-R*) = " << report.cover_hart << '\n';
        for (const auto& c : report.cells) {
          std::cout << "l=" << c.l << " k=" << c.k << " error " << c.measured
                    << (c.within_bounds ? " within" : " OUTSIDE") << '\n';
        }
        return 0;
      }
      ex.variants = parse_variants(variants);
      auto data = anatomy::load_experiment_data(ex);
      if (sub == cv_cmd) {
        ex.protocol = anatomy::Protocol::kCv;
        std::shared_ptr<const anatomy::HierarchySet> hierarchies;
        if (!ex.hierarchies_path.empty()) {
          hierarchies = std::make_shared<const anatomy::HierarchySet>(
              anatomy::load_hierarchies(ex.hierarchies_path));
        }
        auto report = anatomy::run_cv(data, ex, hierarchies);
        anatomy::emit_report(report, common.out, format);
        print_cv(report);
        return 0;
      }
      ex.protocol = anatomy::Protocol::kConvergence;
      auto report = anatomy::run_convergence(data, ex);
      anatomy::emit_report(report, common.out, format);
      for (const auto& c : report.curves) {
        std::cout << c.label() << ": R_A " << c.model.asymptote << ", c " << c.model.constant
                  << ", max residual " << c.max_residual << '\n';
      }
      return 0;
    }

    if (sub == verify_cmd) {
      std::ifstream it_in(it_path);
      std::ifstream st_in(st_path);
      if (!it_in) throw anatomy::DataError("cannot open " + it_path);
      if (!st_in) throw anatomy::DataError("cannot open " + st_path);
      auto gids = anatomy::read_identifier_gids(it_in);
      auto st = anatomy::read_sensitive_table(st_in);
      std::string problem;
      bool consistent = anatomy::tables_consistent(gids, st, &problem);
      if (!consistent) std::cerr << "tables disagree: " << problem << '\n';
      auto report = anatomy::verify_l_diversity(st, l);
      std::size_t bad = 0;
      for (const auto& g : report.groups) {
        if (!g.ok) {
          ++bad;
          std::cerr << "group " << anatomy::to_underlying(g.gid) << ": " << g.most_frequent
                    << " appears " << g.max_frequency << " of " << g.size << " times\n";
        }
      }
      std::cout << report.groups.size() << " groups, " << bad << " violating, tables "
                << (consistent ? "consistent" : "INCONSISTENT") << '\n';
      return report.ok && consistent ? 0 : kDataError;
    }
  } catch (const anatomy::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const anatomy::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
