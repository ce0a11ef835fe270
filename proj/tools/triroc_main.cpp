// triroc: overlap (OVL) and ROC-surface volume (VUS) for three ordered
// diagnostic classes — estimation, bootstrap inference, and the Monte Carlo
// studies behind the published tables.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "triroc/inference.hpp"
#include "triroc/marker.hpp"
#include "triroc/simulation.hpp"

namespace {

using triroc::Measure;
using triroc::Method;
using njson = nlohmann::ordered_json;

std::uint64_t env_seed() {
  const char* env = std::getenv("TRIROC_SEED");
  if (!env || !*env) return 0;
  std::uint64_t v = 0;
  const char* last = env + std::string_view(env).size();
  const auto [ptr, ec] = std::from_chars(env, last, v);
  if (ec != std::errc{} || ptr != last)
    throw std::invalid_argument("TRIROC_SEED must be a nonnegative integer, got '" +
                                std::string(env) + "'");
  return v;
}

std::string stat_name(Measure measure, Method method) {
  const std::string base = triroc::to_string(measure);
  switch (method) {
    case Method::kNormal:
      return base + "_N";
    case Method::kBoxCoxNormal:
      return base + "_N^BC";
    case Method::kKernel:
      return base + "_K";
    case Method::kEmpirical:
      return base + "_E";
  }
  return base;
}

triroc::MethodChoice parse_method_token(const std::string& token) {
  if (token == "auto") return triroc::MethodChoice::kAuto;
  if (token == "normal") return triroc::MethodChoice::kNormal;
  if (token == "boxcox") return triroc::MethodChoice::kBoxCox;
  if (token == "kernel") return triroc::MethodChoice::kKernel;
  if (token == "empirical") return triroc::MethodChoice::kEmpirical;
  throw std::invalid_argument("--methods: unknown method '" + token +
                              "' (use auto, normal, boxcox, kernel, empirical)");
}

// Shared --input/--value/--class/--order plumbing for the dataset commands.
struct InputArgs {
  std::string path, value_column, class_column;
  std::vector<std::string> order;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", path, "CSV file with one row per subject")->required();
    cmd->add_option("--value", value_column, "name of the marker value column")->required();
    cmd->add_option("--class", class_column, "name of the class label column")->required();
    cmd->add_option("--order", order,
                    "the three class labels from least to most severe, e.g. D-,D0,D+")
        ->required()
        ->delimiter(',');
  }

  triroc::MarkerDataset load_oriented() const {
    if (order.size() != 3)
      throw std::invalid_argument("--order needs exactly three comma-separated labels");
    return triroc::orient(
        triroc::load_csv(path, value_column, class_column, {order[0], order[1], order[2]}));
  }
};

std::vector<triroc::MethodChoice> parse_methods(const std::vector<std::string>& tokens) {
  std::vector<triroc::MethodChoice> methods;
  for (const auto& t : tokens) methods.push_back(parse_method_token(t));
  return methods;
}

std::array<bool, triroc::kStatCount> parse_stats(const std::vector<std::string>& tokens) {
  std::array<bool, triroc::kStatCount> want{};
  for (const auto& t : tokens) {
    if (t == "ovl-param")
      want[static_cast<std::size_t>(triroc::StatId::kOvlParametric)] = true;
    else if (t == "vus-param")
      want[static_cast<std::size_t>(triroc::StatId::kVusParametric)] = true;
    else if (t == "ovl-kernel")
      want[static_cast<std::size_t>(triroc::StatId::kOvlKernel)] = true;
    else if (t == "vus-kernel")
      want[static_cast<std::size_t>(triroc::StatId::kVusKernel)] = true;
    else if (t == "vus-emp")
      want[static_cast<std::size_t>(triroc::StatId::kVusEmpirical)] = true;
    else
      throw std::invalid_argument(
          "--stats: unknown statistic '" + t +
          "' (use ovl-param, vus-param, ovl-kernel, vus-kernel, vus-emp)");
  }
  return want;
}

std::vector<std::array<int, 3>> parse_sizes_flag(const std::string& text) {
  // Same shape as scenario files: semicolon-separated comma triples.
  std::vector<std::array<int, 3>> sizes;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t semi = text.find(';', start);
    if (semi == std::string::npos) semi = text.size();
    const std::string triple = text.substr(start, semi - start);
    if (triple.find_first_not_of(" \t") != std::string::npos) {
      std::array<int, 3> n{};
      int k = 0;
      std::size_t t = 0;
      while (k < 3) {
        std::size_t comma = triple.find(',', t);
        if (comma == std::string::npos) comma = triple.size();
        const std::string item = triple.substr(t, comma - t);
        try {
          n[static_cast<std::size_t>(k)] = std::stoi(item);
        } catch (const std::exception&) {
          throw std::invalid_argument("--sizes: cannot parse '" + item + "'");
        }
        ++k;
        t = comma + 1;
        if (k < 3 && comma == triple.size())
          throw std::invalid_argument("--sizes: each triple needs three values");
      }
      sizes.push_back(n);
    }
    start = semi + 1;
  }
  if (sizes.empty()) throw std::invalid_argument("--sizes: empty list");
  return sizes;
}

const std::vector<std::array<int, 3>> kCanonicalSizes = {
    {20, 20, 20}, {20, 20, 30},  {20, 30, 50},   {30, 50, 50},
    {50, 50, 50}, {50, 50, 100}, {50, 100, 100}, {100, 100, 100}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "triroc — how well does a continuous biomarker separate three ordered diagnostic "
      "classes? Overlap (OVL) and ROC-surface volume (VUS) estimation, bootstrap inference, "
      "and Monte Carlo studies."};
  app.require_subcommand(1);

  try {
    // ---------------------------------------------------------------- estimate
    auto* estimate = app.add_subcommand(
        "estimate", "Point estimates with stratified-bootstrap percentile CIs for a marker CSV");
    auto est_in = std::make_shared<InputArgs>();
    est_in->attach(estimate);
    auto est_methods =
        std::make_shared<std::vector<std::string>>(std::vector<std::string>{"auto", "kernel",
                                                                            "empirical"});
    estimate->add_option("--methods", *est_methods,
                         "estimators: auto, normal, boxcox, kernel, empirical")
        ->delimiter(',');
    auto est_B = std::make_shared<int>(500);
    auto est_level = std::make_shared<double>(0.95);
    auto est_seed = std::make_shared<std::uint64_t>(0);
    auto est_threshold = std::make_shared<double>(0.05);
    estimate->add_option("--B", *est_B, "bootstrap resamples")->capture_default_str();
    estimate->add_option("--level", *est_level, "CI level")->capture_default_str();
    auto* est_seed_opt = estimate->add_option("--seed", *est_seed, "bootstrap seed");
    estimate->add_option("--normality-threshold", *est_threshold,
                         "Shapiro-Wilk p-value below which 'auto' switches to the power "
                         "transform")
        ->capture_default_str();
    auto est_json = std::make_shared<bool>(false);
    auto est_table = std::make_shared<bool>(false);
    auto* ej = estimate->add_flag("--json", *est_json, "JSON report");
    estimate->add_flag("--table", *est_table, "aligned text report (default)")->excludes(ej);
    auto est_density = std::make_shared<std::string>();
    auto est_density_points = std::make_shared<int>(201);
    estimate->add_option("--density-out", *est_density,
                         "also write per-class density curves (CSV) to this file");
    estimate->add_option("--density-points", *est_density_points, "grid size for --density-out")
        ->capture_default_str();

    estimate->callback([=] {
      const triroc::MarkerDataset ds = est_in->load_oriented();
      triroc::AnalyzeOptions options;
      options.methods = parse_methods(*est_methods);
      options.boot.B = *est_B;
      options.boot.level = *est_level;
      options.boot.seed = est_seed_opt->count() ? *est_seed : env_seed();
      options.normality_threshold = *est_threshold;
      const triroc::MarkerReport report = triroc::analyze_marker(ds, options);
      std::cout << (*est_json ? triroc::report_to_json(report)
                              : triroc::report_to_text(report));
      if (*est_json) std::cout << "\n";
      if (!est_density->empty()) {
        std::ofstream out(*est_density);
        if (!out) throw triroc::DataError("cannot write '" + *est_density + "'");
        out << triroc::density_grid_csv(ds, *est_density_points);
      }
    });

    // ---------------------------------------------------------------- normality
    auto* normality =
        app.add_subcommand("normality", "Per-class Shapiro-Wilk normality screen");
    auto norm_in = std::make_shared<InputArgs>();
    norm_in->attach(normality);
    auto norm_threshold = std::make_shared<double>(0.05);
    normality->add_option("--threshold", *norm_threshold, "p-value threshold")
        ->capture_default_str();
    auto norm_json = std::make_shared<bool>(false);
    normality->add_flag("--json", *norm_json, "JSON output");

    normality->callback([=] {
      const triroc::MarkerDataset ds = norm_in->load_oriented();
      const triroc::NormalityCheck check =
          triroc::check_normality(ds.sample, *norm_threshold);
      if (*norm_json) {
        njson per_class = njson::array();
        for (int k = 0; k < 3; ++k)
          per_class.push_back(
              njson{{"label", ds.class_labels[static_cast<std::size_t>(k)]},
                    {"n", ds.sample.cls(k + 1).size()},
                    {"W", check.per_class[static_cast<std::size_t>(k)].W},
                    {"p_value", check.per_class[static_cast<std::size_t>(k)].p_value}});
        std::cout << njson{{"marker", ds.marker_name},
                           {"threshold", check.threshold},
                           {"all_normal", check.all_normal},
                           {"per_class", std::move(per_class)}}
                         .dump(2)
                  << "\n";
      } else {
        std::printf("marker: %s\n", ds.marker_name.c_str());
        for (int k = 0; k < 3; ++k)
          std::printf("%-12s n=%-4zu W=%.4f  p=%.4g\n",
                      ds.class_labels[static_cast<std::size_t>(k)].c_str(),
                      ds.sample.cls(k + 1).size(),
                      check.per_class[static_cast<std::size_t>(k)].W,
                      check.per_class[static_cast<std::size_t>(k)].p_value);
        std::printf("all classes normal at %g: %s\n", check.threshold,
                    check.all_normal ? "yes" : "no");
      }
    });

    // ---------------------------------------------------------------- test
    auto* test = app.add_subcommand(
        "test", "Pooled-bootstrap test of 'marker carries no class information'");
    auto test_in = std::make_shared<InputArgs>();
    test_in->attach(test);
    auto test_methods =
        std::make_shared<std::vector<std::string>>(std::vector<std::string>{"auto", "kernel",
                                                                            "empirical"});
    test->add_option("--methods", *test_methods,
                     "estimators: auto, normal, boxcox, kernel, empirical")
        ->delimiter(',');
    auto test_alpha = std::make_shared<double>(0.05);
    auto test_B = std::make_shared<int>(500);
    auto test_seed = std::make_shared<std::uint64_t>(0);
    auto test_threshold = std::make_shared<double>(0.05);
    test->add_option("--alpha", *test_alpha, "test size")->capture_default_str();
    test->add_option("--B", *test_B, "bootstrap resamples")->capture_default_str();
    auto* test_seed_opt = test->add_option("--seed", *test_seed, "bootstrap seed");
    test->add_option("--normality-threshold", *test_threshold,
                     "Shapiro-Wilk p-value below which 'auto' switches to the power transform")
        ->capture_default_str();
    auto test_json = std::make_shared<bool>(false);
    test->add_flag("--json", *test_json, "JSON output");

    test->callback([=] {
      const triroc::MarkerDataset ds = test_in->load_oriented();
      triroc::BootstrapConfig cfg;
      cfg.B = *test_B;
      cfg.alpha = *test_alpha;
      cfg.seed = test_seed_opt->count() ? *test_seed : env_seed();

      const triroc::NormalityCheck check =
          triroc::check_normality(ds.sample, *test_threshold);
      const Method parametric =
          check.all_normal ? Method::kNormal : Method::kBoxCoxNormal;
      std::vector<Method> methods;
      for (const triroc::MethodChoice choice : parse_methods(*test_methods)) {
        Method m = Method::kNormal;
        switch (choice) {
          case triroc::MethodChoice::kAuto:
            m = parametric;
            break;
          case triroc::MethodChoice::kNormal:
            m = Method::kNormal;
            break;
          case triroc::MethodChoice::kBoxCox:
            m = Method::kBoxCoxNormal;
            break;
          case triroc::MethodChoice::kKernel:
            m = Method::kKernel;
            break;
          case triroc::MethodChoice::kEmpirical:
            m = Method::kEmpirical;
            break;
        }
        if (std::find(methods.begin(), methods.end(), m) == methods.end())
          methods.push_back(m);
      }

      std::vector<triroc::TestResult> results;
      for (const Method m : methods) {
        if (m != Method::kEmpirical)
          results.push_back(triroc::null_test(ds.sample, Measure::kOvl, m, cfg));
        results.push_back(triroc::null_test(ds.sample, Measure::kVus, m, cfg));
      }

      if (*test_json) {
        njson rows = njson::array();
        for (const auto& r : results)
          rows.push_back(njson{
              {"statistic", stat_name(r.measure, r.method)},
              {"measure", triroc::to_string(r.measure)},
              {"method", triroc::to_string(r.method)},
              {"value", r.statistic},
              {"null_quantile", r.null_quantile},
              {"direction", r.direction == triroc::TailDirection::kLower ? "lower" : "upper"},
              {"reject", r.reject},
              {"B", r.B},
              {"redraws", r.redraws}});
        std::cout << njson{{"marker", ds.marker_name},
                           {"alpha", *test_alpha},
                           {"seed", cfg.seed},
                           {"tests", std::move(rows)}}
                         .dump(2)
                  << "\n";
      } else {
        std::printf("marker: %s  (alpha = %g, B = %d, seed = %llu)\n", ds.marker_name.c_str(),
                    *test_alpha, *test_B, static_cast<unsigned long long>(cfg.seed));
        std::printf("%-10s %-9s %-14s %-9s %s\n", "statistic", "estimate", "null-quantile",
                    "direction", "reject H0");
        for (const auto& r : results)
          std::printf("%-10s %-9.4f %-14.4f %-9s %s\n",
                      stat_name(r.measure, r.method).c_str(), r.statistic, r.null_quantile,
                      r.direction == triroc::TailDirection::kLower ? "lower" : "upper",
                      r.reject ? "yes" : "no");
      }
    });

    // ---------------------------------------------------------------- simulate
    auto* simulate = app.add_subcommand(
        "simulate", "Rejection-rate study for a built-in or user-defined scenario");
    auto sim_scenario = std::make_shared<std::string>();
    simulate->add_option("--scenario", *sim_scenario, "built-in scenario id or scenario file")
        ->required();
    auto sim_desk = std::make_shared<bool>(false);
    auto sim_full = std::make_shared<bool>(false);
    auto* sd = simulate->add_flag("--desk", *sim_desk,
                                  "reduced scale: reps=400, B=200, equal-size designs only");
    simulate->add_flag("--full", *sim_full, "published scale: reps=1000, B=500, all sizes")
        ->excludes(sd);
    auto sim_reps = std::make_shared<int>(0);
    auto sim_B = std::make_shared<int>(0);
    auto sim_alpha = std::make_shared<double>(0.05);
    auto sim_seed = std::make_shared<std::uint64_t>(0);
    auto sim_threads = std::make_shared<int>(0);
    auto sim_sizes = std::make_shared<std::string>();
    auto sim_stats = std::make_shared<std::vector<std::string>>();
    auto* sim_reps_opt = simulate->add_option("--reps", *sim_reps, "replications per size");
    auto* sim_B_opt = simulate->add_option("--B", *sim_B, "bootstrap resamples per test");
    auto* sim_alpha_opt = simulate->add_option("--alpha", *sim_alpha, "test size");
    auto* sim_seed_opt = simulate->add_option("--seed", *sim_seed, "study seed");
    simulate->add_option("--threads", *sim_threads, "worker threads (0 = auto)");
    simulate->add_option("--sizes", *sim_sizes,
                         "size triples, e.g. \"20,20,20; 50,50,50\" (overrides the scenario)");
    simulate->add_option("--stats", *sim_stats,
                         "columns: ovl-param, vus-param, ovl-kernel, vus-kernel, vus-emp")
        ->delimiter(',');
    auto sim_out = std::make_shared<std::string>("table");
    simulate->add_option("--out", *sim_out, "output format: table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}));

    simulate->callback([=] {
      triroc::ScenarioConfig scenario;
      if (const triroc::ScenarioConfig* builtin = triroc::find_scenario(*sim_scenario)) {
        scenario = *builtin;
      } else if (std::filesystem::exists(*sim_scenario)) {
        scenario = triroc::load_scenario_file(*sim_scenario);
      } else {
        std::string msg = "--scenario: '" + *sim_scenario +
                          "' is neither a built-in scenario nor a file; built-ins:";
        for (const auto& sc : triroc::builtin_scenarios()) msg += " " + sc.id;
        throw std::invalid_argument(msg);
      }

      triroc::StudyOverrides ov;
      if (*sim_desk || *sim_full) {
        ov.reps = *sim_desk ? 400 : 1000;
        ov.B = *sim_desk ? 200 : 500;
        if (*sim_desk && scenario.sizes == kCanonicalSizes)
          ov.sizes = std::vector<std::array<int, 3>>{{20, 20, 20}, {50, 50, 50},
                                                     {100, 100, 100}};
      }
      if (sim_reps_opt->count()) ov.reps = *sim_reps;
      if (sim_B_opt->count()) ov.B = *sim_B;
      if (sim_alpha_opt->count()) ov.alpha = *sim_alpha;
      ov.seed = sim_seed_opt->count() ? *sim_seed : env_seed();
      ov.threads = *sim_threads;
      if (!sim_sizes->empty()) ov.sizes = parse_sizes_flag(*sim_sizes);
      if (!sim_stats->empty()) ov.stats = parse_stats(*sim_stats);

      const triroc::PowerStudyResult result = triroc::run_power_study(scenario, ov);
      if (*sim_out == "csv")
        std::cout << triroc::to_csv(result);
      else if (*sim_out == "json")
        std::cout << triroc::to_json(result) << "\n";
      else
        std::cout << triroc::render_text(result);
    });

    // ---------------------------------------------------------------- reproduce-table
    auto* reproduce = app.add_subcommand(
        "reproduce-table", "Re-run a published table next to its reference values");
    auto table_id = std::make_shared<std::string>();
    reproduce->add_option("table-id", *table_id, "e.g. bias/tt1 or power/normal-location")
        ->required();
    auto rep_desk = std::make_shared<bool>(false);
    auto rep_full = std::make_shared<bool>(false);
    auto* rd = reproduce->add_flag("--desk", *rep_desk,
                                   "reduced scale: reps=400, B=200, 3 sizes (default)");
    reproduce->add_flag("--full", *rep_full, "published scale: reps=1000, B=500, all sizes")
        ->excludes(rd);
    auto rep_reps = std::make_shared<int>(0);
    auto rep_B = std::make_shared<int>(0);
    auto rep_seed = std::make_shared<std::uint64_t>(0);
    auto rep_threads = std::make_shared<int>(0);
    auto* rep_reps_opt = reproduce->add_option("--reps", *rep_reps, "replications per size");
    auto* rep_B_opt = reproduce->add_option("--B", *rep_B, "bootstrap resamples per test");
    auto* rep_seed_opt = reproduce->add_option("--seed", *rep_seed, "study seed");
    reproduce->add_option("--threads", *rep_threads, "worker threads (0 = auto)");
    auto rep_out = std::make_shared<std::string>("table");
    reproduce->add_option("--out", *rep_out, "output format: table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}));

    reproduce->callback([=] {
      const triroc::StudyScale scale =
          *rep_full ? triroc::StudyScale::kFull : triroc::StudyScale::kDesk;
      triroc::StudyOverrides ov;
      if (rep_reps_opt->count()) ov.reps = *rep_reps;
      if (rep_B_opt->count()) ov.B = *rep_B;
      ov.seed = rep_seed_opt->count() ? *rep_seed : env_seed();
      ov.threads = *rep_threads;
      const triroc::TableResult table = triroc::reproduce_table(*table_id, scale, ov);
      if (*rep_out == "csv")
        std::cout << triroc::to_csv(table);
      else if (*rep_out == "json")
        std::cout << triroc::to_json(table) << "\n";
      else
        std::cout << triroc::render_text(table);
    });

    // ---------------------------------------------------------------- listings
    auto* list_sc = app.add_subcommand("list-scenarios", "Built-in simulation scenarios");
    list_sc->callback([] {
      std::printf("%-28s %-36s %-8s %-8s\n", "id", "classes (f1 | f2 | f3)", "OVL", "VUS");
      for (const auto& sc : triroc::builtin_scenarios()) {
        const std::string f =
            sc.f1.to_string() + " | " + sc.f2.to_string() + " | " + sc.f3.to_string();
        std::printf("%-28s %-36s %-8.4f %-8.4f\n", sc.id.c_str(), f.c_str(),
                    sc.theoretical_ovl.value_or(std::nan("")),
                    sc.theoretical_vus.value_or(std::nan("")));
      }
    });

    auto* list_tables = app.add_subcommand("list-tables", "Reproducible published tables");
    list_tables->callback([] {
      for (const auto& id : triroc::reproducible_table_ids()) std::printf("%s\n", id.c_str());
    });

    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const triroc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const triroc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
