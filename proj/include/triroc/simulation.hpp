#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triroc/distributions.hpp"
#include "triroc/inference.hpp"

namespace triroc {

// One simulation scenario: three class distributions plus study defaults.
// theoretical_* are populated for builtin scenarios (and validated against
// quadrature by the test suite); user scenarios may omit them.
struct ScenarioConfig {
  std::string id;
  DistributionSpec f1, f2, f3;
  std::optional<double> theoretical_ovl, theoretical_vus;
  std::vector<std::array<int, 3>> sizes;
  int reps = 1000;
  BootstrapConfig boot{};  // B, alpha, level for the per-replication tests/CIs
  std::uint64_t seed = 0;

  // NORMAL when all three classes are plain normal, BOXCOX_NORMAL otherwise.
  Method parametric_method() const;
};

// The five statistics tracked by the power studies, in column order.
enum class StatId : int {
  kOvlParametric = 0,
  kVusParametric = 1,
  kOvlKernel = 2,
  kVusKernel = 3,
  kVusEmpirical = 4,
};
inline constexpr int kStatCount = 5;

// Column label, e.g. "OVL_N", "VUS_N^BC", "OVL_K", "VUS_E".
std::string stat_label(StatId stat, Method parametric);

// Power scenarios (17: four null cases and their alternatives across normal,
// lognormal, gamma, cross-family and mixture settings) followed by the seven
// bias-study scenarios tt1-1 .. tt1-7.
std::span<const ScenarioConfig> builtin_scenarios();
std::span<const ScenarioConfig> builtin_power_scenarios();
std::span<const ScenarioConfig> builtin_bias_scenarios();
const ScenarioConfig* find_scenario(std::string_view id);  // nullptr if unknown

struct StudyOverrides {
  std::optional<std::vector<std::array<int, 3>>> sizes;
  std::optional<std::array<bool, kStatCount>> stats;  // which columns to run
  std::optional<int> reps;
  std::optional<int> B;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0 = hardware default (TRIROC_THREADS overrides)
};

struct PowerCell {
  double proportion = 0.0;  // rejection fraction among reps_used
  double mc_se = 0.0;       // sqrt(p(1-p)/reps_used)
  int reps_used = 0;
  int failures = 0;         // replications excluded for this statistic
  bool flagged = false;     // failures > 1% of reps
};

struct PowerRow {
  std::array<int, 3> sizes{};
  std::array<std::optional<PowerCell>, kStatCount> cells;
};

struct PowerStudyResult {
  std::string scenario_id;
  Method parametric = Method::kNormal;
  std::vector<PowerRow> rows;
  int reps = 0;
  int B = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

// Rejection proportion of the null test per statistic, per size triple.
// Replication r depends only on (seed, scenario id, size index, r), so runs
// are bit-identical across thread counts and row/replication order.
PowerStudyResult run_power_study(const ScenarioConfig& scenario,
                                 const StudyOverrides& overrides = {});

struct BiasCell {
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;  // fraction of percentile CIs containing the truth
  int reps_used = 0;
  int failures = 0;
};

struct BiasRow {
  std::string scenario_id;
  int n = 0;  // common per-class size
  std::optional<BiasCell> parametric, kernel;
};

struct BiasStudyResult {
  std::vector<BiasRow> rows;
  int reps = 0;
  int B = 0;
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct BiasOverrides {
  std::optional<std::vector<int>> sizes;  // common n per class
  bool parametric = true;
  bool kernel = true;
  std::optional<int> reps;
  std::optional<int> B;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

// OVL bias / RMSE / CI coverage against the scenario's theoretical value
// (throws if a scenario lacks one) for the parametric and kernel estimators.
BiasStudyResult run_bias_study(std::span<const ScenarioConfig> scenarios,
                               const BiasOverrides& overrides = {});

enum class StudyScale { kDesk, kFull };

struct TableCell {
  std::optional<double> computed, reference, mc_se;
};

struct TableResult {
  std::string table_id;
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  std::vector<std::array<int, 3>> row_sizes;  // class sizes behind each row
  std::vector<std::vector<TableCell>> cells;  // row major
};

// Re-runs a published table. ids: "bias/tt1" and "power/<scenario-id>".
// kDesk: reps=400, B=200, sizes {20^3, 50^3, 100^3}; kFull: reps=1000, B=500,
// all eight size triples. Reference columns carry the published values where
// available. Unknown ids throw std::invalid_argument listing the valid ids.
TableResult reproduce_table(std::string_view table_id, StudyScale scale,
                            const StudyOverrides& overrides = {});

std::vector<std::string> reproducible_table_ids();

// key = value scenario text (see README): f1/f2/f3 distribution specs, sizes
// as semicolon-separated triples, reps/B/alpha/seed optional.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario_file(const std::string& path);

std::string render_text(const TableResult& table);
std::string render_text(const PowerStudyResult& result);
std::string render_text(const BiasStudyResult& result);
std::string to_csv(const TableResult& table);
std::string to_json(const TableResult& table);
std::string to_csv(const PowerStudyResult& result);
std::string to_json(const PowerStudyResult& result);
std::string to_csv(const BiasStudyResult& result);
std::string to_json(const BiasStudyResult& result);

namespace detail {
// Bias-study core with a pluggable estimate+CI function so tests can inject
// an oracle (constant truth) and assert bias 0 / rmse 0 / coverage 1.
using PointCiFn = std::function<EstimateResult(const ThreeClassSample&, Measure, Method,
                                               const BootstrapConfig&)>;
BiasStudyResult run_bias_study_with(std::span<const ScenarioConfig> scenarios,
                                    const BiasOverrides& overrides, const PointCiFn& fn);
int resolve_threads(int requested);

// Replication keying, exposed so tests can re-derive a replication's sample
// and bootstrap seed and verify the engine matches standalone null_test /
// bootstrap_ci calls bit for bit.
RandomStream replication_stream(std::uint64_t seed, std::string_view scenario_id,
                                std::size_t size_index, int replication);
ThreeClassSample draw_replication_sample(const ScenarioConfig& scenario,
                                         const std::array<int, 3>& sizes, RandomStream rep);
std::uint64_t replication_test_seed(RandomStream rep);
}  // namespace detail

}  // namespace triroc
