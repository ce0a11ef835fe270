#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "triroc/estimators.hpp"
#include "triroc/inference.hpp"
#include "triroc/shapiro.hpp"

namespace triroc {

// A biomarker column split by diagnostic class, as loaded from CSV.
struct MarkerDataset {
  std::string marker_name;
  std::array<std::string, 3> class_labels;  // in severity order
  ThreeClassSample sample;
  bool oriented = false;
  int orientation_sign = +1;  // -1 once orient() negated the marker
  std::size_t rows_dropped = 0;
  std::vector<std::string> warnings;
};

// Loads value_column/class_column from a CSV file (RFC-4180-style quoting,
// header required). class_order gives the three labels from least to most
// severe. Rows with an empty value or class cell are dropped (counted);
// unknown labels or unparseable numbers raise DataError naming the row.
MarkerDataset load_csv(const std::string& path, const std::string& value_column,
                       const std::string& class_column,
                       const std::array<std::string, 3>& class_order);

// Ensures class means increase with severity: strictly decreasing means flip
// the sign of every value (sign recorded); non-monotone means only add a
// warning. Idempotent: an already-oriented dataset is returned unchanged.
MarkerDataset orient(MarkerDataset dataset);

struct NormalityCheck {
  std::array<ShapiroResult, 3> per_class;
  double threshold = 0.05;
  bool all_normal = false;
};

NormalityCheck check_normality(const ThreeClassSample& sample, double threshold = 0.05);

struct MarkerReport {
  std::string marker_name;
  std::array<std::string, 3> class_labels;
  std::array<std::size_t, 3> class_sizes{};
  int orientation_sign = +1;
  std::size_t rows_dropped = 0;
  NormalityCheck normality;
  Method parametric = Method::kNormal;      // picked by the normality gate
  std::optional<double> box_cox_lambda;     // present when parametric = BOXCOX
  std::optional<double> box_cox_shift;
  std::vector<EstimateResult> estimates;    // point + CI per (measure, method)
  std::vector<std::string> ovl_bands;       // interpret_ovl per OVL estimate
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;

  bool operator==(const MarkerReport&) const;
};

enum class MethodChoice { kAuto, kNormal, kBoxCox, kKernel, kEmpirical };

struct AnalyzeOptions {
  std::vector<MethodChoice> methods{MethodChoice::kAuto, MethodChoice::kKernel,
                                    MethodChoice::kEmpirical};
  BootstrapConfig boot{};
  double normality_threshold = 0.05;
};

// Full marker workup: per-class Shapiro-Wilk, parametric-variant selection,
// OVL/VUS point estimates with stratified bootstrap CIs for each requested
// method, and qualitative overlap bands.
MarkerReport analyze_marker(const MarkerDataset& dataset, const AnalyzeOptions& options);

// Lossless JSON round-trip (report_from_json(report_to_json(r)) == r).
std::string report_to_json(const MarkerReport& report);
MarkerReport report_from_json(const std::string& json_text);

std::string report_to_text(const MarkerReport& report);

// Per-class density curves on a uniform grid, for plotting: x plus fitted
// normal, transformed-normal (when applicable) and kernel densities.
std::string density_grid_csv(const MarkerDataset& dataset, int points = 201);

}  // namespace triroc
