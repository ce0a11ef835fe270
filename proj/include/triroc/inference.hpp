#pragma once

#include <cstdint>
#include <string>

#include "triroc/estimators.hpp"
#include "triroc/random.hpp"

namespace triroc {

struct BootstrapConfig {
  int B = 500;
  double level = 0.95;       // CI coverage level
  double alpha = 0.05;       // test size
  std::uint64_t seed = 0;
};

// Stratified percentile bootstrap: resample with replacement within each
// class, B replicate statistics, type-7 quantiles at (1-level)/2 and
// 1-(1-level)/2. Iterations derive independent substreams from
// (seed, iteration, attempt); a replicate that fails to estimate (e.g. a
// degenerate resample) is re-drawn, at most 10*B attempts in total.
EstimateResult bootstrap_ci(const ThreeClassSample& sample, Measure measure,
                            Method method, const BootstrapConfig& cfg);

enum class TailDirection { kLower, kUpper };

struct TestResult {
  Measure measure = Measure::kOvl;
  Method method = Method::kNormal;
  double statistic = 0.0;
  double null_quantile = 0.0;
  TailDirection direction = TailDirection::kLower;
  bool reject = false;
  int B = 0;
  int redraws = 0;
};

// Bootstrap test of "no class separation": all n1+n2+n3 values are pooled and
// three with-replacement samples of the original sizes are drawn from the
// pool, giving B null statistics. OVL rejects below the alpha quantile (small
// overlap = separation); VUS rejects above the 1-alpha quantile.
TestResult null_test(const ThreeClassSample& sample, Measure measure, Method method,
                     const BootstrapConfig& cfg);

// Qualitative band for an overlap value in [0,1] (throws outside):
//   1 -> "No differentiation", [0.75,1) -> "Poor", [0.55,0.75) -> "Good",
//   [0.35,0.55) -> "Very good", [0,0.35) -> "Excellent".
std::string interpret_ovl(double ovl);

namespace detail {
// Exposed for tests: one stratified / pooled resample drawn from a stream.
ThreeClassSample resample_stratified(const ThreeClassSample& sample, RandomStream stream);
ThreeClassSample resample_pooled(const ThreeClassSample& sample, RandomStream stream);

// Stream tags reserved by the inference layer (simulation reuses them so that
// engine-shared resamples match standalone calls bit for bit).
inline constexpr std::uint64_t kCiTag = 0x6349;    // bootstrap_ci iterations
inline constexpr std::uint64_t kNullTag = 0x7E57;  // null_test iterations
RandomStream iteration_stream(std::uint64_t seed, std::uint64_t op_tag,
                              std::uint64_t iteration, std::uint64_t attempt);
}  // namespace detail

}  // namespace triroc
