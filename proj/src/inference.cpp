#include "triroc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace triroc {

namespace detail {

RandomStream iteration_stream(std::uint64_t seed, std::uint64_t op_tag,
                              std::uint64_t iteration, std::uint64_t attempt) {
  return RandomStream(seed).substream(op_tag).substream(iteration).substream(attempt);
}

ThreeClassSample resample_stratified(const ThreeClassSample& sample, RandomStream stream) {
  ThreeClassSample out;
  for (int k = 1; k <= 3; ++k) {
    const auto& src = sample.cls(k);
    auto& dst = (k == 1 ? out.class1 : k == 2 ? out.class2 : out.class3);
    dst.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i)
      dst.push_back(src[stream.next_index(src.size())]);
  }
  return out;
}

ThreeClassSample resample_pooled(const ThreeClassSample& sample, RandomStream stream) {
  std::vector<double> pool;
  pool.reserve(sample.total());
  for (int k = 1; k <= 3; ++k)
    pool.insert(pool.end(), sample.cls(k).begin(), sample.cls(k).end());

  ThreeClassSample out;
  for (int k = 1; k <= 3; ++k) {
    const std::size_t n = sample.cls(k).size();
    auto& dst = (k == 1 ? out.class1 : k == 2 ? out.class2 : out.class3);
    dst.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      dst.push_back(pool[stream.next_index(pool.size())]);
  }
  return out;
}

}  // namespace detail

namespace {

void check_config(const BootstrapConfig& cfg) {
  if (cfg.B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw std::invalid_argument("bootstrap: level must be in (0,1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("bootstrap: alpha must be in (0,1)");
}

// B replicate statistics under redraw-on-failure: iteration b, attempt a owns
// the stream derived from (seed, op_tag, b, a), so results are reproducible
// and independent of evaluation order. A replicate whose estimator degenerates
// (e.g. a constant resampled class) is re-drawn; the global attempt budget is
// 10*B.
template <typename MakeSample>
std::vector<double> replicate_stats(const ThreeClassSample& sample, Measure measure,
                                    Method method, const BootstrapConfig& cfg,
                                    std::uint64_t op_tag, const MakeSample& make,
                                    int* redraws) {
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(cfg.B));
  const long budget = 10L * cfg.B;
  long attempts = 0;
  *redraws = 0;
  for (int b = 0; b < cfg.B; ++b) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (++attempts > budget) {
        std::ostringstream msg;
        msg << "bootstrap: resampling failed too often (" << attempts - 1
            << " attempts for B = " << cfg.B << ")";
        throw NumericalError(msg.str());
      }
      const ThreeClassSample resampled =
          make(sample, detail::iteration_stream(cfg.seed, op_tag,
                                                static_cast<std::uint64_t>(b), attempt));
      try {
        stats.push_back(estimate(resampled, measure, method).value);
        break;
      } catch (const NumericalError&) {
        ++*redraws;
      } catch (const DataError&) {
        ++*redraws;
      }
    }
  }
  return stats;
}

}  // namespace

EstimateResult bootstrap_ci(const ThreeClassSample& sample, Measure measure,
                            Method method, const BootstrapConfig& cfg) {
  check_config(cfg);
  EstimateResult result = estimate(sample, measure, method);
  int redraws = 0;
  std::vector<double> stats =
      replicate_stats(sample, measure, method, cfg, detail::kCiTag,
                      detail::resample_stratified, &redraws);
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - cfg.level);
  ConfidenceInterval ci;
  ci.lo = sample_quantile_sorted(stats, tail);
  ci.hi = sample_quantile_sorted(stats, 1.0 - tail);
  ci.level = cfg.level;
  ci.B = cfg.B;
  result.ci = ci;
  result.redraws = redraws;
  return result;
}

TestResult null_test(const ThreeClassSample& sample, Measure measure, Method method,
                     const BootstrapConfig& cfg) {
  check_config(cfg);
  const EstimateResult observed = estimate(sample, measure, method);
  int redraws = 0;
  std::vector<double> stats =
      replicate_stats(sample, measure, method, cfg, detail::kNullTag,
                      detail::resample_pooled, &redraws);
  std::sort(stats.begin(), stats.end());

  TestResult result;
  result.measure = measure;
  result.method = method;
  result.statistic = observed.value;
  result.B = cfg.B;
  result.redraws = redraws;
  if (measure == Measure::kOvl) {
    // Smaller overlap than the pooled null -> separation.
    result.direction = TailDirection::kLower;
    result.null_quantile = sample_quantile_sorted(stats, cfg.alpha);
    result.reject = observed.value < result.null_quantile;
  } else {
    result.direction = TailDirection::kUpper;
    result.null_quantile = sample_quantile_sorted(stats, 1.0 - cfg.alpha);
    result.reject = observed.value > result.null_quantile;
  }
  return result;
}

std::string interpret_ovl(double ovl) {
  if (!(ovl >= 0.0 && ovl <= 1.0))
    throw std::invalid_argument("interpret_ovl: value must be in [0,1]");
  if (ovl == 1.0) return "No differentiation";
  if (ovl >= 0.75) return "Poor";
  if (ovl >= 0.55) return "Good";
  if (ovl >= 0.35) return "Very good";
  return "Excellent";
}

}  // namespace triroc
