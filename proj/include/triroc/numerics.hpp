#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "triroc/common.hpp"

namespace triroc {

// Closed finite interval [lo, hi], lo < hi.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// φ and Φ for the standard normal; Φ via erfc keeps full relative accuracy in
// the lower tail, which the kernel CDF sums and the trinormal integrand rely on.
double norm_pdf(double x);
double norm_cdf(double x);

// Φ⁻¹(p) for p in (0,1): bisection on [-40, 40] followed by Newton polish.
// |Φ(result) - p| <= 1e-12 away from the extreme tails.
double norm_quantile(double p);

struct QuadratureResult {
  double value = 0.0;
  double error_bound = 0.0;   // estimated absolute error
  std::size_t panels = 0;     // Gauss-Kronrod panels evaluated
  bool converged = false;
};

// Globally adaptive Gauss-Kronrod 15 on [domain.lo, domain.hi]: the panel with
// the largest error estimate is split first, so integrable endpoint
// singularities (e.g. gamma densities with shape < 1) converge within budget.
// Throws NumericalError if the integrand returns a non-finite value (message
// names the abscissa) or the panel budget is exhausted (message carries the
// best estimate and its error bound).
QuadratureResult integrate_adaptive_full(const std::function<double(double)>& f,
                                         Interval domain, double abs_tol = 1e-9,
                                         std::size_t max_panels = 100000);

double integrate_adaptive(const std::function<double(double)>& f, Interval domain,
                          double abs_tol = 1e-9, std::size_t max_panels = 100000);

struct MaximizeResult {
  double argmax = 0.0;
  double max = 0.0;
};

// Scan a uniform grid (grid_points including endpoints), then golden-section
// refine within the bracketing cell pair until the bracket width is below
// x_tol. Non-finite g values are treated as -inf; if no grid point is finite,
// throws NumericalError. Finds a local maximum near the best grid point, which
// is the global one when the grid resolves g's structure.
MaximizeResult maximize_scalar(const std::function<double(double)>& g, Interval domain,
                               double x_tol = 1e-6, int grid_points = 1001);

// Same refinement step, but the uniform-grid values were computed by the
// caller (e.g. a batched evaluation). grid_values[i] corresponds to
// domain.lo + i * (domain.hi - domain.lo) / (grid_values.size() - 1).
MaximizeResult refine_grid_maximum(const std::function<double(double)>& g, Interval domain,
                                   std::span<const double> grid_values, double x_tol = 1e-6);

// Type-7 sample quantile: h = (n-1)p, linear interpolation between order
// statistics. data need not be sorted (a sorted copy is made); p in [0, 1].
double sample_quantile(std::span<const double> data, double p);

// Same, but data must already be sorted ascending (no copy).
double sample_quantile_sorted(std::span<const double> sorted, double p);

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sd_mle = 0.0;     // divisor n
  double sd_sample = 0.0;  // divisor n-1
  double iqr = 0.0;        // type-7 q(0.75) - q(0.25)
  double min = 0.0;
  double max = 0.0;
};

// Requires n >= 2 and all values finite; throws DataError otherwise.
SampleStats summarize(std::span<const double> data);

}  // namespace triroc
