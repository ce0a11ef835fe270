#include "triroc/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace triroc {

const std::vector<double>& ThreeClassSample::cls(int k) const {
  switch (k) {
    case 1: return class1;
    case 2: return class2;
    case 3: return class3;
    default: throw std::invalid_argument("class index must be 1, 2 or 3");
  }
}

std::string to_string(Measure m) { return m == Measure::kOvl ? "OVL" : "VUS"; }

std::string to_string(Method m) {
  switch (m) {
    case Method::kNormal: return "normal";
    case Method::kBoxCoxNormal: return "boxcox-normal";
    case Method::kKernel: return "kernel";
    case Method::kEmpirical: return "empirical";
  }
  return "?";
}

namespace {

std::atomic<std::uint64_t> g_clamp_events{0};

// Estimates live in [0,1]; exceedances beyond floating noise are counted so
// the tests can prove clamping is a formality, not a correction.
double clamp01(double v) {
  if (v < -1e-6 || v > 1.0 + 1e-6)
    g_clamp_events.fetch_add(1, std::memory_order_relaxed);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

namespace detail {
std::uint64_t clamp_events() { return g_clamp_events.load(std::memory_order_relaxed); }
void reset_clamp_events() { g_clamp_events.store(0, std::memory_order_relaxed); }
}  // namespace detail

NormalTriple fit_normal_triple(const ThreeClassSample& sample) {
  NormalTriple fit;
  for (int k = 1; k <= 3; ++k) {
    const SampleStats stats = summarize(sample.cls(k));
    if (!(stats.sd_mle > 0.0)) {
      std::ostringstream msg;
      msg << "fit_normal_triple: class " << k << " has zero variance";
      throw NumericalError(msg.str());
    }
    fit.mu[static_cast<std::size_t>(k - 1)] = stats.mean;
    fit.sigma[static_cast<std::size_t>(k - 1)] = stats.sd_mle;
  }
  return fit;
}

double vus_normal(const NormalTriple& fit) {
  const double a = fit.a(), b = fit.b(), c = fit.c(), d = fit.d();
  const double v = integrate_adaptive(
      [=](double s) { return norm_cdf(a * s - b) * norm_cdf(-c * s + d) * norm_pdf(s); },
      Interval{-9.0, 9.0}, 1e-8);
  return clamp01(v);
}

double ovl_normal(const NormalTriple& fit) {
  const double mu_lo = *std::min_element(fit.mu.begin(), fit.mu.end());
  const double mu_hi = *std::max_element(fit.mu.begin(), fit.mu.end());
  const double sd_hi = *std::max_element(fit.sigma.begin(), fit.sigma.end());
  const double v = integrate_adaptive(
      [&](double x) {
        double m = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k)
          m = std::min(m, norm_pdf((x - fit.mu[static_cast<std::size_t>(k)]) /
                                   fit.sigma[static_cast<std::size_t>(k)]) /
                              fit.sigma[static_cast<std::size_t>(k)]);
        return m;
      },
      Interval{mu_lo - 9.0 * sd_hi, mu_hi + 9.0 * sd_hi}, 1e-8);
  return clamp01(v);
}

namespace {

constexpr double kBoxCoxLogBranch = 1e-10;

// Profile log-likelihood of the power transform: per-class MLE variances of
// the transformed values plus the Jacobian term.
double box_cox_loglik(const ThreeClassSample& sample, double shift, double sum_logs,
                      double lambda) {
  double l = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const auto& cls = sample.cls(k);
    const std::size_t n = cls.size();
    double mean = 0.0;
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ls = std::log(cls[i] + shift);
      // expm1 keeps the transform accurate through lambda -> 0.
      t[i] = std::abs(lambda) < kBoxCoxLogBranch ? ls : std::expm1(lambda * ls) / lambda;
      mean += t[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : t) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(n);
    if (!(var > 1e-300) || !std::isfinite(var))
      return -std::numeric_limits<double>::infinity();
    l -= 0.5 * static_cast<double>(n) * std::log(var);
  }
  l += (lambda - 1.0) * sum_logs;
  return l;
}

}  // namespace

BoxCoxFit fit_box_cox(const ThreeClassSample& sample) {
  double min_value = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 3; ++k) {
    const auto& cls = sample.cls(k);
    if (cls.size() < 2)
      throw NumericalError("fit_box_cox: each class needs at least 2 observations");
    for (double x : cls) {
      if (!std::isfinite(x)) throw DataError("fit_box_cox: non-finite observation");
      min_value = std::min(min_value, x);
    }
    if (*std::max_element(cls.begin(), cls.end()) ==
        *std::min_element(cls.begin(), cls.end()))
      throw NumericalError("fit_box_cox: a class is constant");
  }

  BoxCoxFit fit;
  fit.shift = min_value <= 0.0 ? 1.0 - min_value : 0.0;
  fit.search_domain = Interval{-5.0, 5.0};

  // Per-observation log values; the Jacobian term needs their grand sum.
  std::array<std::vector<double>, 3> logs;
  double sum_logs = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const auto& cls = sample.cls(k);
    auto& ls = logs[static_cast<std::size_t>(k - 1)];
    ls.reserve(cls.size());
    for (double x : cls) {
      ls.push_back(std::log(x + fit.shift));
      sum_logs += ls.back();
    }
  }

  // Batched grid scan: exp(lambda * log x) advances by one multiplication per
  // grid step, so the 1001-point profile costs one exp per observation total.
  constexpr int kGridPoints = 1001;
  const double step = 10.0 / static_cast<double>(kGridPoints - 1);
  std::array<std::vector<double>, 3> pow_cur, pow_step;
  for (std::size_t k = 0; k < 3; ++k) {
    pow_cur[k].reserve(logs[k].size());
    pow_step[k].reserve(logs[k].size());
    for (double ls : logs[k]) {
      pow_cur[k].push_back(std::exp(-5.0 * ls));
      pow_step[k].push_back(std::exp(step * ls));
    }
  }
  std::vector<double> grid_l(kGridPoints);
  std::vector<double> t;
  for (int j = 0; j < kGridPoints; ++j) {
    const double lambda = -5.0 + step * static_cast<double>(j);
    double l = (lambda - 1.0) * sum_logs;
    for (std::size_t k = 0; k < 3 && std::isfinite(l); ++k) {
      const std::size_t n = pow_cur[k].size();
      t.resize(n);
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        t[i] = std::abs(lambda) < kBoxCoxLogBranch ? logs[k][i]
                                                   : (pow_cur[k][i] - 1.0) / lambda;
        mean += t[i];
      }
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (double v : t) ss += (v - mean) * (v - mean);
      const double var = ss / static_cast<double>(n);
      if (!(var > 1e-300) || !std::isfinite(var))
        l = -std::numeric_limits<double>::infinity();
      else
        l -= 0.5 * static_cast<double>(n) * std::log(var);
    }
    grid_l[static_cast<std::size_t>(j)] = l;
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t n = pow_cur[k].size();
      for (std::size_t i = 0; i < n; ++i) pow_cur[k][i] *= pow_step[k][i];
    }
  }

  const auto exact = [&](double lambda) {
    return box_cox_loglik(sample, fit.shift, sum_logs, lambda);
  };
  const MaximizeResult best =
      refine_grid_maximum(exact, fit.search_domain, grid_l, 1e-6);
  fit.lambda = best.argmax;
  fit.loglik = best.max;
  fit.at_boundary = fit.lambda <= fit.search_domain.lo + 1e-5 ||
                    fit.lambda >= fit.search_domain.hi - 1e-5;
  return fit;
}

double apply_box_cox(const BoxCoxFit& fit, double x) {
  const double shifted = x + fit.shift;
  if (!(shifted > 0.0))
    throw NumericalError("apply_box_cox: value not positive after shift");
  const double ls = std::log(shifted);
  return std::abs(fit.lambda) < kBoxCoxLogBranch ? ls
                                                 : std::expm1(fit.lambda * ls) / fit.lambda;
}

ThreeClassSample apply_box_cox(const BoxCoxFit& fit, const ThreeClassSample& sample) {
  ThreeClassSample out;
  for (int k = 1; k <= 3; ++k) {
    const auto& src = sample.cls(k);
    auto& dst = (k == 1 ? out.class1 : k == 2 ? out.class2 : out.class3);
    dst.reserve(src.size());
    for (double x : src) dst.push_back(apply_box_cox(fit, x));
  }
  return out;
}

KernelEstimator::KernelEstimator(const ThreeClassSample& sample) {
  double h_max = 0.0;
  double g_min = std::numeric_limits<double>::infinity();
  double g_max = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 3; ++k) {
    const std::size_t idx = static_cast<std::size_t>(k - 1);
    const SampleStats stats = summarize(sample.cls(k));
    const double s = stats.sd_sample;
    const double r = stats.iqr / 1.349;
    // Silverman's robust spread; when one measure degenerates to zero the
    // other carries the bandwidth, when both do the class is constant.
    const double sigma = (s > 0.0 && r > 0.0) ? std::min(s, r) : std::max(s, r);
    if (!(sigma > 0.0)) {
      std::ostringstream msg;
      msg << "kernel fit: class " << k << " has no spread (constant data)";
      throw NumericalError(msg.str());
    }
    h_[idx] = std::pow(4.0 / 3.0, 0.2) * sigma *
              std::pow(static_cast<double>(stats.n), -0.2);
    data_[idx] = sample.cls(k);
    std::sort(data_[idx].begin(), data_[idx].end());
    h_max = std::max(h_max, h_[idx]);
    g_min = std::min(g_min, stats.min);
    g_max = std::max(g_max, stats.max);
  }
  support_ = Interval{g_min - 6.0 * h_max, g_max + 6.0 * h_max};
}

namespace {

// Gaussian kernel support cutoff: phi(8.6) ~ 7e-17, far below the quadrature
// tolerances, so terms outside the window are dropped (pdf) or counted as
// exactly 0/1 (cdf).
constexpr double kKernelCut = 8.6;

}  // namespace

double KernelEstimator::pdf(int k, double x) const {
  const std::size_t idx = static_cast<std::size_t>(k - 1);
  const auto& data = data_[idx];
  const double h = h_[idx];
  const auto lo = std::lower_bound(data.begin(), data.end(), x - kKernelCut * h);
  const auto hi = std::upper_bound(lo, data.end(), x + kKernelCut * h);
  double sum = 0.0;
  for (auto it = lo; it != hi; ++it) sum += norm_pdf((x - *it) / h);
  return sum / (static_cast<double>(data.size()) * h);
}

double KernelEstimator::cdf(int k, double x) const {
  const std::size_t idx = static_cast<std::size_t>(k - 1);
  const auto& data = data_[idx];
  const double h = h_[idx];
  const auto lo = std::lower_bound(data.begin(), data.end(), x - kKernelCut * h);
  const auto hi = std::upper_bound(lo, data.end(), x + kKernelCut * h);
  double sum = static_cast<double>(lo - data.begin());  // fully below: Phi ~ 1
  for (auto it = lo; it != hi; ++it) sum += norm_cdf((x - *it) / h);
  return sum / static_cast<double>(data.size());
}

double ovl_kernel(const KernelEstimator& fit) {
  const double v = integrate_adaptive(
      [&](double x) {
        return std::min({fit.pdf(1, x), fit.pdf(2, x), fit.pdf(3, x)});
      },
      fit.support(), 1e-7);
  return clamp01(v);
}

double vus_kernel(const KernelEstimator& fit) {
  const double v = integrate_adaptive(
      [&](double u) { return fit.cdf(1, u) * (1.0 - fit.cdf(3, u)) * fit.pdf(2, u); },
      fit.support(), 1e-7);
  return clamp01(v);
}

double vus_empirical(const ThreeClassSample& sample) {
  const std::size_t n1 = sample.class1.size(), n2 = sample.class2.size(),
                    n3 = sample.class3.size();
  if (n1 == 0 || n2 == 0 || n3 == 0)
    throw DataError("vus_empirical: every class needs at least one observation");
  for (int k = 1; k <= 3; ++k)
    for (double x : sample.cls(k))
      if (!std::isfinite(x)) throw DataError("vus_empirical: non-finite observation");

  std::vector<double> lo(sample.class1), hi(sample.class3);
  std::sort(lo.begin(), lo.end());
  std::sort(hi.begin(), hi.end());

  // Tie-aware U-statistic in sixths: 6 per strict ordering, 3 per single tie,
  // 1 per triple tie; exact integer arithmetic, so this matches the brute
  // force triple loop bit for bit.
  std::int64_t total6 = 0;
  for (const double b : sample.class2) {
    const auto lo_lower = std::lower_bound(lo.begin(), lo.end(), b);
    const auto lo_upper = std::upper_bound(lo_lower, lo.end(), b);
    const auto hi_lower = std::lower_bound(hi.begin(), hi.end(), b);
    const auto hi_upper = std::upper_bound(hi_lower, hi.end(), b);
    const std::int64_t lt1 = lo_lower - lo.begin();
    const std::int64_t eq1 = lo_upper - lo_lower;
    const std::int64_t eq3 = hi_upper - hi_lower;
    const std::int64_t gt3 = (hi.end() - hi_upper);
    total6 += 6 * lt1 * gt3 + 3 * eq1 * gt3 + 3 * lt1 * eq3 + eq1 * eq3;
  }
  return static_cast<double>(total6) /
         (6.0 * static_cast<double>(n1) * static_cast<double>(n2) *
          static_cast<double>(n3));
}

EstimateResult estimate(const ThreeClassSample& sample, Measure measure, Method method) {
  EstimateResult result;
  result.measure = measure;
  result.method = method;
  switch (method) {
    case Method::kNormal: {
      const NormalTriple fit = fit_normal_triple(sample);
      result.value = measure == Measure::kOvl ? ovl_normal(fit) : vus_normal(fit);
      break;
    }
    case Method::kBoxCoxNormal: {
      const BoxCoxFit bc = fit_box_cox(sample);
      const NormalTriple fit = fit_normal_triple(apply_box_cox(bc, sample));
      result.value = measure == Measure::kOvl ? ovl_normal(fit) : vus_normal(fit);
      break;
    }
    case Method::kKernel: {
      const KernelEstimator fit(sample);
      result.value = measure == Measure::kOvl ? ovl_kernel(fit) : vus_kernel(fit);
      break;
    }
    case Method::kEmpirical: {
      if (measure == Measure::kOvl)
        throw std::invalid_argument("estimate: empirical OVL is not defined");
      result.value = vus_empirical(sample);
      break;
    }
  }
  return result;
}

}  // namespace triroc
