#include "triroc/shapiro.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "triroc/common.hpp"
#include "triroc/numerics.hpp"

namespace triroc {

namespace {

// Ascending-power polynomial, Horner form.
double polyval(const double* coef, int terms, double x) {
  double v = 0.0;
  for (int i = terms - 1; i >= 0; --i) v = v * x + coef[i];
  return v;
}

}  // namespace

// Royston's AS R94 approximation: Blom scores m_i = Phi^-1((i-0.375)/(n+0.25))
// normalized to weights, with polynomial end corrections in u = 1/sqrt(n),
// then a lognormal approximation to the null distribution of W (exact for
// n = 3).
ShapiroResult shapiro_wilk(std::span<const double> data) {
  const int n = static_cast<int>(data.size());
  if (n < 3 || n > 5000)
    throw DataError("shapiro_wilk: sample size must be between 3 and 5000");

  std::vector<double> x(data.begin(), data.end());
  for (double v : x)
    if (!std::isfinite(v)) throw DataError("shapiro_wilk: non-finite observation");
  std::sort(x.begin(), x.end());
  if (x.front() == x.back())
    throw DataError("shapiro_wilk: sample has zero variance");

  std::vector<double> m(static_cast<std::size_t>(n));
  double summ2 = 0.0;
  for (int i = 0; i < n; ++i) {
    m[static_cast<std::size_t>(i)] =
        norm_quantile((static_cast<double>(i + 1) - 0.375) /
                      (static_cast<double>(n) + 0.25));
    summ2 += m[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(i)];
  }

  std::vector<double> a(static_cast<std::size_t>(n));
  if (n == 3) {
    const double sqrth = std::sqrt(0.5);
    a[0] = -sqrth;
    a[1] = 0.0;
    a[2] = sqrth;
  } else {
    const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
    static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    const double ssq = std::sqrt(summ2);
    const double an = polyval(c1, 6, rsn) + m[static_cast<std::size_t>(n - 1)] / ssq;
    int i1;
    double fac;
    double an1 = 0.0;
    if (n > 5) {
      i1 = 3;
      an1 = polyval(c2, 6, rsn) + m[static_cast<std::size_t>(n - 2)] / ssq;
      fac = std::sqrt((summ2 - 2.0 * m[static_cast<std::size_t>(n - 1)] *
                                   m[static_cast<std::size_t>(n - 1)] -
                       2.0 * m[static_cast<std::size_t>(n - 2)] *
                           m[static_cast<std::size_t>(n - 2)]) /
                      (1.0 - 2.0 * an * an - 2.0 * an1 * an1));
      a[static_cast<std::size_t>(n - 2)] = an1;
      a[1] = -an1;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * m[static_cast<std::size_t>(n - 1)] *
                                   m[static_cast<std::size_t>(n - 1)]) /
                      (1.0 - 2.0 * an * an));
    }
    a[static_cast<std::size_t>(n - 1)] = an;
    a[0] = -an;
    for (int i = i1; i <= n - i1 + 1; ++i)
      a[static_cast<std::size_t>(i - 1)] = m[static_cast<std::size_t>(i - 1)] / fac;
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ssd = 0.0, num = 0.0;
  for (int i = 0; i < n; ++i) {
    ssd += (x[static_cast<std::size_t>(i)] - mean) * (x[static_cast<std::size_t>(i)] - mean);
    num += a[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  }
  double W = num * num / ssd;
  W = std::clamp(W, 0.0, 1.0);

  double p;
  if (n == 3) {
    // Exact null distribution for n = 3.
    const double pi6 = 6.0 / 3.14159265358979323846;
    const double stqr = std::asin(std::sqrt(0.75));
    p = pi6 * (std::asin(std::sqrt(W)) - stqr);
    p = std::clamp(p, 0.0, 1.0);
  } else if (W >= 1.0 - 1e-15) {
    p = 1.0;
  } else if (n <= 11) {
    const double fn = static_cast<double>(n);
    const double gamma = 0.459 * fn - 2.273;
    const double arg = gamma - std::log(1.0 - W);
    if (!(arg > 0.0)) return ShapiroResult{W, 1.0};
    const double w = -std::log(arg);
    const double mu = 0.5440 + fn * (-0.39978 + fn * (0.025054 - fn * 0.0006714));
    const double sigma = std::exp(1.3822 + fn * (-0.77857 + fn * (0.062767 - fn * 0.0020322)));
    p = norm_cdf(-(w - mu) / sigma);
  } else {
    const double y = std::log(static_cast<double>(n));
    const double w = std::log(1.0 - W);
    const double mu = -1.5861 + y * (-0.31082 + y * (-0.083751 + y * 0.0038915));
    const double sigma = std::exp(-0.4803 + y * (-0.082676 + y * 0.0030302));
    p = norm_cdf(-(w - mu) / sigma);
  }
  return ShapiroResult{W, p};
}

}  // namespace triroc
