#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "triroc/distributions.hpp"
#include "triroc/estimators.hpp"
#include "triroc/random.hpp"

using namespace triroc;

namespace {

ThreeClassSample draw_sample(const DistributionSpec& f1, const DistributionSpec& f2,
                             const DistributionSpec& f3, std::size_t n,
                             std::uint64_t seed) {
  RandomStream root(seed);
  ThreeClassSample s;
  RandomStream s1 = root.substream(1), s2 = root.substream(2), s3 = root.substream(3);
  s.class1 = f1.sample(n, s1);
  s.class2 = f2.sample(n, s2);
  s.class3 = f3.sample(n, s3);
  return s;
}

ThreeClassSample affine(const ThreeClassSample& s, double a, double b) {
  ThreeClassSample out = s;
  for (auto* cls : {&out.class1, &out.class2, &out.class3})
    for (double& x : *cls) x = a * x + b;
  return out;
}

// Reference implementation of the three-sample U-statistic: every (i,j,k)
// triple scored 1, 1/2, 1/6 for strict order, one tie, triple tie. Counted
// in integer sixths with a single final division, so agreement with the
// production estimator can be asserted bit for bit.
double vus_brute_force(const ThreeClassSample& s) {
  std::int64_t total6 = 0;
  for (double a : s.class1)
    for (double b : s.class2)
      for (double c : s.class3) {
        if (a < b && b < c)
          total6 += 6;
        else if ((a == b && b < c) || (a < b && b == c))
          total6 += 3;
        else if (a == b && b == c)
          total6 += 1;
      }
  return static_cast<double>(total6) /
         (6.0 * static_cast<double>(s.class1.size()) *
          static_cast<double>(s.class2.size()) * static_cast<double>(s.class3.size()));
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("normal triple fit uses MLE variances") {
    const ThreeClassSample s{{1.0, 2.0, 3.0}, {4.0, 6.0}, {10.0, 10.0, 13.0, 13.0}};
    const NormalTriple fit = fit_normal_triple(s);
    CHECK(fit.mu[0] == doctest::Approx(2.0));
    CHECK(fit.sigma[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(fit.mu[1] == doctest::Approx(5.0));
    CHECK(fit.sigma[1] == doctest::Approx(1.0));
    CHECK(fit.mu[2] == doctest::Approx(11.5));
    CHECK(fit.sigma[2] == doctest::Approx(1.5));
    CHECK(fit.a() == doctest::Approx(1.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(fit.b() == doctest::Approx((2.0 - 5.0) / std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(fit.c() == doctest::Approx(1.0 / 1.5));
    CHECK(fit.d() == doctest::Approx((11.5 - 5.0) / 1.5));

    CHECK_THROWS_AS(fit_normal_triple({{1.0, 1.0}, {4.0, 6.0}, {1.0, 2.0}}),
                    NumericalError);
  }

  TEST_CASE("trinormal functionals against frozen values") {
    // mu = (0, 0.5, 1), sigma = (1,1,1): a=1, b=-0.5, c=1, d=0.5
    NormalTriple fit;
    fit.mu = {0.0, 0.5, 1.0};
    fit.sigma = {1.0, 1.0, 1.0};
    CHECK(vus_normal(fit) == doctest::Approx(0.3372374941943315).epsilon(1e-7));
    CHECK(ovl_normal(fit) == doctest::Approx(0.6170750774519738).epsilon(1e-7));

    NormalTriple same;
    same.mu = {2.0, 2.0, 2.0};
    same.sigma = {0.7, 0.7, 0.7};
    CHECK(ovl_normal(same) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(vus_normal(same) == doctest::Approx(1.0 / 6.0).epsilon(1e-8));

    // near-perfect separation
    NormalTriple apart;
    apart.mu = {0.0, 20.0, 40.0};
    apart.sigma = {1.0, 1.0, 1.0};
    CHECK(vus_normal(apart) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ovl_normal(apart) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  }

  TEST_CASE("trinormal estimates are affine invariant") {
    const auto s = draw_sample(DistributionSpec::normal(0.0, 1.0),
                               DistributionSpec::normal(0.5, 1.0),
                               DistributionSpec::normal(1.0, 1.0), 40, 7);
    const auto t = affine(s, 3.7, -12.0);
    CHECK(ovl_normal(fit_normal_triple(s)) ==
          doctest::Approx(ovl_normal(fit_normal_triple(t))).epsilon(1e-8));
    CHECK(vus_normal(fit_normal_triple(s)) ==
          doctest::Approx(vus_normal(fit_normal_triple(t))).epsilon(1e-8));
  }

  TEST_CASE("power transform recovers the log for lognormal data") {
    const auto d = DistributionSpec::lognormal(0.0, 1.0);
    const auto s = draw_sample(d, d, d, 2000, 11);
    const BoxCoxFit fit = fit_box_cox(s);
    CHECK(std::abs(fit.lambda) <= 0.15);
    CHECK(fit.shift == 0.0);  // all values positive: no shift needed
    CHECK_FALSE(fit.at_boundary);
  }

  TEST_CASE("power transform shifts non-positive data") {
    ThreeClassSample s{{-1.0, 0.2, 0.5, 1.0}, {0.1, 0.7, 1.5}, {2.0, 3.0, 4.0}};
    const BoxCoxFit fit = fit_box_cox(s);
    CHECK(fit.shift == doctest::Approx(2.0));  // 1 - min = 1 - (-1)
    for (double x : {-1.0, 0.2, 4.0}) CHECK(x + fit.shift > 0.0);
  }

  TEST_CASE("transform evaluator: exact power form and log branch") {
    BoxCoxFit fit;
    fit.lambda = 2.0;
    fit.shift = 0.0;
    CHECK(apply_box_cox(fit, 3.0) == doctest::Approx(4.0));  // (9-1)/2

    fit.lambda = 0.0;
    CHECK(apply_box_cox(fit, std::exp(1.5)) == doctest::Approx(1.5).epsilon(1e-12));
    fit.lambda = 1e-12;  // inside the log-branch guard
    CHECK(apply_box_cox(fit, std::exp(1.5)) == doctest::Approx(1.5).epsilon(1e-9));

    // tiny but not guarded lambda stays continuous thanks to expm1
    fit.lambda = 1e-8;
    CHECK(apply_box_cox(fit, 2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-7));

    fit.lambda = 1.0;
    fit.shift = 0.0;
    CHECK_THROWS_AS(apply_box_cox(fit, -2.0), NumericalError);

    const ThreeClassSample s{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
    fit.lambda = 0.0;
    const ThreeClassSample t = apply_box_cox(fit, s);
    CHECK(t.class3[1] == doctest::Approx(std::log(6.0)).epsilon(1e-12));
  }

  TEST_CASE("kernel bandwidths follow the Silverman rule") {
    const auto s = draw_sample(DistributionSpec::normal(0.0, 1.0),
                               DistributionSpec::normal(0.5, 1.0),
                               DistributionSpec::normal(1.0, 1.0), 100, 3);
    const KernelEstimator kde(s);
    for (int k = 1; k <= 3; ++k) {
      const SampleStats st = summarize(s.cls(k));
      const double sigma = std::min(st.sd_sample, st.iqr / 1.349);
      const double expected = std::pow(4.0 / 3.0, 0.2) * sigma * std::pow(100.0, -0.2);
      CHECK(kde.bandwidth(k) == doctest::Approx(expected).epsilon(1e-12));
    }

    // all-equal class has no spread on either measure
    CHECK_THROWS_AS(KernelEstimator({{1.0, 1.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}}),
                    NumericalError);
  }

  TEST_CASE("kernel densities integrate to one and cdfs saturate") {
    const auto s = draw_sample(DistributionSpec::gamma(2.0, 1.0),
                               DistributionSpec::gamma(3.0, 1.0),
                               DistributionSpec::gamma(4.0, 1.0), 60, 5);
    const KernelEstimator kde(s);
    for (int k = 1; k <= 3; ++k) {
      const double mass = integrate_adaptive([&](double x) { return kde.pdf(k, x); },
                                             kde.support(), 1e-9);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(kde.cdf(k, kde.support().lo) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
      CHECK(kde.cdf(k, kde.support().hi) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(kde.cdf(k, 2.0) <= kde.cdf(k, 2.5));
    }

    const double ovl = ovl_kernel(kde);
    const double vus = vus_kernel(kde);
    CHECK(ovl >= 0.0);
    CHECK(ovl <= 1.0);
    CHECK(vus >= 0.0);
    CHECK(vus <= 1.0);
  }

  TEST_CASE("kernel overlap of identical classes is high, of split classes low") {
    const auto d = DistributionSpec::normal(0.0, 1.0);
    const auto same = draw_sample(d, d, d, 150, 21);
    CHECK(ovl_kernel(KernelEstimator(same)) > 0.8);

    const auto apart = draw_sample(DistributionSpec::normal(0.0, 1.0),
                                   DistributionSpec::normal(8.0, 1.0),
                                   DistributionSpec::normal(16.0, 1.0), 150, 22);
    CHECK(ovl_kernel(KernelEstimator(apart)) < 0.05);
    CHECK(vus_kernel(KernelEstimator(apart)) > 0.99);
  }

  TEST_CASE("empirical VUS equals the brute-force triple loop") {
    RandomStream stream(2024);
    for (int rep = 0; rep < 25; ++rep) {
      ThreeClassSample s;
      RandomStream r = stream.substream(static_cast<std::uint64_t>(rep));
      const auto sizes = std::array<std::size_t, 3>{
          2 + r.next_index(8), 2 + r.next_index(8), 2 + r.next_index(8)};
      const auto draw = [&](std::size_t n) {
        std::vector<double> out(n);
        // lattice values force plenty of ties across classes
        for (auto& x : out) x = static_cast<double>(r.next_index(6)) * 0.5;
        return out;
      };
      s.class1 = draw(sizes[0]);
      s.class2 = draw(sizes[1]);
      s.class3 = draw(sizes[2]);
      CHECK(vus_empirical(s) == vus_brute_force(s));  // bit-identical
    }
  }

  TEST_CASE("empirical VUS tie scoring on hand-built cases") {
    CHECK(vus_empirical({{1.0}, {2.0}, {3.0}}) == doctest::Approx(1.0));
    CHECK(vus_empirical({{3.0}, {2.0}, {1.0}}) == doctest::Approx(0.0));
    CHECK(vus_empirical({{1.0}, {1.0}, {1.0}}) == doctest::Approx(1.0 / 6.0));
    CHECK(vus_empirical({{1.0}, {1.0}, {2.0}}) == doctest::Approx(0.5));
    CHECK(vus_empirical({{1.0, 2.0}, {2.0}, {3.0}}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(vus_empirical({{}, {1.0}, {2.0}}), DataError);
  }

  TEST_CASE("empirical VUS is invariant under monotone transforms") {
    const auto s = draw_sample(DistributionSpec::normal(0.0, 1.0),
                               DistributionSpec::normal(0.5, 1.0),
                               DistributionSpec::normal(1.0, 1.0), 30, 13);
    const double base = vus_empirical(s);
    ThreeClassSample t = s;
    for (auto* cls : {&t.class1, &t.class2, &t.class3})
      for (double& x : *cls) x = std::exp(x);
    CHECK(vus_empirical(t) == base);

    ThreeClassSample u = s;
    for (auto* cls : {&u.class1, &u.class2, &u.class3})
      for (double& x : *cls) x = x * x * x + 2.0;
    CHECK(vus_empirical(u) == base);
  }

  TEST_CASE("estimate() dispatch covers every supported pair") {
    detail::reset_clamp_events();
    const auto s = draw_sample(DistributionSpec::gamma(2.0, 1.0),
                               DistributionSpec::gamma(3.0, 1.0),
                               DistributionSpec::gamma(4.0, 1.0), 50, 17);
    for (Method m : {Method::kNormal, Method::kBoxCoxNormal, Method::kKernel}) {
      const auto o = estimate(s, Measure::kOvl, m);
      CHECK(o.value >= 0.0);
      CHECK(o.value <= 1.0);
      CHECK(o.measure == Measure::kOvl);
      CHECK(o.method == m);
      CHECK_FALSE(o.ci.has_value());
    }
    for (Method m : {Method::kNormal, Method::kBoxCoxNormal, Method::kKernel,
                     Method::kEmpirical}) {
      const auto v = estimate(s, Measure::kVus, m);
      CHECK(v.value >= 0.0);
      CHECK(v.value <= 1.0);
    }
    CHECK_THROWS_AS(estimate(s, Measure::kOvl, Method::kEmpirical),
                    std::invalid_argument);
    CHECK(detail::clamp_events() == 0);
  }

  TEST_CASE("labels") {
    CHECK(to_string(Measure::kOvl) == "OVL");
    CHECK(to_string(Measure::kVus) == "VUS");
    CHECK(to_string(Method::kNormal) == "normal");
    CHECK(to_string(Method::kBoxCoxNormal) == "boxcox-normal");
    CHECK(to_string(Method::kKernel) == "kernel");
    CHECK(to_string(Method::kEmpirical) == "empirical");
  }
}
