#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "triroc/distributions.hpp"

using namespace triroc;

namespace {

double moment_mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST_SUITE("distributions") {
  TEST_CASE("pdf and cdf against frozen reference values") {
    // frozen: dnorm/pnorm, plnorm, pgamma from a high-precision reference
    const auto n01 = DistributionSpec::normal(0.0, 1.0);
    CHECK(n01.pdf(1.5) == doctest::Approx(0.12951759566589174).epsilon(1e-13));
    CHECK(n01.cdf(-0.5) == doctest::Approx(0.3085375387259869).epsilon(1e-13));

    const auto g21 = DistributionSpec::gamma(2.0, 1.0);
    CHECK(g21.cdf(2.0) == doctest::Approx(0.5939941502901616).epsilon(1e-12));
    CHECK(g21.pdf(2.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(g21.cdf(-1.0) == 0.0);
    CHECK(g21.pdf(-1.0) == 0.0);

    const auto ln = DistributionSpec::lognormal(0.0, 1.0);
    CHECK(ln.cdf(1.0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(ln.pdf(1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(ln.cdf(0.0) == 0.0);

    // equal-weight normal mixture at the symmetry point: pdf = φ(1.5)
    const auto mix = DistributionSpec::mixture(
        {0.5, 0.5}, {DistributionSpec::normal(-1.5, 1.0), DistributionSpec::normal(1.5, 1.0)});
    CHECK(mix.pdf(0.0) == doctest::Approx(0.12951759566589174).epsilon(1e-13));
    CHECK(mix.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-13));
  }

  TEST_CASE("quantile inverts cdf for every family") {
    const std::vector<DistributionSpec> specs{
        DistributionSpec::normal(1.0, 2.0),
        DistributionSpec::lognormal(0.3, 0.8),
        DistributionSpec::gamma(0.5, 2.0),  // shape < 1: density unbounded at 0
        DistributionSpec::mixture({0.5, 0.5}, {DistributionSpec::normal(0.0, 1.0),
                                               DistributionSpec::gamma(4.0, 1.0)})};
    for (const auto& d : specs)
      for (double p : {0.001, 0.05, 0.3, 0.5, 0.7, 0.95, 0.999})
        CHECK(d.cdf(d.quantile(p)) == doctest::Approx(p).epsilon(1e-8));
  }

  TEST_CASE("text form round-trips through parse") {
    const std::vector<std::string> forms{
        "N(0,1)", "N(0.5,1)", "LogN(1,0.5)", "Gamma(2,1)",
        "0.5*N(0,1)+0.5*Gamma(4,1)",
        "0.5*Gamma(2,1)+0.5*Gamma(5,0.6666666666666666)"};
    for (const auto& f : forms) {
      const auto d = DistributionSpec::parse(f);
      CHECK(d.to_string() == f);
      CHECK(DistributionSpec::parse(d.to_string()) == d);
    }
    // whitespace-insensitive
    CHECK(DistributionSpec::parse(" 0.5 * N( 0 , 1 ) + 0.5 * Gamma(4, 1) ") ==
          DistributionSpec::parse("0.5*N(0,1)+0.5*Gamma(4,1)"));

    CHECK_THROWS(DistributionSpec::parse("Cauchy(0,1)"));
    CHECK_THROWS(DistributionSpec::parse("N(0,-1)"));
    CHECK_THROWS(DistributionSpec::parse(""));
  }

  TEST_CASE("sampling matches the analytic moments") {
    RandomStream stream(31337);
    const std::size_t n = 200000;

    auto d = DistributionSpec::normal(2.0, 3.0);
    auto x = d.sample(n, stream);
    CHECK(moment_mean(x) == doctest::Approx(2.0).epsilon(0.02));

    d = DistributionSpec::gamma(0.2, 5.0);  // shape < 1 branch
    x = d.sample(n, stream);
    CHECK(moment_mean(x) == doctest::Approx(1.0).epsilon(0.03));
    for (double v : x) REQUIRE(v > 0.0);

    d = DistributionSpec::lognormal(0.0, 1.0);
    x = d.sample(n, stream);
    CHECK(moment_mean(x) == doctest::Approx(std::exp(0.5)).epsilon(0.03));

    d = DistributionSpec::mixture({0.5, 0.5}, {DistributionSpec::normal(0.0, 1.0),
                                               DistributionSpec::normal(10.0, 1.0)});
    x = d.sample(n, stream);
    CHECK(moment_mean(x) == doctest::Approx(5.0).epsilon(0.02));
    std::size_t low = 0;
    for (double v : x) low += v < 5.0;
    CHECK(static_cast<double>(low) / static_cast<double>(n) ==
          doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("sampling is reproducible from the stream key") {
    const auto d = DistributionSpec::gamma(2.0, 1.0);
    RandomStream a(99), b(99);
    const auto xa = d.sample(50, a);
    const auto xb = d.sample(50, b);
    CHECK(xa == xb);
  }

  TEST_CASE("identical classes give total overlap and chance-level VUS") {
    const auto d = DistributionSpec::lognormal(0.0, 1.0);
    CHECK(theoretical_ovl(d, d, d) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(theoretical_vus(d, d, d) == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
  }

  TEST_CASE("equally spaced unit normals: OVL reduces to 2*Phi(-1/2)") {
    // min of the three densities equals min of the two outer ones everywhere,
    // so the three-class overlap collapses to the two-class closed form.
    const double ovl = theoretical_ovl(DistributionSpec::normal(0.0, 1.0),
                                       DistributionSpec::normal(0.5, 1.0),
                                       DistributionSpec::normal(1.0, 1.0));
    CHECK(ovl == doctest::Approx(0.6170750774519738).epsilon(1e-7));
  }

  TEST_CASE("trinormal VUS against a frozen nested-quadrature value") {
    const double vus = theoretical_vus(DistributionSpec::normal(0.0, 1.0),
                                       DistributionSpec::normal(0.5, 1.0),
                                       DistributionSpec::normal(1.0, 1.0));
    CHECK(vus == doctest::Approx(0.3372374941943315).epsilon(1e-7));
  }

  TEST_CASE("single-integral VUS equals the nested double integral") {
    // VUS = ∫∫_{u<v} F1(u) f2(u) f3(v) du dv = ∫ F1(u) (1-F3(u)) f2(u) du;
    // evaluate the two-dimensional form by nesting adaptive quadrature.
    const auto f1 = DistributionSpec::normal(0.0, 1.0);
    const auto f2 = DistributionSpec::normal(0.5, 1.0);
    const auto f3 = DistributionSpec::normal(1.0, 1.0);
    const double nested = integrate_adaptive(
        [&](double v) {
          const double inner = integrate_adaptive(
              [&](double u) { return f1.cdf(u) * f2.pdf(u); }, Interval{-9.0, v}, 1e-9);
          return inner * f3.pdf(v);
        },
        Interval{-9.0, 10.0}, 1e-7);
    CHECK(theoretical_vus(f1, f2, f3) == doctest::Approx(nested).epsilon(1e-4));
  }

  TEST_CASE("decision rules carve the axis into three classes") {
    const DecisionRule rule{0.0, 1.0};
    CHECK(classify(rule, -0.5) == 1);
    CHECK(classify(rule, 0.0) == 1);
    CHECK(classify(rule, 0.5) == 2);
    CHECK(classify(rule, 1.0) == 2);
    CHECK(classify(rule, 1.5) == 3);

    const auto f1 = DistributionSpec::normal(-2.0, 1.0);
    const auto f2 = DistributionSpec::normal(0.5, 1.0);
    const auto f3 = DistributionSpec::normal(3.0, 1.0);
    const auto op = operating_point(rule, f1, f2, f3);
    CHECK(op.tpf1 == doctest::Approx(f1.cdf(0.0)).epsilon(1e-12));
    CHECK(op.tpf2 == doctest::Approx(f2.cdf(1.0) - f2.cdf(0.0)).epsilon(1e-12));
    CHECK(op.tpf3 == doctest::Approx(1.0 - f3.cdf(1.0)).epsilon(1e-12));
  }
}
