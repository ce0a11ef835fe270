#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "triroc/distributions.hpp"
#include "triroc/inference.hpp"
#include "triroc/numerics.hpp"

using namespace triroc;

namespace {

ThreeClassSample demo_sample(std::uint64_t seed, std::size_t n, double gap) {
  RandomStream root(seed);
  ThreeClassSample s;
  RandomStream s1 = root.substream(1), s2 = root.substream(2), s3 = root.substream(3);
  s.class1 = DistributionSpec::normal(0.0, 1.0).sample(n, s1);
  s.class2 = DistributionSpec::normal(gap, 1.0).sample(n, s2);
  s.class3 = DistributionSpec::normal(2.0 * gap, 1.0).sample(n, s3);
  return s;
}

bool contains(const std::vector<double>& pool, const std::vector<double>& values) {
  return std::all_of(values.begin(), values.end(), [&](double v) {
    return std::find(pool.begin(), pool.end(), v) != pool.end();
  });
}

std::vector<double> pooled(const ThreeClassSample& s) {
  std::vector<double> all = s.class1;
  all.insert(all.end(), s.class2.begin(), s.class2.end());
  all.insert(all.end(), s.class3.begin(), s.class3.end());
  return all;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("stratified resampling preserves class sizes and values") {
    const auto s = demo_sample(1, 12, 0.5);
    const auto r = detail::resample_stratified(s, RandomStream(404));
    CHECK(r.class1.size() == s.class1.size());
    CHECK(r.class2.size() == s.class2.size());
    CHECK(r.class3.size() == s.class3.size());
    CHECK(contains(s.class1, r.class1));
    CHECK(contains(s.class2, r.class2));
    CHECK(contains(s.class3, r.class3));

    // same stream, same resample
    const auto r2 = detail::resample_stratified(s, RandomStream(404));
    CHECK(r.class1 == r2.class1);
    CHECK(r.class2 == r2.class2);
    CHECK(r.class3 == r2.class3);
  }

  TEST_CASE("pooled resampling draws every class from the combined sample") {
    const auto s = demo_sample(2, 10, 3.0);  // classes far apart
    const auto all = pooled(s);
    const auto r = detail::resample_pooled(s, RandomStream(405));
    CHECK(r.class1.size() == s.class1.size());
    CHECK(r.class2.size() == s.class2.size());
    CHECK(r.class3.size() == s.class3.size());
    CHECK(contains(all, r.class1));
    CHECK(contains(all, r.class2));
    CHECK(contains(all, r.class3));

    // with widely separated classes, a pooled class-1 resample almost surely
    // grabs values born in other classes
    const bool mixed = !contains(s.class1, r.class1);
    CHECK(mixed);
  }

  TEST_CASE("bootstrap CI equals a hand-rolled percentile bootstrap") {
    const auto s = demo_sample(3, 15, 0.8);
    BootstrapConfig cfg;
    cfg.B = 25;
    cfg.level = 0.9;
    cfg.seed = 4242;

    // empirical VUS never fails on nonempty classes, so attempt is always 0
    std::vector<double> stats;
    for (int b = 0; b < cfg.B; ++b) {
      const auto rs = detail::resample_stratified(
          s, detail::iteration_stream(cfg.seed, detail::kCiTag,
                                      static_cast<std::uint64_t>(b), 0));
      stats.push_back(vus_empirical(rs));
    }
    std::sort(stats.begin(), stats.end());
    const double lo = sample_quantile_sorted(stats, (1.0 - cfg.level) / 2.0);
    const double hi = sample_quantile_sorted(stats, 1.0 - (1.0 - cfg.level) / 2.0);

    const auto r = bootstrap_ci(s, Measure::kVus, Method::kEmpirical, cfg);
    REQUIRE(r.ci.has_value());
    CHECK(r.ci->lo == lo);  // bit-identical reconstruction
    CHECK(r.ci->hi == hi);
    CHECK(r.ci->level == cfg.level);
    CHECK(r.ci->B == cfg.B);
    CHECK(r.value == vus_empirical(s));
    CHECK(r.redraws == 0);
  }

  TEST_CASE("bootstrap CI is deterministic in the seed and well-formed") {
    const auto s = demo_sample(4, 30, 0.6);
    BootstrapConfig cfg;
    cfg.B = 100;
    cfg.seed = 7;
    const auto a = bootstrap_ci(s, Measure::kOvl, Method::kNormal, cfg);
    const auto b = bootstrap_ci(s, Measure::kOvl, Method::kNormal, cfg);
    REQUIRE(a.ci.has_value());
    CHECK(a.ci->lo == b.ci->lo);
    CHECK(a.ci->hi == b.ci->hi);
    CHECK(a.ci->lo <= a.ci->hi);
    CHECK(a.ci->lo >= 0.0);
    CHECK(a.ci->hi <= 1.0);

    cfg.seed = 8;
    const auto c = bootstrap_ci(s, Measure::kOvl, Method::kNormal, cfg);
    CHECK(a.ci->lo != c.ci->lo);  // different seed, different resamples
  }

  TEST_CASE("failed replicates are re-drawn, not dropped") {
    // two-point classes: a stratified resample is constant with prob 1/2 per
    // class, so the normal fit fails often and the redraw path must engage
    const ThreeClassSample s{{0.0, 1.0}, {0.4, 1.4}, {0.8, 1.8}};
    BootstrapConfig cfg;
    cfg.B = 50;
    cfg.seed = 99;
    const auto r = bootstrap_ci(s, Measure::kVus, Method::kNormal, cfg);
    REQUIRE(r.ci.has_value());
    CHECK(r.ci->B == 50);
    CHECK(r.redraws > 0);
  }

  TEST_CASE("null test matches a hand-rolled pooled bootstrap") {
    const auto s = demo_sample(5, 12, 1.0);
    BootstrapConfig cfg;
    cfg.B = 39;
    cfg.alpha = 0.1;
    cfg.seed = 555;

    std::vector<double> stats;
    for (int b = 0; b < cfg.B; ++b) {
      const auto rs = detail::resample_pooled(
          s, detail::iteration_stream(cfg.seed, detail::kNullTag,
                                      static_cast<std::uint64_t>(b), 0));
      stats.push_back(vus_empirical(rs));
    }
    std::sort(stats.begin(), stats.end());
    const double q = sample_quantile_sorted(stats, 1.0 - cfg.alpha);

    const auto r = null_test(s, Measure::kVus, Method::kEmpirical, cfg);
    CHECK(r.statistic == vus_empirical(s));
    CHECK(r.null_quantile == q);
    CHECK(r.direction == TailDirection::kUpper);
    CHECK(r.reject == (r.statistic > q));
    CHECK(r.B == cfg.B);
  }

  TEST_CASE("null test tails: separation rejects, identity does not") {
    BootstrapConfig cfg;
    cfg.B = 199;
    cfg.alpha = 0.05;
    cfg.seed = 31;

    const auto apart = demo_sample(6, 40, 2.5);
    const auto vus = null_test(apart, Measure::kVus, Method::kEmpirical, cfg);
    CHECK(vus.direction == TailDirection::kUpper);
    CHECK(vus.reject);
    const auto ovl = null_test(apart, Measure::kOvl, Method::kNormal, cfg);
    CHECK(ovl.direction == TailDirection::kLower);
    CHECK(ovl.reject);

    const auto same = demo_sample(8, 40, 0.0);  // all three classes identical
    CHECK_FALSE(null_test(same, Measure::kVus, Method::kEmpirical, cfg).reject);
    CHECK_FALSE(null_test(same, Measure::kOvl, Method::kNormal, cfg).reject);
  }

  TEST_CASE("overlap bands") {
    CHECK(interpret_ovl(1.0) == "No differentiation");
    CHECK(interpret_ovl(0.9) == "Poor");
    CHECK(interpret_ovl(0.75) == "Poor");
    CHECK(interpret_ovl(0.6) == "Good");
    CHECK(interpret_ovl(0.55) == "Good");
    CHECK(interpret_ovl(0.4) == "Very good");
    CHECK(interpret_ovl(0.35) == "Very good");
    CHECK(interpret_ovl(0.1) == "Excellent");
    CHECK(interpret_ovl(0.0) == "Excellent");
    CHECK_THROWS(interpret_ovl(-0.1));
    CHECK_THROWS(interpret_ovl(1.1));
  }
}
