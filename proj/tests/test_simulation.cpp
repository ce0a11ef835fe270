#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "triroc/simulation.hpp"

using namespace triroc;

namespace {

StudyOverrides tiny_overrides() {
  StudyOverrides ov;
  ov.reps = 6;
  ov.B = 19;
  ov.seed = 12345;
  ov.sizes = std::vector<std::array<int, 3>>{{12, 12, 12}};
  ov.threads = 1;
  return ov;
}

}  // namespace

TEST_SUITE("simulation") {
  TEST_CASE("builtin theoretical values agree with quadrature") {
    // every scenario's stored OVL/VUS must match the integrals to the
    // precision at which the values were published (4 decimals)
    for (const auto& sc : builtin_scenarios()) {
      REQUIRE(sc.theoretical_ovl.has_value());
      REQUIRE(sc.theoretical_vus.has_value());
      const double ovl = theoretical_ovl(sc.f1, sc.f2, sc.f3);
      const double vus = theoretical_vus(sc.f1, sc.f2, sc.f3);
      INFO("scenario ", sc.id);
      CHECK(std::abs(ovl - *sc.theoretical_ovl) < 2e-3);
      CHECK(std::abs(vus - *sc.theoretical_vus) < 2e-3);
    }
  }

  TEST_CASE("scenario registry lookup and shape") {
    CHECK(builtin_power_scenarios().size() == 17);
    CHECK(builtin_bias_scenarios().size() == 7);
    CHECK(builtin_scenarios().size() == 24);

    const ScenarioConfig* sc = find_scenario("normal-location");
    REQUIRE(sc != nullptr);
    CHECK(sc->f2 == DistributionSpec::normal(0.5, 1.0));
    CHECK(sc->sizes.size() == 8);
    CHECK(sc->parametric_method() == Method::kNormal);

    const ScenarioConfig* bc = find_scenario("lognormal-scale");
    REQUIRE(bc != nullptr);
    CHECK(bc->parametric_method() == Method::kBoxCoxNormal);

    CHECK(find_scenario("no-such-scenario") == nullptr);

    // the bias scenarios alias the corresponding power alternatives
    const ScenarioConfig* tt11 = find_scenario("tt1-1");
    REQUIRE(tt11 != nullptr);
    CHECK(tt11->f1 == find_scenario("normal-location")->f1);
    CHECK(tt11->sizes == std::vector<std::array<int, 3>>{
                             {20, 20, 20}, {50, 50, 50}, {100, 100, 100}});
  }

  TEST_CASE("stat labels track the parametric variant") {
    CHECK(stat_label(StatId::kOvlParametric, Method::kNormal) == "OVL_N");
    CHECK(stat_label(StatId::kOvlParametric, Method::kBoxCoxNormal) == "OVL_N^BC");
    CHECK(stat_label(StatId::kVusParametric, Method::kBoxCoxNormal) == "VUS_N^BC");
    CHECK(stat_label(StatId::kOvlKernel, Method::kNormal) == "OVL_K");
    CHECK(stat_label(StatId::kVusKernel, Method::kBoxCoxNormal) == "VUS_K");
    CHECK(stat_label(StatId::kVusEmpirical, Method::kNormal) == "VUS_E");
  }

  TEST_CASE("power engine reproduces standalone null tests bit for bit") {
    const ScenarioConfig& sc = *find_scenario("normal-location");
    StudyOverrides ov = tiny_overrides();
    const PowerStudyResult run = run_power_study(sc, ov);
    REQUIRE(run.rows.size() == 1);

    // re-derive every replication with the public keying hooks and plain
    // null_test calls; the engine shares pooled resamples across statistics,
    // which must not change any decision
    const std::array<int, 3> sizes = (*ov.sizes)[0];
    std::array<int, kStatCount> rejects{};
    for (int r = 0; r < *ov.reps; ++r) {
      RandomStream rep = detail::replication_stream(*ov.seed, sc.id, 0, r);
      const ThreeClassSample sample = detail::draw_replication_sample(sc, sizes, rep);
      BootstrapConfig cfg;
      cfg.B = *ov.B;
      cfg.alpha = run.alpha;
      cfg.seed = detail::replication_test_seed(rep);
      const Method pm = sc.parametric_method();
      const std::array<std::pair<Measure, Method>, kStatCount> defs{
          {{Measure::kOvl, pm},
           {Measure::kVus, pm},
           {Measure::kOvl, Method::kKernel},
           {Measure::kVus, Method::kKernel},
           {Measure::kVus, Method::kEmpirical}}};
      for (int s = 0; s < kStatCount; ++s)
        rejects[static_cast<std::size_t>(s)] +=
            null_test(sample, defs[static_cast<std::size_t>(s)].first,
                      defs[static_cast<std::size_t>(s)].second, cfg)
                .reject;
    }
    for (int s = 0; s < kStatCount; ++s) {
      const auto& cell = run.rows[0].cells[static_cast<std::size_t>(s)];
      REQUIRE(cell.has_value());
      CHECK(cell->reps_used == *ov.reps);
      CHECK(cell->failures == 0);
      CHECK(cell->proportion ==
            static_cast<double>(rejects[static_cast<std::size_t>(s)]) /
                static_cast<double>(*ov.reps));
    }
  }

  TEST_CASE("thread count does not change results") {
    const ScenarioConfig& sc = *find_scenario("gamma-shape");
    StudyOverrides serial = tiny_overrides();
    StudyOverrides parallel = tiny_overrides();
    parallel.threads = 4;
    const PowerStudyResult a = run_power_study(sc, serial);
    const PowerStudyResult b = run_power_study(sc, parallel);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      for (int s = 0; s < kStatCount; ++s) {
        const auto& ca = a.rows[i].cells[static_cast<std::size_t>(s)];
        const auto& cb = b.rows[i].cells[static_cast<std::size_t>(s)];
        REQUIRE(ca.has_value());
        REQUIRE(cb.has_value());
        CHECK(ca->proportion == cb->proportion);  // bit-identical
        CHECK(ca->reps_used == cb->reps_used);
        CHECK(ca->failures == cb->failures);
      }

    BiasOverrides bo;
    bo.reps = 5;
    bo.B = 11;
    bo.seed = 9;
    bo.sizes = std::vector<int>{15};
    bo.threads = 1;
    const auto scenarios = builtin_bias_scenarios().subspan(0, 1);
    const BiasStudyResult ba = run_bias_study(scenarios, bo);
    bo.threads = 3;
    const BiasStudyResult bb = run_bias_study(scenarios, bo);
    REQUIRE(ba.rows.size() == 1);
    REQUIRE(bb.rows.size() == 1);
    REQUIRE(ba.rows[0].parametric.has_value());
    CHECK(ba.rows[0].parametric->bias == bb.rows[0].parametric->bias);
    CHECK(ba.rows[0].parametric->rmse == bb.rows[0].parametric->rmse);
    CHECK(ba.rows[0].kernel->coverage == bb.rows[0].kernel->coverage);
  }

  TEST_CASE("column selection and zero replications") {
    const ScenarioConfig& sc = *find_scenario("normal-null");
    StudyOverrides ov = tiny_overrides();
    std::array<bool, kStatCount> only_emp{};
    only_emp[static_cast<std::size_t>(StatId::kVusEmpirical)] = true;
    ov.stats = only_emp;
    const PowerStudyResult run = run_power_study(sc, ov);
    REQUIRE(run.rows.size() == 1);
    for (int s = 0; s < kStatCount - 1; ++s)
      CHECK_FALSE(run.rows[0].cells[static_cast<std::size_t>(s)].has_value());
    CHECK(run.rows[0].cells[4].has_value());

    ov = tiny_overrides();
    ov.reps = 0;
    CHECK(run_power_study(sc, ov).rows.empty());
  }

  TEST_CASE("invalid study parameters are rejected up front") {
    const ScenarioConfig& sc = *find_scenario("normal-null");
    StudyOverrides ov = tiny_overrides();
    ov.B = 0;
    CHECK_THROWS_AS(run_power_study(sc, ov), std::invalid_argument);
    ov = tiny_overrides();
    ov.alpha = 0.0;
    CHECK_THROWS_AS(run_power_study(sc, ov), std::invalid_argument);
    ov = tiny_overrides();
    ov.sizes = std::vector<std::array<int, 3>>{{1, 12, 12}};
    CHECK_THROWS_AS(run_power_study(sc, ov), std::invalid_argument);
    ov = tiny_overrides();
    ov.sizes = std::vector<std::array<int, 3>>{};
    CHECK_THROWS_AS(run_power_study(sc, ov), std::invalid_argument);
  }

  TEST_CASE("bias study with an oracle estimator") {
    std::vector<ScenarioConfig> scenarios{*find_scenario("tt1-1")};
    const double truth = *scenarios[0].theoretical_ovl;
    BiasOverrides ov;
    ov.reps = 4;
    ov.B = 5;
    ov.sizes = std::vector<int>{10};
    ov.threads = 1;

    const auto oracle = [&](const ThreeClassSample&, Measure, Method,
                            const BootstrapConfig& cfg) {
      EstimateResult r;
      r.measure = Measure::kOvl;
      r.value = truth;
      r.ci = ConfidenceInterval{truth - 1e-6, truth + 1e-6, cfg.level, cfg.B};
      return r;
    };
    const BiasStudyResult good = detail::run_bias_study_with(scenarios, ov, oracle);
    REQUIRE(good.rows.size() == 1);
    REQUIRE(good.rows[0].parametric.has_value());
    CHECK(good.rows[0].parametric->bias == 0.0);
    CHECK(good.rows[0].parametric->rmse == 0.0);
    CHECK(good.rows[0].parametric->coverage == 1.0);
    CHECK(good.rows[0].parametric->reps_used == 4);

    const auto biased = [&](const ThreeClassSample&, Measure, Method,
                            const BootstrapConfig& cfg) {
      EstimateResult r;
      r.value = truth + 0.25;
      r.ci = ConfidenceInterval{truth + 0.1, truth + 0.2, cfg.level, cfg.B};
      return r;
    };
    const BiasStudyResult bad = detail::run_bias_study_with(scenarios, ov, biased);
    CHECK(bad.rows[0].parametric->bias == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(bad.rows[0].parametric->rmse == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(bad.rows[0].parametric->coverage == 0.0);
  }

  TEST_CASE("real bias study runs end to end on a small slice") {
    BiasOverrides ov;
    ov.reps = 12;
    ov.B = 19;
    ov.sizes = std::vector<int>{25};
    ov.seed = 31;
    const auto scenarios = builtin_bias_scenarios().subspan(0, 1);  // trinormal case
    const BiasStudyResult r = run_bias_study(scenarios, ov);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].n == 25);
    REQUIRE(r.rows[0].parametric.has_value());
    REQUIRE(r.rows[0].kernel.has_value());
    // weak sanity bounds only: 12 replications of a consistent estimator
    CHECK(std::abs(r.rows[0].parametric->bias) < 0.15);
    CHECK(r.rows[0].parametric->rmse < 0.25);
    CHECK(r.rows[0].parametric->coverage >= 0.5);
  }

  TEST_CASE("power grows with sample size under an alternative") {
    const ScenarioConfig& sc = *find_scenario("normal-location");
    StudyOverrides ov;
    ov.reps = 40;
    ov.B = 49;
    ov.seed = 77;
    ov.sizes = std::vector<std::array<int, 3>>{{20, 20, 20}, {100, 100, 100}};
    std::array<bool, kStatCount> only_emp{};
    only_emp[static_cast<std::size_t>(StatId::kVusEmpirical)] = true;
    ov.stats = only_emp;
    const PowerStudyResult run = run_power_study(sc, ov);
    REQUIRE(run.rows.size() == 2);
    const double p20 = run.rows[0].cells[4]->proportion;
    const double p100 = run.rows[1].cells[4]->proportion;
    CHECK(p100 >= p20);
    CHECK(p100 > 0.9);  // the published full-scale value is 1.000
  }

  TEST_CASE("reproduce-table wires published reference values") {
    StudyOverrides ov;
    ov.reps = 2;
    ov.B = 10;
    ov.seed = 5;
    ov.threads = 1;

    const TableResult power = reproduce_table("power/normal-null", StudyScale::kDesk, ov);
    CHECK(power.table_id == "power/normal-null");
    REQUIRE(power.columns.size() == 5);
    CHECK(power.columns[0] == "OVL_N");
    CHECK(power.columns[4] == "VUS_E");
    REQUIRE(power.cells.size() == 3);
    REQUIRE(power.row_labels.size() == 3);
    CHECK(power.row_sizes[0] == std::array<int, 3>{20, 20, 20});
    CHECK(power.row_sizes[2] == std::array<int, 3>{100, 100, 100});
    // published row for (20,20,20): 0.058 0.055 0.045 0.055 0.044
    REQUIRE(power.cells[0][0].reference.has_value());
    CHECK(*power.cells[0][0].reference == doctest::Approx(0.058));
    CHECK(*power.cells[0][4].reference == doctest::Approx(0.044));
    REQUIRE(power.cells[0][0].computed.has_value());

    const TableResult bias = reproduce_table("bias/tt1", StudyScale::kDesk, ov);
    CHECK(bias.columns.size() == 6);
    CHECK(bias.columns[0] == "OVL_N.bias");
    CHECK(bias.columns[5] == "OVL_K.cov95");
    REQUIRE(bias.cells.size() == 21);  // 7 scenarios x 3 sizes
    REQUIRE(bias.cells[0][0].reference.has_value());

    CHECK_THROWS_AS(reproduce_table("power/unknown", StudyScale::kDesk, ov),
                    std::invalid_argument);
    CHECK(std::find(reproducible_table_ids().begin(), reproducible_table_ids().end(),
                    "bias/tt1") != reproducible_table_ids().end());
  }

  TEST_CASE("scenario text parsing") {
    const char* text = R"(# three gamma classes
id = demo
f1 = Gamma(2,1)
f2 = Gamma(3,1)
f3 = Gamma(4,1)
sizes = 20,20,20; 50,50,50
reps = 250
b = 99
seed = 42
)";
    const ScenarioConfig sc = parse_scenario(text);
    CHECK(sc.id == "demo");
    CHECK(sc.f1 == DistributionSpec::gamma(2.0, 1.0));
    CHECK(sc.f3 == DistributionSpec::gamma(4.0, 1.0));
    REQUIRE(sc.sizes.size() == 2);
    CHECK(sc.sizes[1] == std::array<int, 3>{50, 50, 50});
    CHECK(sc.reps == 250);
    CHECK(sc.boot.B == 99);
    CHECK(sc.seed == 42);
    CHECK(sc.parametric_method() == Method::kBoxCoxNormal);

    // defaults: the eight canonical size triples
    const ScenarioConfig defaulted =
        parse_scenario("id=x\nf1=N(0,1)\nf2=N(0,1)\nf3=N(0,1)\n");
    CHECK(defaulted.sizes.size() == 8);

    CHECK_THROWS_AS(parse_scenario("id=x\nf1=N(0,1)\nf2=N(0,1)\n"), DataError);
    CHECK_THROWS_AS(parse_scenario("id=x\nid=y\nf1=N(0,1)\nf2=N(0,1)\nf3=N(0,1)\n"),
                    DataError);
    CHECK_THROWS_AS(
        parse_scenario("id=x\nf1=N(0,1)\nf2=N(0,1)\nf3=N(0,1)\nbogus=1\n"), DataError);
    CHECK_THROWS_AS(
        parse_scenario("id=x\nf1=N(0,1)\nf2=N(0,1)\nf3=N(0,1)\nsizes=1,5,5\n"),
        DataError);
  }

  TEST_CASE("renderers cover every field") {
    const ScenarioConfig& sc = *find_scenario("normal-location");
    StudyOverrides ov = tiny_overrides();
    const PowerStudyResult run = run_power_study(sc, ov);

    const std::string text = render_text(run);
    CHECK(text.find("normal-location") != std::string::npos);
    CHECK(text.find("OVL_N") != std::string::npos);

    const std::string csv = to_csv(run);
    CHECK(csv.find("scenario,n1,n2,n3,statistic,proportion,mc_se,reps_used,failures,"
                   "flagged") == 0);
    CHECK(csv.find("VUS_E") != std::string::npos);

    const std::string json = to_json(run);
    CHECK(json.find("\"scenario\"") != std::string::npos);
    CHECK(json.find("\"rows\"") != std::string::npos);
  }
}
