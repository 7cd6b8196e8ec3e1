#include <cmath>

#include "doctest.h"
#include "episeg/simgen.hpp"

using namespace episeg;

TEST_CASE("the same seed reproduces the same path and different seeds differ") {
    const Scenario sc = scenario('B');
    Simulated a = generate(sc, 42);
    Simulated b = generate(sc, 42);
    Simulated c = generate(sc, 43);
    CHECK(a.target.infected == b.target.infected);
    CHECK(a.target.recovered == b.target.recovered);
    CHECK(a.target.infected != c.target.infected);
}

TEST_CASE("the scenario table carries the documented designs") {
    const Scenario a = scenario('A');
    CHECK(a.horizon == 200);
    CHECK(a.breaks == std::vector<int>{100});
    CHECK(a.beta == std::vector<double>{0.10, 0.05});
    CHECK(a.gamma == std::vector<double>{0.04, 0.04});
    CHECK(a.spatial);
    CHECK(a.alpha == 1.0);
    CHECK(a.var_noise);

    const Scenario b = scenario('B');
    CHECK(b.horizon == 250);
    CHECK(b.breaks == std::vector<int>{100, 200});
    CHECK(b.u_family == UnderReporting::Family::Exponential);
    CHECK(b.u_a == 0.05);
    CHECK(b.u_b == 10.0);

    const Scenario c = scenario('C');
    CHECK(c.u_family == UnderReporting::Family::Quadratic);
    CHECK(c.u_a == 0.5);
    CHECK(c.spatial);

    const Scenario d = scenario('D');
    CHECK(d.u_family == UnderReporting::Family::None);
    CHECK(d.lognormal_var == 0.01);

    const Scenario e = scenario('E');
    CHECK(e.white_noise);
    CHECK(!e.var_noise);

    const Scenario g = scenario('G');
    CHECK(g.horizon == 500);
    CHECK(g.breaks == std::vector<int>{200, 300, 400});

    const Scenario h = scenario('H');
    CHECK(h.breaks == std::vector<int>{150, 250, 350, 400});
    CHECK(h.beta.size() == 5);

    CHECK_THROWS_AS(scenario('Z'), Error);
}

TEST_CASE("per-day rates follow the break schedule") {
    const Scenario b = scenario('B');
    CHECK(b.beta_at(1) == 0.10);
    CHECK(b.beta_at(99) == 0.10);
    CHECK(b.beta_at(100) == 0.05);
    CHECK(b.beta_at(199) == 0.05);
    CHECK(b.beta_at(200) == 0.10);
    CHECK(b.gamma_at(150) == 0.06);
}

TEST_CASE("a noiseless scenario follows the deterministic recursion exactly") {
    Scenario sc;
    sc.id = 'X';
    sc.horizon = 50;
    sc.breaks = {25};
    sc.beta = {0.10, 0.05};
    sc.gamma = {0.04, 0.04};
    Simulated sim = generate(sc, 7);

    const double N = sim.target.population;
    double i_f = sc.initial_infected, r = 0.0;
    for (int t = 1; t < 50; ++t) {
        const double s = N - i_f - r;
        const double di = sc.beta_at(t) * s * i_f / N - sc.gamma_at(t) * i_f;
        const double dr = sc.gamma_at(t) * i_f;
        i_f += di;
        r += dr;
        CHECK(sim.truth.true_infected[t] == doctest::Approx(i_f).epsilon(1e-12));
        CHECK(sim.target.recovered[t] == doctest::Approx(r).epsilon(1e-12));
        // no reporting loss, so observed and true increments coincide
        CHECK(sim.target.infected[t] - sim.target.infected[t - 1] ==
              doctest::Approx(di).epsilon(1e-12));
    }
}

TEST_CASE("reporting loss scales the observed infected increments") {
    Scenario sc = scenario('B');
    Simulated sim = generate(sc, 11);
    const UnderReporting u = sc.underreporting();
    for (std::size_t t = 1; t < sim.target.size(); ++t) {
        const double observed = sim.target.infected[t] - sim.target.infected[t - 1];
        const double truth = sim.truth.true_infected[t] - sim.truth.true_infected[t - 1];
        const double one_minus_u = 1.0 - u(static_cast<int>(t) + 1);
        CHECK(observed == doctest::Approx(truth * one_minus_u).epsilon(1e-9));
    }
    // recovered counts are reported fully
    CHECK(sim.target.recovered.back() > 0.0);
}

TEST_CASE("the spatial scenario carries a neighbor 100 miles away") {
    Simulated sim = generate(scenario('A'), 3);
    REQUIRE(sim.neighbor.has_value());
    CHECK(sim.neighbor->region_id == "S1");
    CHECK(sim.catalog.distance("T0", "S1") == 100.0);
    CHECK(sim.catalog.has("T0"));
    Simulated plain = generate(scenario('B'), 3);
    CHECK(!plain.neighbor.has_value());
}

TEST_CASE("extra days extend the series under the last regime") {
    const Scenario sc = scenario('B');
    Simulated longer = generate(sc, 5, 10);
    CHECK(longer.target.size() == static_cast<std::size_t>(sc.horizon + 10));
    CHECK(longer.truth.true_infected.size() == static_cast<std::size_t>(sc.horizon + 10));
}

TEST_CASE("success intervals use a fifth of each adjacent spacing") {
    const std::vector<int> breaks{100, 200};
    auto [lo0, hi0] = success_interval(breaks, 0, 250);
    CHECK(lo0 == doctest::Approx(100 - 100 / 5.0));
    CHECK(hi0 == doctest::Approx(100 + 100 / 5.0));
    auto [lo1, hi1] = success_interval(breaks, 1, 250);
    CHECK(lo1 == doctest::Approx(200 - 100 / 5.0));
    CHECK(hi1 == doctest::Approx(200 + 50 / 5.0));
    CHECK_THROWS_AS(success_interval(breaks, 2, 250), Error);
}

TEST_CASE("mismatched rate and break counts are rejected") {
    Scenario sc;
    sc.breaks = {10};
    sc.beta = {0.1};
    sc.gamma = {0.04};
    sc.horizon = 40;
    CHECK_THROWS_AS(generate(sc, 1), Error);
}

TEST_CASE("a replicate study recovers the rates of a clean scenario") {
    const Scenario sc = scenario('D');
    ReplicateConfig rc;
    rc.n_reps = 3;
    rc.seed = 1;
    rc.jobs = 3;
    rc.pipeline.variant = ModelVariant::Model1;
    rc.pipeline.scheme = WeightScheme::Equal;
    rc.pipeline.detect.block_size = 8;
    ReplicateSummary sum = run_replicates(sc, rc);
    CHECK(sum.failures == 0);
    REQUIRE(sum.success_rate.size() == 2);
    CHECK(sum.success_rate[0] == doctest::Approx(1.0));
    CHECK(sum.success_rate[1] == doctest::Approx(1.0));
    REQUIRE(sum.beta_mean.size() == 3);
    CHECK(sum.beta_mean[0] == doctest::Approx(0.10).epsilon(0.05));
    CHECK(sum.gamma_mean[1] == doctest::Approx(0.06).epsilon(0.05));

    // sequential and parallel execution agree
    ReplicateConfig seq = rc;
    seq.jobs = 1;
    ReplicateSummary sum2 = run_replicates(sc, seq);
    CHECK(sum.beta_mean[0] == sum2.beta_mean[0]);
    CHECK(sum.location_mean[0] == sum2.location_mean[0]);
}
