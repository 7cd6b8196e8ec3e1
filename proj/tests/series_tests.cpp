#include <cmath>

#include "doctest.h"
#include "episeg/series.hpp"

using namespace episeg;

namespace {
EpidemicSeries toy(std::vector<double> i, std::vector<double> r, double n = 1000.0) {
    EpidemicSeries s;
    s.region_id = "X";
    s.start_date = parse_date("2020-03-01");
    s.infected = std::move(i);
    s.recovered = std::move(r);
    s.population = n;
    return s;
}
}  // namespace

TEST_CASE("date parse and format round trip") {
    CHECK(format_date(parse_date("2020-03-01")) == "2020-03-01");
    CHECK(format_date(parse_date("1970-01-01")) == "1970-01-01");
    CHECK(parse_date("1970-01-01").days == 0);
    CHECK(parse_date("1970-01-02").days == 1);
    CHECK(parse_date("2020-02-29").next().days == parse_date("2020-03-01").days);
    CHECK(parse_date("2021-01-01").days - parse_date("2020-01-01").days == 366);
    CHECK_THROWS_AS(parse_date("2020-13-01"), ParseError);
    CHECK_THROWS_AS(parse_date("garbage"), ParseError);
}

TEST_CASE("series validation enforces the invariants") {
    CHECK_NOTHROW(toy({1, 2, 3}, {0, 0, 1}).validate());
    CHECK_THROWS_AS(toy({1, 2}, {0, 0}).validate(), Error);               // too short
    CHECK_THROWS_AS(toy({1, 2, 3}, {0, 0}).validate(), LengthMismatch);   // ragged
    CHECK_THROWS_AS(toy({900, 901, 902}, {200, 200, 200}).validate(), Error);  // I+R > N
    auto s = toy({1, 2, 3}, {0, 0, 1});
    s.population = 0.0;
    CHECK_THROWS_AS(s.validate(), Error);
    auto nan_series = toy({1, std::nan(""), 3}, {0, 0, 1});
    CHECK_THROWS_AS(nan_series.validate(), NonFiniteInput);
}

TEST_CASE("no reporting loss means u is identically zero") {
    const UnderReporting u = UnderReporting::none();
    for (int t = 1; t <= 10; ++t) CHECK(u(t) == 0.0);
}

TEST_CASE("quadratic reporting loss follows its formula and stays in [0, 1)") {
    const int T = 200;
    const double a = 0.5;
    const UnderReporting u = UnderReporting::quadratic(a, T);
    for (int t = 1; t <= T; ++t) {
        const double r = (t + a * T) / ((1.0 + a) * T);
        CHECK(u(t) == doctest::Approx(1.0 - r * r).epsilon(1e-14));
        CHECK(u(t) >= 0.0);
        CHECK(u(t) < 1.0);
    }
    CHECK(u(T) == doctest::Approx(0.0));
    CHECK(u(T + 50) == 0.0);  // clamped past the horizon
}

TEST_CASE("exponential reporting loss follows its formula") {
    const UnderReporting u = UnderReporting::exponential(0.05, 10.0);
    CHECK(u(1) == doctest::Approx(1.0 - 1.0 / 11.0).epsilon(1e-14));
    const double u2 = 1.0 - 1.0 / (1.0 + 10.0 * std::exp(-0.05));
    CHECK(u(2) == doctest::Approx(u2).epsilon(1e-14));
    for (int t = 1; t < 400; ++t) CHECK(u(t + 1) < u(t));  // monotone decay
    CHECK(u(1000) < 1e-15);
}

TEST_CASE("cutoff day switches reporting to complete") {
    UnderReporting u = UnderReporting::exponential(0.05, 10.0, 30);
    CHECK(u(30) > 0.0);
    CHECK(u(31) == 0.0);
    CHECK(u(100) == 0.0);
}
