#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "episeg/ingest.hpp"
#include "episeg/simgen.hpp"

using namespace episeg;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("episeg_test_" + name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("missing files and bad headers are rejected") {
    CHECK_THROWS_AS(read_cases("does_not_exist.csv"), ParseError);
    TempFile bad("bad_header.csv", "date,region,cases,deaths\n");
    CHECK_THROWS_AS(read_cases(bad.path), ParseError);
    TempFile empty("empty.csv", "");
    CHECK_THROWS_AS(read_cases(empty.path), ParseError);
}

TEST_CASE("case rows are parsed and grouped per region") {
    TempFile f("cases.csv",
               "date,region_id,cases,deaths\n"
               "2020-03-01,AA,10,0\n"
               "2020-03-02,AA,12,1\n"
               "2020-03-01,BB,5,0\n"
               "2020-03-02,BB,7,0\n");
    auto regions = read_cases(f.path);
    REQUIRE(regions.size() == 2);
    CHECK(regions.at("AA").cases == std::vector<double>{10, 12});
    CHECK(regions.at("AA").deaths == std::vector<double>{0, 1});
    CHECK(format_date(regions.at("BB").start) == "2020-03-01");
    CHECK(regions.at("AA").gap_fills == 0);
}

TEST_CASE("missing days are carried forward and counted") {
    TempFile f("gaps.csv",
               "date,region_id,cases,deaths\n"
               "2020-03-01,AA,10,0\n"
               "2020-03-04,AA,20,2\n");
    auto regions = read_cases(f.path);
    const RegionCases& rc = regions.at("AA");
    CHECK(rc.gap_fills == 2);
    CHECK(rc.cases == std::vector<double>{10, 10, 10, 20});
    CHECK(rc.deaths == std::vector<double>{0, 0, 0, 2});
}

TEST_CASE("duplicate and backwards dates are rejected") {
    TempFile dup("dup.csv",
                 "date,region_id,cases,deaths\n"
                 "2020-03-01,AA,10,0\n"
                 "2020-03-01,AA,11,0\n");
    CHECK_THROWS_AS(read_cases(dup.path), ParseError);
    TempFile back("back.csv",
                  "date,region_id,cases,deaths\n"
                  "2020-03-05,AA,10,0\n"
                  "2020-03-02,AA,11,0\n");
    CHECK_THROWS_AS(read_cases(back.path), NonMonotonicDates);
    TempFile num("num.csv",
                 "date,region_id,cases,deaths\n"
                 "2020-03-01,AA,ten,0\n");
    CHECK_THROWS_AS(read_cases(num.path), ParseError);
}

TEST_CASE("recovered counts scale regional deaths by the national ratio") {
    int dips = -1;
    auto r = derive_recovered({0, 2, 4}, {100, 200, 300}, {10, 20, 30}, &dips);
    CHECK(r == std::vector<double>{0, 20, 40});
    CHECK(dips == 0);

    // zero national deaths give zero recovered; a falling ratio dips
    auto r2 = derive_recovered({2, 2, 2}, {100, 50, 0}, {10, 10, 0}, &dips);
    CHECK(r2[0] == doctest::Approx(20.0));
    CHECK(r2[1] == doctest::Approx(10.0));
    CHECK(r2[2] == 0.0);
    CHECK(dips == 2);

    CHECK_THROWS_AS(derive_recovered({1, 2}, {1}, {1}), LengthMismatch);
}

TEST_CASE("the catalog assembles counts, populations, and distances") {
    TempFile cases("asm_cases.csv",
                   "date,region_id,cases,deaths\n"
                   "2020-02-25,AA,0,0\n"
                   "2020-03-01,AA,10,0\n"
                   "2020-03-02,AA,12,0\n"
                   "2020-03-03,AA,15,0\n"
                   "2020-03-01,BB,5,0\n"
                   "2020-03-02,BB,7,0\n"
                   "2020-03-03,BB,9,0\n"
                   "2020-03-01,CC,0,0\n"
                   "2020-03-02,CC,0,0\n");
    TempFile pops("asm_pop.csv",
                  "region_id,population\nAA,1000\nBB,2000\nCC,3000\n");
    TempFile dist("asm_dist.csv", "region_a,region_b,miles\nAA,BB,120\n");
    CatalogBuild build = assemble_catalog(cases.path, pops.path, dist.path);

    CHECK(build.catalog.has("AA"));
    CHECK(build.catalog.has("BB"));
    // CC never reaches min_cases inside the window
    REQUIRE(build.skipped.size() == 1);
    CHECK(build.skipped[0] == "CC");
    CHECK(build.isolated.empty());

    const EpidemicSeries& aa = build.catalog.series("AA");
    // the anchor skips the pre-window day and its carried-forward gap days
    CHECK(format_date(aa.start_date) == "2020-03-01");
    CHECK(aa.size() == 3);
    CHECK(aa.population == 1000.0);
    // no national series: recovered defaults to zero
    CHECK(aa.recovered == std::vector<double>(3, 0.0));
    CHECK(build.catalog.distance("AA", "BB") == 120.0);
}

TEST_CASE("a region missing from the population table is an error") {
    TempFile cases("mp_cases.csv",
                   "date,region_id,cases,deaths\n"
                   "2020-03-01,AA,10,0\n"
                   "2020-03-02,AA,12,0\n"
                   "2020-03-03,AA,15,0\n");
    TempFile pops("mp_pop.csv", "region_id,population\nBB,2000\n");
    TempFile dist("mp_dist.csv", "region_a,region_b,miles\n");
    CHECK_THROWS_AS(assemble_catalog(cases.path, pops.path, dist.path), MissingPopulation);
}

TEST_CASE("a region absent from the distance table is flagged as isolated") {
    TempFile cases("iso_cases.csv",
                   "date,region_id,cases,deaths\n"
                   "2020-03-01,AA,10,0\n"
                   "2020-03-02,AA,12,0\n"
                   "2020-03-03,AA,15,0\n"
                   "2020-03-01,BB,5,0\n"
                   "2020-03-02,BB,7,0\n"
                   "2020-03-03,BB,9,0\n");
    TempFile pops("iso_pop.csv", "region_id,population\nAA,1000\nBB,2000\n");
    TempFile dist("iso_dist.csv", "region_a,region_b,miles\n");
    CatalogBuild build = assemble_catalog(cases.path, pops.path, dist.path);
    CHECK(build.isolated.size() == 2);
}

TEST_CASE("simulated series round-trip through the direct CSV schema") {
    Simulated sim = generate(scenario('A'), 9);
    std::vector<EpidemicSeries> series{sim.target, *sim.neighbor};
    TempFile out("roundtrip.csv", "");
    write_series_csv(out.path, series);
    auto back = read_series_csv(out.path);
    REQUIRE(back.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(back[j].region_id == series[j].region_id);
        CHECK(back[j].start_date.days == series[j].start_date.days);
        CHECK(back[j].population == series[j].population);
        CHECK(back[j].infected == series[j].infected);
        CHECK(back[j].recovered == series[j].recovered);
    }
}

TEST_CASE("series CSV rejects ragged dates") {
    TempFile f("ragged.csv",
               "date,region_id,infected,recovered,population\n"
               "2020-03-01,AA,1,0,1000\n"
               "2020-03-03,AA,2,0,1000\n");
    CHECK_THROWS_AS(read_series_csv(f.path), NonMonotonicDates);
}
