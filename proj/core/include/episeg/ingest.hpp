#ifndef EPISEG_INGEST_HPP
#define EPISEG_INGEST_HPP

#include <map>
#include <optional>

#include "episeg/spatial.hpp"

namespace episeg {

// Raw per-region cumulative counts as read from the cases CSV
// (header: date,region_id,cases,deaths).
struct RegionCases {
    std::string region_id;
    Date start;
    std::vector<double> cases;
    std::vector<double> deaths;
    int gap_fills = 0;  // missing days carried forward
};

std::map<std::string, RegionCases> read_cases(const std::string& path);

// R_region(t) = deaths_region(t) * recovered_nat(t) / deaths_nat(t); days with
// zero national deaths give R = 0. non_monotone_days counts the dips a falling
// national ratio produces (reported, not corrected).
std::vector<double> derive_recovered(const std::vector<double>& region_deaths,
                                     const std::vector<double>& national_recovered,
                                     const std::vector<double>& national_deaths,
                                     int* non_monotone_days = nullptr);

struct IngestOptions {
    Date window_start = parse_date("2020-03-01");
    std::optional<Date> window_end;
    double min_cases = 1.0;  // day-1 anchor: first day with at least this many
};

struct CatalogBuild {
    RegionCatalog catalog;
    std::vector<std::string> isolated;  // regions absent from the distance table
    int gap_fills = 0;
    int non_monotone_recovered = 0;
    std::vector<std::string> skipped;   // regions with no anchored day in window
};

// population CSV: region_id,population.  distance CSV: region_a,region_b,miles.
// national CSV (optional): date,recovered,deaths for the recovered derivation;
// without it every region gets R = 0.
CatalogBuild assemble_catalog(const std::string& cases_path,
                              const std::string& population_path,
                              const std::string& distance_path,
                              const std::string& national_path = "",
                              const IngestOptions& options = {});

// Direct series schema (date,region_id,infected,recovered,population) used by
// the simulator output; round-trips losslessly.
void write_series_csv(const std::string& path, const std::vector<EpidemicSeries>& series);
std::vector<EpidemicSeries> read_series_csv(const std::string& path);

}  // namespace episeg

#endif
