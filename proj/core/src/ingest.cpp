#include "episeg/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace episeg {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_number(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return in;
}

void expect_header(std::ifstream& in, const std::string& expected, const std::string& path) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": missing header");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != expected)
        throw ParseError(path + ": expected header '" + expected + "', got '" + header + "'");
}

}  // namespace

std::map<std::string, RegionCases> read_cases(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    expect_header(in, "date,region_id,cases,deaths", path);

    std::map<std::string, RegionCases> out;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields");
        Date date;
        try {
            date = parse_date(fields[0]);
        } catch (const Error&) {
            throw ParseError("line " + std::to_string(line_no) + ": bad date '" + fields[0] + "'");
        }
        const std::string& region = fields[1];
        const double cases = parse_number(fields[2], line_no);
        const double deaths = parse_number(fields[3], line_no);

        auto [it, inserted] = out.try_emplace(region);
        RegionCases& rc = it->second;
        if (inserted) {
            rc.region_id = region;
            rc.start = date;
        } else {
            const Date expected_next = Date{rc.start.days + static_cast<std::int64_t>(rc.cases.size())};
            if (date.days == expected_next.days - 1)
                throw ParseError("line " + std::to_string(line_no) + ": duplicate day for region " +
                                 region);
            if (date < expected_next)
                throw NonMonotonicDates("line " + std::to_string(line_no) +
                                        ": dates go backwards for region " + region);
            // gap days carry the previous cumulative counts forward
            while (Date{rc.start.days + static_cast<std::int64_t>(rc.cases.size())} < date) {
                rc.cases.push_back(rc.cases.back());
                rc.deaths.push_back(rc.deaths.back());
                ++rc.gap_fills;
            }
        }
        rc.cases.push_back(cases);
        rc.deaths.push_back(deaths);
    }
    return out;
}

std::vector<double> derive_recovered(const std::vector<double>& region_deaths,
                                     const std::vector<double>& national_recovered,
                                     const std::vector<double>& national_deaths,
                                     int* non_monotone_days) {
    if (region_deaths.size() != national_recovered.size() ||
        region_deaths.size() != national_deaths.size())
        throw LengthMismatch("derive_recovered: input lengths differ");

    std::vector<double> r(region_deaths.size(), 0.0);
    int dips = 0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        if (national_deaths[t] > 0.0)
            r[t] = region_deaths[t] * national_recovered[t] / national_deaths[t];
        if (t > 0 && r[t] < r[t - 1]) ++dips;
    }
    if (non_monotone_days) *non_monotone_days = dips;
    return r;
}

CatalogBuild assemble_catalog(const std::string& cases_path, const std::string& population_path,
                              const std::string& distance_path, const std::string& national_path,
                              const IngestOptions& options) {
    auto regions = read_cases(cases_path);

    std::map<std::string, double> populations;
    {
        std::ifstream in = open_or_throw(population_path);
        expect_header(in, "region_id,population", population_path);
        std::string line;
        int line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto fields = split_csv(line);
            if (fields.size() != 2)
                throw ParseError("line " + std::to_string(line_no) + ": expected 2 fields");
            populations[fields[0]] = parse_number(fields[1], line_no);
        }
    }

    // national series for the recovered derivation, aligned by date
    Date national_start{0};
    std::vector<double> national_recovered, national_deaths;
    if (!national_path.empty()) {
        std::ifstream in = open_or_throw(national_path);
        expect_header(in, "date,recovered,deaths", national_path);
        std::string line;
        int line_no = 1;
        bool first = true;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto fields = split_csv(line);
            if (fields.size() != 3)
                throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields");
            const Date d = parse_date(fields[0]);
            if (first) {
                national_start = d;
                first = false;
            } else if (d.days != national_start.days +
                                     static_cast<std::int64_t>(national_recovered.size())) {
                throw NonMonotonicDates(national_path + ": line " + std::to_string(line_no) +
                                        ": days must be consecutive");
            }
            national_recovered.push_back(parse_number(fields[1], line_no));
            national_deaths.push_back(parse_number(fields[2], line_no));
        }
    }

    CatalogBuild build;
    for (auto& [id, rc] : regions) {
        auto pop = populations.find(id);
        if (pop == populations.end())
            throw MissingPopulation("no population for region " + id);
        build.gap_fills += rc.gap_fills;

        // day-1 anchor: first in-window day with at least min_cases cases
        int first = -1;
        for (std::size_t t = 0; t < rc.cases.size(); ++t) {
            const Date d{rc.start.days + static_cast<std::int64_t>(t)};
            if (d < options.window_start) continue;
            if (options.window_end && *options.window_end < d) break;
            if (rc.cases[t] >= options.min_cases) {
                first = static_cast<int>(t);
                break;
            }
        }
        if (first < 0) {
            build.skipped.push_back(id);
            continue;
        }
        int last = static_cast<int>(rc.cases.size());
        if (options.window_end) {
            const std::int64_t span = options.window_end->days - rc.start.days + 1;
            last = static_cast<int>(std::min<std::int64_t>(last, std::max<std::int64_t>(0, span)));
        }
        if (last - first < 3) {
            build.skipped.push_back(id);
            continue;
        }

        EpidemicSeries s;
        s.region_id = id;
        s.start_date = Date{rc.start.days + first};
        s.population = pop->second;
        s.infected.assign(rc.cases.begin() + first, rc.cases.begin() + last);

        std::vector<double> deaths(rc.deaths.begin() + first, rc.deaths.begin() + last);
        if (national_recovered.empty()) {
            s.recovered.assign(deaths.size(), 0.0);
        } else {
            // slice the national series to this region's window
            std::vector<double> nat_r(deaths.size(), 0.0), nat_d(deaths.size(), 0.0);
            for (std::size_t t = 0; t < deaths.size(); ++t) {
                const std::int64_t k = s.start_date.days + static_cast<std::int64_t>(t) -
                                       national_start.days;
                if (k >= 0 && k < static_cast<std::int64_t>(national_recovered.size())) {
                    nat_r[t] = national_recovered[k];
                    nat_d[t] = national_deaths[k];
                }
            }
            int dips = 0;
            s.recovered = derive_recovered(deaths, nat_r, nat_d, &dips);
            build.non_monotone_recovered += dips;
        }
        build.catalog.add_series(std::move(s));
    }

    {
        std::ifstream in = open_or_throw(distance_path);
        expect_header(in, "region_a,region_b,miles", distance_path);
        std::string line;
        int line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto fields = split_csv(line);
            if (fields.size() != 3)
                throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields");
            if (build.catalog.has(fields[0]) && build.catalog.has(fields[1]))
                build.catalog.set_distance(fields[0], fields[1],
                                           parse_number(fields[2], line_no));
        }
    }
    build.isolated = build.catalog.isolated_regions();
    return build;
}

void write_series_csv(const std::string& path, const std::vector<EpidemicSeries>& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "date,region_id,infected,recovered,population\n";
    out.precision(17);
    for (const EpidemicSeries& s : series)
        for (std::size_t t = 0; t < s.size(); ++t)
            out << format_date(s.date_at(t)) << ',' << s.region_id << ',' << s.infected[t]
                << ',' << s.recovered[t] << ',' << s.population << '\n';
}

std::vector<EpidemicSeries> read_series_csv(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    expect_header(in, "date,region_id,infected,recovered,population", path);

    std::vector<EpidemicSeries> out;
    std::map<std::string, std::size_t> index;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 5)
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields");
        const Date d = parse_date(fields[0]);
        const std::string& id = fields[1];
        auto [it, inserted] = index.try_emplace(id, out.size());
        if (inserted) {
            out.emplace_back();
            out.back().region_id = id;
            out.back().start_date = d;
        }
        EpidemicSeries& s = out[it->second];
        if (!inserted && d.days != s.start_date.days + static_cast<std::int64_t>(s.size()))
            throw NonMonotonicDates("line " + std::to_string(line_no) +
                                    ": days must be consecutive for region " + id);
        s.infected.push_back(parse_number(fields[2], line_no));
        s.recovered.push_back(parse_number(fields[3], line_no));
        s.population = parse_number(fields[4], line_no);
    }
    return out;
}

}  // namespace episeg
