#ifndef EPISEG_SERIES_HPP
#define EPISEG_SERIES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace episeg {

// Error types raised by the library. All derive from Error so callers can
// catch one base type at the CLI boundary.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnderReportingSingular : Error {
    using Error::Error;
};
struct NonFiniteInput : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct NoNeighbors : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct SegmentTooShort : Error {
    using Error::Error;
};
struct HorizonTooLong : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct NonMonotonicDates : Error {
    using Error::Error;
};
struct MissingPopulation : Error {
    using Error::Error;
};

// Calendar day stored as days since 1970-01-01. Daily resolution is all the
// models need; full date arithmetic comes from the conversion helpers below.
struct Date {
    std::int64_t days = 0;

    friend auto operator<=>(const Date&, const Date&) = default;
    Date next() const { return Date{days + 1}; }
};

Date parse_date(const std::string& iso);  // "YYYY-MM-DD"
std::string format_date(Date d);

// Daily cumulative counts for one region. Counts are doubles because derived
// recovered series (national ratio scaling) and simulated series are not
// integral.
struct EpidemicSeries {
    std::string region_id;
    Date start_date;                // date of index 0; consecutive days follow
    std::vector<double> infected;   // cumulative observed infected I(t)
    std::vector<double> recovered;  // cumulative recovered R(t)
    double population = 0.0;        // N

    std::size_t size() const { return infected.size(); }
    Date date_at(std::size_t t) const { return Date{start_date.days + static_cast<std::int64_t>(t)}; }

    // Throws on violated invariants: equal lengths >= 3, N > 0, I + R <= N,
    // finite counts.
    void validate() const;
};

// Parametric reporting-loss function u(t), t is 1-based day index.
//   None:        u(t) = 0
//   Quadratic:   u(t) = 1 - ((t + aT) / ((1+a)T))^2
//   Exponential: u(t) = 1 - 1 / (1 + b e^{-a(t-1)})
// An optional cutoff day marks the point after which reporting is treated as
// complete (u = 0 from cutoff on).
struct UnderReporting {
    enum class Family { None, Quadratic, Exponential };

    Family family = Family::None;
    double a = 0.0;
    double b = 0.0;
    int horizon = 0;   // T, required for Quadratic
    int cutoff = -1;   // 1-based day index; < 0 means no cutoff

    static UnderReporting none() { return {}; }
    static UnderReporting quadratic(double a, int horizon, int cutoff = -1) {
        return {Family::Quadratic, a, 0.0, horizon, cutoff};
    }
    static UnderReporting exponential(double a, double b, int cutoff = -1) {
        return {Family::Exponential, a, b, 0, cutoff};
    }

    double operator()(int t) const;  // u(t), t = 1..T
};

}  // namespace episeg

#endif
