#include "episeg/series.hpp"

#include <cmath>
#include <cstdio>

namespace episeg {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

const int kDaysInMonth[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

}  // namespace

Date parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1)
        throw ParseError("invalid date: " + iso);
    int dim = kDaysInMonth[m - 1] + (m == 2 && is_leap(y) ? 1 : 0);
    if (d > dim) throw ParseError("invalid date: " + iso);
    // days since 1970-01-01 via the civil-days algorithm
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return Date{era * 146097 + static_cast<std::int64_t>(doe) - 719468};
}

std::string format_date(Date date) {
    std::int64_t z = date.days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u",
                  static_cast<long long>(y + (m <= 2)), m, d);
    return buf;
}

void EpidemicSeries::validate() const {
    if (infected.size() != recovered.size())
        throw LengthMismatch("infected/recovered length mismatch in region " + region_id);
    if (infected.size() < 3)
        throw InsufficientData("series shorter than 3 days in region " + region_id);
    if (!(population > 0.0))
        throw Error("non-positive population in region " + region_id);
    for (std::size_t t = 0; t < infected.size(); ++t) {
        if (!std::isfinite(infected[t]) || !std::isfinite(recovered[t]))
            throw NonFiniteInput("non-finite count at day " + std::to_string(t) +
                                 " in region " + region_id);
        // negative observed infected counts are tolerated: when reporting
        // improves over time, late declines in the active count are recorded
        // at a higher rate than the early rises were, which can push the
        // observed series below zero even though the true series never is
        if (recovered[t] < 0.0)
            throw Error("negative cumulative count at day " + std::to_string(t) +
                        " in region " + region_id);
        if (infected[t] + recovered[t] > population * (1.0 + 1e-9))
            throw Error("I + R exceeds population at day " + std::to_string(t) +
                        " in region " + region_id);
    }
}

double UnderReporting::operator()(int t) const {
    if (cutoff >= 0 && t > cutoff) return 0.0;
    switch (family) {
        case Family::None:
            return 0.0;
        case Family::Quadratic: {
            const double T = static_cast<double>(horizon);
            const double r = (t + a * T) / ((1.0 + a) * T);
            return std::max(0.0, 1.0 - r * r);  // complete reporting past the horizon
        }
        case Family::Exponential:
            return 1.0 - 1.0 / (1.0 + b * std::exp(-a * (t - 1)));
    }
    return 0.0;
}

}  // namespace episeg
