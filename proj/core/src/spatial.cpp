#include "episeg/spatial.hpp"

#include <algorithm>
#include <cmath>

namespace episeg {

namespace {
constexpr int kMaxNeighbors = 5;
}

void RegionCatalog::add_series(EpidemicSeries series) {
    series.validate();
    series_[series.region_id] = std::move(series);
}

void RegionCatalog::set_distance(const std::string& a, const std::string& b, double miles) {
    if (miles < 0.0) throw Error("negative distance between " + a + " and " + b);
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    distances_[key] = miles;
}

const EpidemicSeries& RegionCatalog::series(const std::string& id) const {
    auto it = series_.find(id);
    if (it == series_.end()) throw Error("unknown region: " + id);
    return it->second;
}

std::vector<std::string> RegionCatalog::region_ids() const {
    std::vector<std::string> ids;
    ids.reserve(series_.size());
    for (const auto& [id, s] : series_) ids.push_back(id);
    return ids;
}

std::optional<double> RegionCatalog::distance(const std::string& a, const std::string& b) const {
    if (a == b) return 0.0;
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto it = distances_.find(key);
    if (it == distances_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> RegionCatalog::isolated_regions() const {
    std::vector<std::string> out;
    for (const auto& [id, s] : series_) {
        bool found = false;
        for (const auto& [key, d] : distances_)
            if (key.first == id || key.second == id) {
                found = true;
                break;
            }
        if (!found) out.push_back(id);
    }
    return out;
}

double similarity_score(const EpidemicSeries& target, const EpidemicSeries& other,
                        const UnderReporting& u) {
    if (target.size() != other.size())
        throw LengthMismatch("similarity_score: series lengths differ");
    const double n_t = target.population, n_o = other.population;
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < target.size(); ++t) {
        const double one_minus_u = 1.0 - u(static_cast<int>(t) + 2);
        if (one_minus_u <= 0.0) throw UnderReportingSingular("u(t+1) >= 1 in similarity score");
        const double di_t = (target.infected[t + 1] - target.infected[t]) / one_minus_u / n_t;
        const double di_o = (other.infected[t + 1] - other.infected[t]) / one_minus_u / n_o;
        const double dr_t = (target.recovered[t + 1] - target.recovered[t]) / n_t;
        const double dr_o = (other.recovered[t + 1] - other.recovered[t]) / n_o;
        acc += (di_t - di_o) * (di_t - di_o) + (dr_t - dr_o) * (dr_t - dr_o);
    }
    return std::sqrt(acc);
}

std::optional<EpidemicSeries> align_to_window(const EpidemicSeries& neighbor, Date start,
                                              std::size_t length) {
    const std::int64_t off = start.days - neighbor.start_date.days;
    if (off < 0 || off + static_cast<std::int64_t>(length) > static_cast<std::int64_t>(neighbor.size()))
        return std::nullopt;
    EpidemicSeries out = neighbor;
    out.start_date = start;
    out.infected.assign(neighbor.infected.begin() + off, neighbor.infected.begin() + off + length);
    out.recovered.assign(neighbor.recovered.begin() + off,
                         neighbor.recovered.begin() + off + length);
    return out;
}

SpatialWeights build_weights(const RegionCatalog& catalog, const EpidemicSeries& target,
                             WeightScheme scheme, double distance_threshold,
                             const UnderReporting& u) {
    SpatialWeights w;
    w.scheme = scheme;

    std::vector<std::pair<std::string, double>> pool;  // (id, score)
    const bool by_distance =
        scheme == WeightScheme::Equal || scheme == WeightScheme::DistancePower;
    for (const std::string& id : catalog.region_ids()) {
        if (id == target.region_id) continue;
        if (by_distance) {
            auto d = catalog.distance(target.region_id, id);
            if (d && *d <= distance_threshold) pool.emplace_back(id, *d);
        } else {
            auto aligned = align_to_window(catalog.series(id), target.start_date, target.size());
            if (!aligned) continue;
            pool.emplace_back(id, similarity_score(target, *aligned, u));
        }
    }
    std::sort(pool.begin(), pool.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });

    // zero scores make 1/s undefined; drop them with a note
    if (scheme != WeightScheme::Equal) {
        std::vector<std::pair<std::string, double>> keep;
        for (auto& [id, s] : pool) {
            if (s > 0.0)
                keep.push_back({id, s});
            else
                w.excluded.push_back(id);
        }
        pool = std::move(keep);
    }

    if (scheme != WeightScheme::SimilarityAll && pool.size() > kMaxNeighbors)
        pool.resize(kMaxNeighbors);
    if (pool.empty()) throw NoNeighbors("no eligible neighbors for region " + target.region_id);

    double norm = 0.0;
    for (auto& [id, s] : pool) {
        w.neighbors.push_back(id);
        const double raw = scheme == WeightScheme::Equal ? 1.0 : 1.0 / s;
        w.omega.push_back(raw);
        norm += raw;
    }
    for (double& o : w.omega) o /= norm;
    return w;
}

SpatialCovariate spatial_covariate(const SpatialWeights& weights, const RegionCatalog& catalog,
                                   const EpidemicSeries& target, const UnderReporting& u) {
    const int T = static_cast<int>(target.size());

    SpatialCovariate cov;
    cov.z.assign(T - 1, Eigen::Vector2d::Zero());

    for (std::size_t j = 0; j < weights.neighbors.size(); ++j) {
        const EpidemicSeries& nb = catalog.series(weights.neighbors[j]);
        const double omega = weights.omega[j];
        const double n_j = nb.population;
        // target day index t (0-based) maps to this neighbor index
        const std::int64_t off = target.start_date.days - nb.start_date.days;
        for (int t = 0; t < T - 1; ++t) {
            // increment from target day t-1 to t, i.e. neighbor indices t-1, t
            const std::int64_t a = t - 1 + off, b = t + off;
            if (a < 0 || b >= static_cast<std::int64_t>(nb.size())) {
                if (t == 0)
                    cov.first_day_zeroed = true;  // no day-0 increment for Z_1
                else
                    ++cov.gap_fills;
                continue;
            }
            const double one_minus_u = 1.0 - u(t + 1);
            if (one_minus_u <= 0.0)
                throw UnderReportingSingular("u(t) >= 1 in spatial covariate");
            const double di = nb.infected[b] - nb.infected[a];
            const double dr = nb.recovered[b] - nb.recovered[a];
            cov.z[t][0] += omega * di / (n_j * one_minus_u);
            cov.z[t][1] += omega * dr / n_j;
        }
    }
    return cov;
}

}  // namespace episeg
