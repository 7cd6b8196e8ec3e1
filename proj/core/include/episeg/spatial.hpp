#ifndef EPISEG_SPATIAL_HPP
#define EPISEG_SPATIAL_HPP

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "episeg/series.hpp"

namespace episeg {

// Immutable shared state for multi-region fits: per-region series plus the
// symmetric distance table (miles).
class RegionCatalog {
  public:
    void add_series(EpidemicSeries series);
    void set_distance(const std::string& a, const std::string& b, double miles);

    bool has(const std::string& id) const { return series_.count(id) != 0; }
    const EpidemicSeries& series(const std::string& id) const;
    std::vector<std::string> region_ids() const;
    std::optional<double> distance(const std::string& a, const std::string& b) const;
    // regions that are missing from the distance table entirely
    std::vector<std::string> isolated_regions() const;

  private:
    std::map<std::string, EpidemicSeries> series_;
    std::map<std::pair<std::string, std::string>, double> distances_;
};

enum class WeightScheme { Equal, DistancePower, SimilarityTop5, SimilarityAll };

struct SpatialWeights {
    WeightScheme scheme = WeightScheme::Equal;
    std::vector<std::string> neighbors;
    std::vector<double> omega;  // sums to 1
    std::vector<std::string> excluded;  // zero-distance/zero-score regions dropped
};

// sqrt of the summed squared differences of per-capita infected/recovered
// increments; the target's reporting-loss function is applied to both series.
double similarity_score(const EpidemicSeries& target, const EpidemicSeries& other,
                        const UnderReporting& u);

// Similarity pools and scores are computed over the target's window; the
// target series passed here may be a training-window truncation of the
// catalog entry.
SpatialWeights build_weights(const RegionCatalog& catalog, const EpidemicSeries& target,
                             WeightScheme scheme, double distance_threshold,
                             const UnderReporting& u = UnderReporting::none());

struct SpatialCovariate {
    std::vector<Eigen::Vector2d> z;  // t = 1..T-1, aligned with the response rows
    int gap_fills = 0;               // neighbor days filled with zero increment
    bool first_day_zeroed = false;   // Z_1 had no day-0 increment available
};

SpatialCovariate spatial_covariate(const SpatialWeights& weights, const RegionCatalog& catalog,
                                   const EpidemicSeries& target, const UnderReporting& u);

// Neighbor counts restricted to the target's date window; nullopt when the
// neighbor does not cover it.
std::optional<EpidemicSeries> align_to_window(const EpidemicSeries& neighbor, Date start,
                                              std::size_t length);

}  // namespace episeg

#endif
