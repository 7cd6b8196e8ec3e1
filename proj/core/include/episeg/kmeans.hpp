#ifndef EPISEG_KMEANS_HPP
#define EPISEG_KMEANS_HPP

#include <cstdint>
#include <vector>

namespace episeg {

struct KMeans1D {
    std::vector<int> assignment;    // cluster index per input value
    std::vector<double> centers;    // ascending
    double within_dispersion = 0.0; // sum of squared deviations from centers
};

// Lloyd's algorithm on scalars. Deterministic: centers start at k quantile
// positions between min and max (k = 2 gives min/max), iterate until the
// assignment stabilizes.
KMeans1D kmeans_1d(const std::vector<double>& values, int k);

// Number of clusters by the gap statistic: reference sets drawn uniformly
// over [min, max] of the data, first k >= k_min with a nonnegative gap
// satisfying Gap(k) >= Gap(k+1) - s_{k+1}.
int gap_statistic_k(const std::vector<double>& values, int k_max, int n_ref = 50,
                    std::uint64_t seed = 0x9e3779b97f4a7c15ull, int k_min = 1);

}  // namespace episeg

#endif
