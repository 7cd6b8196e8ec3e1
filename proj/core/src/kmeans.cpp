#include "episeg/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "episeg/series.hpp"

namespace episeg {

KMeans1D kmeans_1d(const std::vector<double>& values, int k) {
    const int n = static_cast<int>(values.size());
    if (k < 1 || k > n) throw Error("kmeans_1d: invalid cluster count");

    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;

    KMeans1D result;
    result.centers.resize(k);
    if (k == 1) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= n;
        result.centers[0] = mean;
        result.assignment.assign(n, 0);
        for (double v : values) result.within_dispersion += (v - mean) * (v - mean);
        return result;
    }
    for (int j = 0; j < k; ++j) result.centers[j] = mn + (mx - mn) * j / (k - 1);

    result.assignment.assign(n, 0);
    for (int iter = 0; iter < 1000; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double d = std::abs(values[i] - result.centers[j]);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            if (best != result.assignment[i]) {
                result.assignment[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        for (int j = 0; j < k; ++j) {
            double sum = 0.0;
            int count = 0;
            for (int i = 0; i < n; ++i)
                if (result.assignment[i] == j) {
                    sum += values[i];
                    ++count;
                }
            if (count > 0) result.centers[j] = sum / count;
        }
    }
    for (int i = 0; i < n; ++i) {
        const double d = values[i] - result.centers[result.assignment[i]];
        result.within_dispersion += d * d;
    }
    return result;
}

int gap_statistic_k(const std::vector<double>& values, int k_max, int n_ref,
                    std::uint64_t seed, int k_min) {
    const int n = static_cast<int>(values.size());
    if (n <= 1) return n;
    k_min = std::clamp(k_min, 1, n);
    // within-cluster dispersion is identically zero at k = n, which blows up
    // the gap there; keep the elbow search below it
    k_max = std::min(k_max, n - 1);
    if (k_min >= k_max) return k_min;

    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx == mn) return 1;

    auto log_w = [](const std::vector<double>& v, int k) {
        const double w = kmeans_1d(v, k).within_dispersion;
        return std::log(std::max(w, 1e-300));
    };

    std::vector<double> gap(k_max + 1, 0.0), s(k_max + 1, 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(mn, mx);

    std::vector<std::vector<double>> refs(n_ref, std::vector<double>(n));
    for (auto& ref : refs)
        for (double& x : ref) x = unif(rng);

    for (int k = 1; k <= k_max; ++k) {
        const double lw = log_w(values, k);
        double mean = 0.0, sq = 0.0;
        for (const auto& ref : refs) {
            const double l = log_w(ref, k);
            mean += l;
            sq += l * l;
        }
        mean /= n_ref;
        const double sd = std::sqrt(std::max(0.0, sq / n_ref - mean * mean));
        gap[k] = mean - lw;
        s[k] = sd * std::sqrt(1.0 + 1.0 / n_ref);
    }
    // A negative gap means k clusters explain the data worse than a uniform
    // reference would, so such k are never selected even if the one-standard-
    // error elbow condition happens to hold at them.
    for (int k = k_min; k < k_max; ++k)
        if (gap[k] >= 0.0 && gap[k] >= gap[k + 1] - s[k + 1]) return k;
    for (int k = k_min; k < k_max; ++k)
        if (gap[k] >= gap[k + 1] - s[k + 1]) return k;
    return k_max;
}

}  // namespace episeg
