#include "episeg/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "episeg/kmeans.hpp"

namespace episeg {

namespace {

// Gaussian-likelihood BIC for the stacked 2n-observation regression with
// breaks at the start of each kept block and coefficients refit segment by
// segment. Refitting keeps the removal decision local: dropping a block is
// judged by its own contribution, not by the level shift it would impose on
// everything downstream of it.
double bic_for_selection(const std::vector<DesignRow>& rows, const BlockPartition& partition,
                         const std::vector<bool>& kept) {
    const int d = static_cast<int>(rows.front().x.cols());
    const int n = static_cast<int>(rows.size());
    std::vector<int> bounds{1};
    for (int i = 1; i < partition.block_count(); ++i)
        if (kept[i]) bounds.push_back(partition.begin(i));
    bounds.push_back(n + 1);

    double rss = 0.0;
    int n_kept = 0;
    for (bool b : kept) n_kept += b ? 1 : 0;
    for (std::size_t j = 0; j + 1 < bounds.size(); ++j)
        rss += segment_ols(rows, bounds[j], bounds[j + 1]).rss;
    const double n_obs = 2.0 * n;
    return n_obs * std::log(std::max(rss, 1e-300) / n_obs) + d * n_kept * std::log(n_obs);
}

}  // namespace

std::vector<int> hard_threshold(const ThetaEstimate& theta, const std::vector<DesignRow>& rows,
                                const BlockPartition& partition) {
    const int k = partition.block_count();
    std::vector<double> jumps(k);
    jumps[0] = 0.0;
    for (int i = 1; i < k; ++i) jumps[i] = theta.theta.row(i).squaredNorm();

    std::vector<int> remaining(k);
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<bool> kept(k, false);
    kept[0] = true;  // the level block always stays in the model
    std::vector<int> selected;
    double bic_old = std::numeric_limits<double>::infinity();

    while (!remaining.empty()) {
        std::vector<double> values;
        values.reserve(remaining.size());
        for (int i : remaining) values.push_back(jumps[i]);
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        if (*mx - *mn <= 0.0) break;  // no separable jump left

        KMeans1D km = kmeans_1d(values, 2);
        const int large = km.centers[1] > km.centers[0] ? 1 : 0;
        std::vector<int> moved, still;
        for (std::size_t i = 0; i < remaining.size(); ++i)
            (km.assignment[i] == large ? moved : still).push_back(remaining[i]);
        if (moved.empty() || moved.size() == remaining.size()) break;

        std::vector<bool> trial = kept;
        for (int i : moved) trial[i] = true;
        const double bic_new = bic_for_selection(rows, partition, trial);
        if (bic_new - bic_old >= 0.0) break;
        bic_old = bic_new;
        kept = trial;
        for (int i : moved)
            if (i != 0) selected.push_back(i);
        remaining = still;
    }

    // backward elimination: blocks enter in K-means batches, so a weak block
    // can ride in alongside strong ones; drop any whose removal improves BIC
    bool dropped = true;
    while (dropped && !selected.empty()) {
        dropped = false;
        for (std::size_t j = 0; j < selected.size(); ++j) {
            std::vector<bool> trial = kept;
            trial[selected[j]] = false;
            const double bic_new = bic_for_selection(rows, partition, trial);
            if (bic_new < bic_old) {
                bic_old = bic_new;
                kept = trial;
                selected.erase(selected.begin() + j);
                dropped = true;
                break;
            }
        }
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<std::vector<int>> cluster_candidates(const std::vector<int>& candidates,
                                                 int block_size) {
    std::vector<std::vector<int>> clusters;
    if (candidates.empty()) return clusters;
    if (candidates.size() == 1) {
        clusters.push_back(candidates);
        return clusters;
    }

    // candidates further apart than one search window cannot come from the
    // same break, so the group count under that adjacency is a floor for k
    int k_min = 1;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (candidates[i] - candidates[i - 1] > 2 * block_size) ++k_min;

    std::vector<double> values(candidates.begin(), candidates.end());
    const int k_max = std::min<int>(static_cast<int>(candidates.size()), 10);
    const int k = gap_statistic_k(values, k_max, 50, 0x9e3779b97f4a7c15ull,
                                  std::min(k_min, k_max));
    KMeans1D km = kmeans_1d(values, k);

    // order clusters by center; drop empties
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return km.centers[a] < km.centers[b]; });
    for (int c : order) {
        std::vector<int> members;
        for (std::size_t i = 0; i < candidates.size(); ++i)
            if (km.assignment[i] == c) members.push_back(candidates[i]);
        if (!members.empty()) clusters.push_back(std::move(members));
    }
    return clusters;
}

OlsFit segment_ols(const std::vector<DesignRow>& rows, int start, int end) {
    const int n_seg = end - start;
    if (n_seg < 2) throw SegmentTooShort("segment [" + std::to_string(start) + ", " +
                                         std::to_string(end) + ") too short for OLS");
    const int d = static_cast<int>(rows.front().x.cols());
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(d);
    for (int t = start; t < end; ++t) {
        xtx += rows[t - 1].x.transpose() * rows[t - 1].x;
        xty += rows[t - 1].x.transpose() * rows[t - 1].y;
    }
    OlsFit fit;
    Eigen::MatrixXd inv = xtx.completeOrthogonalDecomposition().pseudoInverse();
    fit.coef = inv * xty;
    for (int t = start; t < end; ++t)
        fit.rss += (rows[t - 1].y - rows[t - 1].x * fit.coef).squaredNorm();
    const double dof = std::max(1.0, 2.0 * n_seg - static_cast<double>(d));
    fit.sigma2 = fit.rss / dof;
    fit.stderr_ = (inv.diagonal() * fit.sigma2).cwiseMax(0.0).cwiseSqrt();
    return fit;
}

ChangePointResult exhaustive_refine(const std::vector<DesignRow>& scaled_rows,
                                    const std::vector<DesignRow>& raw_rows,
                                    const std::vector<std::vector<int>>& clusters,
                                    const ThetaEstimate& theta,
                                    const BlockPartition& partition) {
    if (clusters.empty()) throw Error("exhaustive_refine: no clusters");
    const int n = static_cast<int>(scaled_rows.size());
    const int b_n = partition.block_size;
    const int m = static_cast<int>(clusters.size());
    const Eigen::MatrixXd levels = theta.levels();

    ChangePointResult result;
    result.clusters = clusters;
    for (const auto& c : clusters)
        result.candidates.insert(result.candidates.end(), c.begin(), c.end());
    std::sort(result.candidates.begin(), result.candidates.end());

    // block index sets per cluster, 1-based block numbering for the midpoint
    // rule; sentinels at the first and last blocks
    std::vector<std::vector<int>> block_sets(m + 2);
    block_sets[0] = {1};
    block_sets[m + 1] = {partition.block_count()};
    for (int i = 0; i < m; ++i)
        for (int day : clusters[i])
            block_sets[i + 1].push_back(partition.block_of(day) + 1);

    // local coefficient levels: cumulative increments up to the midpoint
    // between adjacent cluster block sets
    std::vector<Eigen::VectorXd> local(m + 2);
    for (int i = 1; i <= m + 1; ++i) {
        const int hi_prev = *std::max_element(block_sets[i - 1].begin(), block_sets[i - 1].end());
        const int lo_cur = *std::min_element(block_sets[i].begin(), block_sets[i].end());
        int mid = (hi_prev + lo_cur) / 2;
        mid = std::clamp(mid, 1, partition.block_count());
        local[i] = levels.row(mid - 1).transpose();
    }

    for (int i = 0; i < m; ++i) {
        const int c_lo = clusters[i].front(), c_hi = clusters[i].back();
        const bool singleton = clusters[i].size() == 1;
        int search_lo = singleton ? c_lo - b_n : c_lo;  // exclusive bounds (l, u)
        int search_hi = singleton ? c_hi + b_n : c_hi;
        int data_lo = c_lo - b_n;
        int data_hi = c_hi + b_n;  // data window [data_lo, data_hi)

        // keep refined points ordered when clusters sit closer than 2 b_n
        if (i > 0) {
            const int midpoint = (clusters[i - 1].back() + c_lo) / 2;
            data_lo = std::max(data_lo, midpoint + 1);
        }
        if (i + 1 < m) {
            const int midpoint = (c_hi + clusters[i + 1].front()) / 2;
            data_hi = std::min(data_hi, midpoint + 1);
        }
        if (data_lo < 1 || data_hi > n + 1) ++result.clipped_windows;
        data_lo = std::max(data_lo, 1);
        data_hi = std::min(data_hi, n + 1);

        // keep at least two rows on each side so the per-segment refit stays
        // well posed
        const int s_first = std::max({search_lo + 1, data_lo + 1, 3});
        const int s_last = std::min({search_hi - 1, data_hi - 1, n - 1});
        if (s_first > s_last) continue;

        double best_sse = std::numeric_limits<double>::infinity();
        int best_s = s_first;
        for (int s = s_first; s <= s_last; ++s) {
            double sse = 0.0;
            for (int t = data_lo; t < s; ++t)
                sse += (scaled_rows[t - 1].y - scaled_rows[t - 1].x * local[i + 1]).squaredNorm();
            for (int t = s; t < data_hi; ++t)
                sse += (scaled_rows[t - 1].y - scaled_rows[t - 1].x * local[i + 2]).squaredNorm();
            if (sse < best_sse) {  // ties keep the smallest s
                best_sse = sse;
                best_s = s;
            }
        }
        result.final_points.push_back(best_s);
    }
    std::sort(result.final_points.begin(), result.final_points.end());

    // per-segment least squares on the raw rows
    int prev = 1;
    for (std::size_t j = 0; j <= result.final_points.size(); ++j) {
        const int end = j < result.final_points.size() ? result.final_points[j] : n + 1;
        SegmentParams seg;
        seg.start = prev;
        seg.end = end;
        seg.coef = segment_ols(raw_rows, prev, end).coef;
        result.segments.push_back(std::move(seg));
        prev = end;
    }
    return result;
}

DetectOutput detect_change_points(const std::vector<DesignRow>& raw_rows,
                                  const DetectConfig& config) {
    DetectOutput out;
    auto [scaled, scaling] = standardize(raw_rows);
    out.scaling = scaling;
    out.partition = make_partition(static_cast<int>(raw_rows.size()), config.block_size);

    if (config.lambda_override >= 0.0)
        out.lambda = config.lambda_override;
    else
        out.lambda = lambda_path_and_cv(scaled, out.partition, config.lambda_grid_size).lambda;

    BlockSystem system(scaled, out.partition);
    out.theta = block_fused_lasso(system, out.lambda);

    std::vector<int> blocks = hard_threshold(out.theta, scaled, out.partition);
    std::vector<int> candidates;
    for (int b : blocks) candidates.push_back(out.partition.begin(b));

    if (candidates.empty()) {
        SegmentParams seg;
        seg.start = 1;
        seg.end = static_cast<int>(raw_rows.size()) + 1;
        seg.coef = segment_ols(raw_rows, seg.start, seg.end).coef;
        out.result.segments.push_back(std::move(seg));
        return out;
    }
    auto clusters = cluster_candidates(candidates, config.block_size);
    out.result = exhaustive_refine(scaled, raw_rows, clusters, out.theta, out.partition);
    return out;
}

}  // namespace episeg
