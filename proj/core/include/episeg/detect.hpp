#ifndef EPISEG_DETECT_HPP
#define EPISEG_DETECT_HPP

#include <Eigen/Dense>
#include <vector>

#include "episeg/design.hpp"
#include "episeg/lasso.hpp"

namespace episeg {

// Half-open [start, end) range of 1-based row indices with the coefficients
// refit on that range.
struct SegmentParams {
    int start = 0;
    int end = 0;
    Eigen::VectorXd coef;  // (beta, gamma) for the SIR design
};

struct ChangePointResult {
    std::vector<int> candidates;            // day indices surviving thresholding
    std::vector<std::vector<int>> clusters; // candidate days grouped
    std::vector<int> final_points;          // refined day indices, ascending
    std::vector<SegmentParams> segments;    // refit on raw rows, partition [1, n]
    int clipped_windows = 0;                // search windows truncated at [1, n]
};

// Candidate blocks with large parameter jumps: 2-center K-means on the
// squared increment norms, iterated with a BIC stopping rule. Returns 0-based
// block indices (never block 0); empty means no change points.
std::vector<int> hard_threshold(const ThetaEstimate& theta, const std::vector<DesignRow>& rows,
                                const BlockPartition& partition);

// Groups candidate day indices by 1-D K-means with the cluster count chosen
// by the gap statistic. Input must be sorted ascending.
std::vector<std::vector<int>> cluster_candidates(const std::vector<int>& candidates,
                                                 int block_size);

// Local two-segment exhaustive search around each cluster, then per-segment
// least squares on the raw rows.
ChangePointResult exhaustive_refine(const std::vector<DesignRow>& scaled_rows,
                                    const std::vector<DesignRow>& raw_rows,
                                    const std::vector<std::vector<int>>& clusters,
                                    const ThetaEstimate& theta,
                                    const BlockPartition& partition);

struct DetectConfig {
    int block_size = 7;
    int lambda_grid_size = 20;
    double lambda_override = -1.0;  // >= 0 skips cross-validation
};

struct DetectOutput {
    ChangePointResult result;
    ThetaEstimate theta;
    ScalingInfo scaling;
    double lambda = 0.0;
    BlockPartition partition;
};

// Full stack: standardize, cross-validated block fused lasso,
// hard-thresholding, clustering, exhaustive refinement.
DetectOutput detect_change_points(const std::vector<DesignRow>& raw_rows,
                                  const DetectConfig& config);

// Per-segment OLS on the stacked rows of [start, end); coef and standard
// errors per the segment linear model with sigma^2 = RSS / (2 n_seg - d).
struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd stderr_;
    double sigma2 = 0.0;
    double rss = 0.0;
};

OlsFit segment_ols(const std::vector<DesignRow>& rows, int start, int end);

}  // namespace episeg

#endif
