#ifndef EPISEG_VAR_HPP
#define EPISEG_VAR_HPP

#include <Eigen/Dense>
#include <vector>

#include "episeg/detect.hpp"

namespace episeg {

struct VarModel {
    int p = 0;                          // lag order; 0 = white noise
    std::vector<Eigen::Matrix2d> phi;   // phi_1 .. phi_p
    Eigen::Matrix2d noise_cov = Eigen::Matrix2d::Zero();
    int segment_start = 1;              // first residual index of the fitted segment

    // one-step prediction from the trailing history (most recent last)
    Eigen::Vector2d predict(const std::vector<Eigen::Vector2d>& history) const;
};

// Lag order by BIC over 0..p_max (common estimation sample), coefficients by
// per-equation least squares on lagged regressors.
VarModel fit_var(const std::vector<Eigen::Vector2d>& residuals, int p_max);

struct VarScreenResult {
    std::vector<int> breaks;  // residual-series indices (1-based)
    VarModel model;           // refit on the last stationary segment
};

// Change points in the VAR parameters via the block fused lasso stack applied
// to the lagged-residual regression; the last segment is refit for
// forecasting.
VarScreenResult screen_var_breaks(const std::vector<Eigen::Vector2d>& residuals, int block_size,
                                  int p_max = 7);

// Per-coordinate sample autocorrelations rho(0..max_lag).
std::vector<std::vector<double>> residual_acf(const std::vector<Eigen::Vector2d>& residuals,
                                              int max_lag);

}  // namespace episeg

#endif
