#ifndef EPISEG_DESIGN_HPP
#define EPISEG_DESIGN_HPP

#include <Eigen/Dense>
#include <vector>

#include "episeg/series.hpp"

namespace episeg {

// One regression row of the stacked system Y_t = X_t B.  For the SIR design
// y is the pair (corrected new infections, new recoveries) and x is
//   ( S(t) I_f(t) / N   -I_f(t) )
//   (        0           I_f(t) )
// The same row type carries generic designs (e.g. the lagged-residual
// regression used for VAR break screening), so x may have any column count.
struct DesignRow {
    Eigen::Vector2d y;
    Eigen::Matrix<double, 2, Eigen::Dynamic> x;
};

// Per-day true infected counts I_f(t) recovered from observed counts and the
// reporting-loss function. Throws UnderReportingSingular if any u(t) >= 1.
std::vector<double> to_true_infected(const EpidemicSeries& series, const UnderReporting& u);

struct DesignBuild {
    std::vector<DesignRow> rows;  // t = 1..T-1
    std::vector<double> true_infected;
    int clamped_susceptible = 0;  // days where S(t) < 0 was clamped to 0
};

DesignBuild build_design(const EpidemicSeries& series, const UnderReporting& u);

// Column/response divisors for the standardized stacked system.  The stacked
// response (all 2(T-1) entries) gets one divisor; each regressor column gets
// its own.  Zero-variance columns keep divisor 1 and are flagged.
struct ScalingInfo {
    double y_scale = 1.0;
    Eigen::VectorXd x_scale;
    std::vector<int> degenerate_columns;

    // coefficient on the scaled system -> raw scale
    Eigen::VectorXd to_raw(const Eigen::VectorXd& scaled_coef) const;
    Eigen::VectorXd to_scaled(const Eigen::VectorXd& raw_coef) const;
};

std::pair<std::vector<DesignRow>, ScalingInfo> standardize(const std::vector<DesignRow>& rows);

}  // namespace episeg

#endif
