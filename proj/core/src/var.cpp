#include "episeg/var.hpp"

#include <cmath>
#include <limits>

namespace episeg {

namespace {

// Multivariate OLS of eps_t on its p lags over t = first..n-1 (0-based).
// Returns false when the lag Gram matrix is rank deficient.
bool ols_var(const std::vector<Eigen::Vector2d>& eps, int p, int first,
             std::vector<Eigen::Matrix2d>& phi, Eigen::Matrix2d& cov) {
    const int n = static_cast<int>(eps.size());
    const int n_eff = n - first;
    const int d = 2 * p;

    if (p == 0) {
        cov.setZero();
        for (int t = first; t < n; ++t) cov += eps[t] * eps[t].transpose();
        cov /= std::max(1, n_eff);
        phi.clear();
        return true;
    }

    Eigen::MatrixXd ztz = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd zty = Eigen::MatrixXd::Zero(d, 2);
    Eigen::VectorXd z(d);
    for (int t = first; t < n; ++t) {
        for (int l = 0; l < p; ++l) z.segment(2 * l, 2) = eps[t - 1 - l];
        ztz += z * z.transpose();
        zty += z * eps[t].transpose();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ztz);
    if (lu.rank() < d) return false;
    Eigen::MatrixXd coef = lu.solve(zty);  // d x 2, column j = equation j

    phi.assign(p, Eigen::Matrix2d::Zero());
    for (int l = 0; l < p; ++l) phi[l] = coef.block(2 * l, 0, 2, 2).transpose();

    cov.setZero();
    for (int t = first; t < n; ++t) {
        for (int l = 0; l < p; ++l) z.segment(2 * l, 2) = eps[t - 1 - l];
        Eigen::Vector2d r = eps[t] - coef.transpose() * z;
        cov += r * r.transpose();
    }
    cov /= std::max(1, n_eff);
    return true;
}

}  // namespace

Eigen::Vector2d VarModel::predict(const std::vector<Eigen::Vector2d>& history) const {
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    const int h = static_cast<int>(history.size());
    for (int l = 0; l < p && l < h; ++l) out += phi[l] * history[h - 1 - l];
    return out;
}

VarModel fit_var(const std::vector<Eigen::Vector2d>& residuals, int p_max) {
    const int n = static_cast<int>(residuals.size());
    if (n < 11) throw InsufficientData("too few residuals for VAR fitting");
    p_max = std::min(p_max, (n - 1) / 10);

    // selection on the common sample t = p_max..n-1
    int best_p = 0;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= p_max; ++p) {
        std::vector<Eigen::Matrix2d> phi;
        Eigen::Matrix2d cov;
        if (!ols_var(residuals, p, p_max, phi, cov)) continue;  // singular, skip
        const double n_eff = n - p_max;
        const double det = std::max(cov.determinant(), 1e-300);
        const double bic = std::log(det) + 4.0 * p * std::log(n_eff) / n_eff;
        if (bic < best_bic) {
            best_bic = bic;
            best_p = p;
        }
    }

    VarModel model;
    model.p = best_p;
    // refit the winner on its full usable sample
    while (model.p >= 0) {
        if (ols_var(residuals, model.p, model.p, model.phi, model.noise_cov)) break;
        --model.p;  // singular lag matrix, fall back one order
    }
    if (model.p < 0) model = VarModel{};
    return model;
}

VarScreenResult screen_var_breaks(const std::vector<Eigen::Vector2d>& residuals, int block_size,
                                  int p_max) {
    VarScreenResult out;
    out.model = fit_var(residuals, p_max);
    const int p = out.model.p;
    const int n = static_cast<int>(residuals.size());
    if (p < 1) return out;  // white noise, nothing to screen

    // lagged-residual regression in block-diagonal form so both equations
    // share one coefficient vector
    std::vector<DesignRow> rows;
    rows.reserve(n - p);
    Eigen::VectorXd z(2 * p);
    for (int t = p; t < n; ++t) {
        for (int l = 0; l < p; ++l) z.segment(2 * l, 2) = residuals[t - 1 - l];
        DesignRow row;
        row.y = residuals[t];
        row.x = Eigen::MatrixXd::Zero(2, 4 * p);
        row.x.block(0, 0, 1, 2 * p) = z.transpose();
        row.x.block(1, 2 * p, 1, 2 * p) = z.transpose();
        rows.push_back(std::move(row));
    }
    if (static_cast<int>(rows.size()) < 2 * block_size) return out;

    DetectConfig config;
    config.block_size = block_size;
    DetectOutput detect = detect_change_points(rows, config);
    if (detect.result.final_points.empty()) return out;

    for (int s : detect.result.final_points) out.breaks.push_back(s + p);
    const int last = detect.result.final_points.back() + p;  // residual index
    std::vector<Eigen::Vector2d> tail(residuals.begin() + (last - 1), residuals.end());
    if (static_cast<int>(tail.size()) > 10 * p + p) {
        std::vector<Eigen::Matrix2d> phi;
        Eigen::Matrix2d cov;
        if (ols_var(tail, p, p, phi, cov)) {
            out.model.phi = std::move(phi);
            out.model.noise_cov = cov;
        }
    }
    out.model.segment_start = last;
    return out;
}

std::vector<std::vector<double>> residual_acf(const std::vector<Eigen::Vector2d>& residuals,
                                              int max_lag) {
    const int n = static_cast<int>(residuals.size());
    if (max_lag >= n / 2) throw Error("max_lag must be below half the series length");

    std::vector<std::vector<double>> acf(2, std::vector<double>(max_lag + 1, 0.0));
    for (int coord = 0; coord < 2; ++coord) {
        double mean = 0.0;
        for (const auto& e : residuals) mean += e[coord];
        mean /= n;
        double gamma0 = 0.0;
        for (const auto& e : residuals) gamma0 += (e[coord] - mean) * (e[coord] - mean);
        gamma0 /= n;
        acf[coord][0] = 1.0;
        for (int h = 1; h <= max_lag; ++h) {
            double g = 0.0;
            for (int t = 0; t + h < n; ++t)
                g += (residuals[t][coord] - mean) * (residuals[t + h][coord] - mean);
            acf[coord][h] = gamma0 > 0.0 ? (g / n) / gamma0 : 0.0;
        }
    }
    return acf;
}

}  // namespace episeg
