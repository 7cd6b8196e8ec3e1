#include "episeg/design.hpp"

#include <cmath>

namespace episeg {

std::vector<double> to_true_infected(const EpidemicSeries& series, const UnderReporting& u) {
    const std::size_t T = series.size();
    std::vector<double> out(T);
    for (std::size_t t = 1; t <= T; ++t) {
        if (u(static_cast<int>(t)) >= 1.0)
            throw UnderReportingSingular("u(t) >= 1 at day " + std::to_string(t));
    }
    for (double v : series.infected)
        if (!std::isfinite(v)) throw NonFiniteInput("non-finite infected count");

    out[0] = series.infected[0] / (1.0 - u(1));
    for (std::size_t t = 1; t < T; ++t) {
        const double d_obs = series.infected[t] - series.infected[t - 1];
        out[t] = out[t - 1] + d_obs / (1.0 - u(static_cast<int>(t) + 1));
    }
    return out;
}

DesignBuild build_design(const EpidemicSeries& series, const UnderReporting& u) {
    series.validate();
    const std::size_t T = series.size();
    const double N = series.population;

    DesignBuild b;
    b.true_infected = to_true_infected(series, u);

    b.rows.reserve(T - 1);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const double If = b.true_infected[t];
        const double R = series.recovered[t];
        double S = N - If - R;
        if (S < 0.0) {
            S = 0.0;
            ++b.clamped_susceptible;
        }
        const double d_obs = series.infected[t + 1] - series.infected[t];
        const double u_next = u(static_cast<int>(t) + 2);  // u(t+1) on 1-based days
        DesignRow row;
        row.y << d_obs / (1.0 - u_next), series.recovered[t + 1] - R;
        row.x.resize(2, 2);
        row.x << S * If / N, -If, 0.0, If;
        b.rows.push_back(std::move(row));
    }
    return b;
}

Eigen::VectorXd ScalingInfo::to_raw(const Eigen::VectorXd& scaled_coef) const {
    Eigen::VectorXd out = scaled_coef;
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] *= y_scale / x_scale[j % x_scale.size()];
    return out;
}

Eigen::VectorXd ScalingInfo::to_scaled(const Eigen::VectorXd& raw_coef) const {
    Eigen::VectorXd out = raw_coef;
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] *= x_scale[j % x_scale.size()] / y_scale;
    return out;
}

std::pair<std::vector<DesignRow>, ScalingInfo> standardize(const std::vector<DesignRow>& rows) {
    if (rows.size() < 2) throw InsufficientData("standardize needs at least 2 rows");
    const Eigen::Index d = rows.front().x.cols();
    const double n_obs = 2.0 * static_cast<double>(rows.size());

    // sample std over the stacked 2(T-1)-entry system
    double y_sum = 0.0, y_sq = 0.0;
    Eigen::VectorXd x_sum = Eigen::VectorXd::Zero(d), x_sq = Eigen::VectorXd::Zero(d);
    for (const auto& r : rows) {
        y_sum += r.y.sum();
        y_sq += r.y.squaredNorm();
        x_sum += r.x.colwise().sum().transpose();
        x_sq += r.x.array().square().colwise().sum().matrix().transpose();
    }
    auto sd = [&](double sum, double sq) {
        const double var = (sq - sum * sum / n_obs) / (n_obs - 1.0);
        return var > 0.0 ? std::sqrt(var) : 0.0;
    };

    ScalingInfo info;
    info.x_scale = Eigen::VectorXd::Ones(d);
    const double sy = sd(y_sum, y_sq);
    info.y_scale = sy > 0.0 ? sy : 1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double sx = sd(x_sum[j], x_sq[j]);
        if (sx > 0.0)
            info.x_scale[j] = sx;
        else
            info.degenerate_columns.push_back(static_cast<int>(j));
    }

    std::vector<DesignRow> scaled = rows;
    for (auto& r : scaled) {
        r.y /= info.y_scale;
        for (Eigen::Index j = 0; j < d; ++j) r.x.col(j) /= info.x_scale[j];
    }
    return {std::move(scaled), std::move(info)};
}

}  // namespace episeg
