#include "episeg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace episeg {

namespace {

UnderReporting make_underreporting(const PipelineConfig& config, double a, int horizon) {
    switch (config.u_family) {
        case UnderReporting::Family::None:
            return UnderReporting::none();
        case UnderReporting::Family::Quadratic:
            return UnderReporting::quadratic(a, horizon, config.u_cutoff);
        case UnderReporting::Family::Exponential:
            return UnderReporting::exponential(a, config.u_b, config.u_cutoff);
    }
    return UnderReporting::none();
}

// Row of the augmented step-2 design: segment-wise (beta, gamma) blocks plus
// an optional trailing column for the spatial effect.
Eigen::MatrixXd augmented_row(const DesignRow& row, int segment, int n_segments,
                              const Eigen::Vector2d* z) {
    const int d = 2 * n_segments + (z ? 1 : 0);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, d);
    x.block(0, 2 * segment, 2, 2) = row.x;
    if (z) x.col(d - 1) = *z;
    return x;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

const char* scheme_name(WeightScheme s) {
    switch (s) {
        case WeightScheme::Equal: return "equal";
        case WeightScheme::DistancePower: return "distance";
        case WeightScheme::SimilarityTop5: return "similarity_top5";
        case WeightScheme::SimilarityAll: return "similarity_all";
    }
    return "equal";
}

const char* family_name(UnderReporting::Family f) {
    switch (f) {
        case UnderReporting::Family::None: return "none";
        case UnderReporting::Family::Quadratic: return "quadratic";
        case UnderReporting::Family::Exponential: return "exponential";
    }
    return "none";
}

}  // namespace

int FittedModel::segment_of_row(int t) const {
    for (std::size_t s = 0; s < segments.size(); ++s)
        if (t >= segments[s].start && t < segments[s].end) return static_cast<int>(s);
    return static_cast<int>(segments.size()) - 1;
}

FittedModel fit(const EpidemicSeries& series, const RegionCatalog& catalog,
                const PipelineConfig& config) {
    series.validate();
    const int T = static_cast<int>(series.size());

    double a = config.u_a;
    if (!config.a_grid.empty() && config.u_family != UnderReporting::Family::None)
        a = fit_underreporting(series, config, config.a_grid).best_a;
    const UnderReporting u = make_underreporting(config, a, T);

    DesignBuild build = build_design(series, u);
    const int n = static_cast<int>(build.rows.size());

    FittedModel model;
    model.variant = config.variant;
    model.scheme = config.scheme;
    model.region_id = series.region_id;
    model.n_rows = n;
    model.underreporting = u;
    model.clamped_susceptible = build.clamped_susceptible;
    model.rows = build.rows;

    // step 1: change points from the target series alone
    DetectOutput detect = detect_change_points(build.rows, config.detect);
    model.change_points = detect.result;
    model.scaling = detect.scaling;
    model.lambda = detect.lambda;

    // step 2: joint least squares with segment-wise rates (+ spatial effect)
    const bool use_z = config.variant != ModelVariant::Model1;
    if (use_z) {
        model.weights = build_weights(catalog, series, config.scheme,
                                      config.distance_threshold, u);
        SpatialCovariate cov = spatial_covariate(*model.weights, catalog, series, u);
        model.z.resize(n);
        for (int i = 0; i < n; ++i) model.z[i] = cov.z[i] * series.population;
    }

    const auto& segs = detect.result.segments;
    const int m = static_cast<int>(segs.size());
    const int d = 2 * m + (use_z ? 1 : 0);

    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(d);
    std::vector<int> row_segment(n);
    {
        int s = 0;
        for (int i = 0; i < n; ++i) {
            const int t = i + 1;
            while (s + 1 < m && t >= segs[s].end) ++s;
            row_segment[i] = s;
            Eigen::MatrixXd x = augmented_row(build.rows[i], s, m, use_z ? &model.z[i] : nullptr);
            xtx += x.transpose() * x;
            xty += x.transpose() * build.rows[i].y;
        }
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xtx);
    model.xtx_inv = cod.pseudoInverse();
    Eigen::VectorXd coef = model.xtx_inv * xty;

    model.segments = segs;
    for (int s = 0; s < m; ++s) model.segments[s].coef = coef.segment(2 * s, 2);

    double rss = 0.0;
    model.residuals.resize(n);
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXd x =
            augmented_row(build.rows[i], row_segment[i], m, use_z ? &model.z[i] : nullptr);
        model.residuals[i] = build.rows[i].y - x * coef;
        rss += model.residuals[i].squaredNorm();
    }
    model.sigma2 = rss / std::max(1, 2 * n - d);

    if (use_z) {
        AlphaInference inf;
        inf.estimate = coef(d - 1);
        inf.stderr_ = std::sqrt(model.sigma2 * model.xtx_inv(d - 1, d - 1));
        const double zstat = inf.stderr_ > 0.0 ? inf.estimate / inf.stderr_ : 0.0;
        inf.p_value = normal_two_sided_p(zstat);
        inf.ci_low = inf.estimate - 1.96 * inf.stderr_;
        inf.ci_high = inf.estimate + 1.96 * inf.stderr_;
        model.alpha = inf;
    }

    // step 3: residual VAR, screened for its own parameter breaks
    if (config.variant == ModelVariant::Model3) {
        if (config.screen_var) {
            VarScreenResult screen =
                screen_var_breaks(model.residuals, config.detect.block_size, config.var_p_max);
            model.var = screen.model;
            model.var_breaks = screen.breaks;
        } else {
            model.var = fit_var(model.residuals, config.var_p_max);
        }
    }
    return model;
}

UnderReportingSearch fit_underreporting(const EpidemicSeries& series,
                                        const PipelineConfig& config,
                                        const std::vector<double>& grid) {
    if (grid.empty()) throw Error("empty reporting-loss grid");
    const int T = static_cast<int>(series.size());

    UnderReportingSearch out;
    out.grid = grid;
    std::sort(out.grid.begin(), out.grid.end());

    double best = std::numeric_limits<double>::infinity();
    for (double a : out.grid) {
        const UnderReporting u = make_underreporting(config, a, T);
        DesignBuild build = build_design(series, u);
        DetectOutput detect = detect_change_points(build.rows, config.detect);

        // in-sample relative error of the corrected infection increments
        double acc = 0.0;
        int count = 0;
        for (const SegmentParams& seg : detect.result.segments) {
            for (int t = seg.start; t < seg.end; ++t) {
                const DesignRow& row = build.rows[t - 1];
                const double obs = row.y[0];
                if (obs == 0.0) continue;
                const double fitted = row.x.row(0).dot(seg.coef);
                acc += std::abs(fitted - obs) / std::abs(obs);
                ++count;
            }
        }
        const double mrpe = count > 0 ? acc / count : std::numeric_limits<double>::infinity();
        out.mrpe.push_back(mrpe);
        if (mrpe < best) {
            best = mrpe;
            out.best_a = a;
        }
    }
    return out;
}

ForecastReport forecast(const FittedModel& model, const EpidemicSeries& series,
                        const RegionCatalog& catalog, int n_test, bool rolling) {
    if (n_test < 1) throw Error("forecast horizon must be positive");
    const int t_train = model.n_rows + 1;  // training days
    const int t_full = static_cast<int>(series.size());
    if (rolling && t_full < t_train + n_test)
        throw HorizonTooLong("series too short for a rolling forecast of " +
                             std::to_string(n_test) + " days");

    const UnderReporting& u = model.underreporting;
    const double N = series.population;

    // spatial regressor over the full window, observed neighbor data
    std::vector<Eigen::Vector2d> z(std::max(0, t_full - 1), Eigen::Vector2d::Zero());
    if (model.weights) {
        SpatialCovariate cov = spatial_covariate(*model.weights, catalog, series, u);
        for (std::size_t i = 0; i < cov.z.size(); ++i) z[i] = cov.z[i] * N;
    }
    const double alpha = model.alpha ? model.alpha->estimate : 0.0;
    const Eigen::VectorXd& coef = model.segments.back().coef;

    ForecastReport report;
    report.horizon = n_test;
    report.rolling = rolling;

    std::vector<Eigen::Vector2d> history = model.residuals;

    if (rolling) {
        const std::vector<double> true_infected = to_true_infected(series, u);
        for (int h = 0; h < n_test; ++h) {
            const int day = t_train + h;  // 0-based day to predict
            const double i_f = true_infected[day - 1];
            const double s = std::max(0.0, N - i_f - series.recovered[day - 1]);

            Eigen::Matrix<double, 2, 2> x;
            x << s * i_f / N, -i_f, 0.0, i_f;
            Eigen::Vector2d mean = x * coef + alpha * (day - 1 < static_cast<int>(z.size())
                                                           ? z[day - 1]
                                                           : Eigen::Vector2d::Zero());
            Eigen::Vector2d yhat = mean;
            if (model.var) yhat += model.var->predict(history);

            const double one_minus_u = 1.0 - u(day + 1);
            const double pred_i = series.infected[day - 1] + yhat[0] * one_minus_u;
            const double pred_r = series.recovered[day - 1] + yhat[1];
            report.predicted_infected.push_back(pred_i);
            report.predicted_recovered.push_back(pred_r);

            if (series.infected[day] > 0.0)
                report.rel_err_infected.push_back(
                    std::abs(pred_i - series.infected[day]) / series.infected[day]);
            if (series.recovered[day] > 0.0)
                report.rel_err_recovered.push_back(
                    std::abs(pred_r - series.recovered[day]) / series.recovered[day]);

            // realized residual feeds the next VAR step
            Eigen::Vector2d y_obs;
            y_obs[0] = true_infected[day] - i_f;
            y_obs[1] = series.recovered[day] - series.recovered[day - 1];
            history.push_back(y_obs - mean);
        }
    } else {
        double i_f = to_true_infected(
            EpidemicSeries{series.region_id, series.start_date,
                           {series.infected.begin(), series.infected.begin() + t_train},
                           {series.recovered.begin(), series.recovered.begin() + t_train},
                           series.population},
            u)[t_train - 1];
        double r = series.recovered[t_train - 1];
        double i_obs = series.infected[t_train - 1];
        for (int h = 0; h < n_test; ++h) {
            const int day = t_train + h;
            const double s = std::max(0.0, N - i_f - r);

            Eigen::Matrix<double, 2, 2> x;
            x << s * i_f / N, -i_f, 0.0, i_f;
            Eigen::Vector2d yhat = x * coef + alpha * (day - 1 < static_cast<int>(z.size())
                                                           ? z[day - 1]
                                                           : Eigen::Vector2d::Zero());
            Eigen::Vector2d eps = Eigen::Vector2d::Zero();
            if (model.var) {
                eps = model.var->predict(history);
                history.push_back(eps);  // recursion on its own predictions
            }
            yhat += eps;

            const double one_minus_u = 1.0 - u(day + 1);
            i_obs += yhat[0] * one_minus_u;
            i_f += yhat[0];
            r += yhat[1];
            report.predicted_infected.push_back(i_obs);
            report.predicted_recovered.push_back(r);

            if (day < t_full && series.infected[day] > 0.0)
                report.rel_err_infected.push_back(std::abs(i_obs - series.infected[day]) /
                                                  series.infected[day]);
            if (day < t_full && series.recovered[day] > 0.0)
                report.rel_err_recovered.push_back(std::abs(r - series.recovered[day]) /
                                                   series.recovered[day]);
        }
    }

    auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = sd = 0.0;
        if (v.empty()) return;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        if (v.size() < 2) return;
        for (double x : v) sd += (x - mean) * (x - mean);
        sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    };
    mean_sd(report.rel_err_infected, report.mrpe_infected, report.sd_infected);
    mean_sd(report.rel_err_recovered, report.mrpe_recovered, report.sd_recovered);
    return report;
}

FittedSeries fitted_series(const FittedModel& model, const EpidemicSeries& series) {
    const int n = model.n_rows;
    if (static_cast<int>(series.size()) < n + 1)
        throw LengthMismatch("series shorter than the fitted window");

    FittedSeries out;
    out.infected.push_back(series.infected[0]);
    out.recovered.push_back(series.recovered[0]);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d yhat = model.rows[i].y - model.residuals[i];
        const double one_minus_u = 1.0 - model.underreporting(i + 2);
        out.infected.push_back(series.infected[i] + yhat[0] * one_minus_u);
        out.recovered.push_back(series.recovered[i] + yhat[1]);
    }
    return out;
}

AlphaInference alpha_inference(const FittedModel& model) {
    if (!model.alpha) throw Error("model has no spatial effect");
    return *model.alpha;
}

std::vector<SegmentInference> segment_rate_inference(const FittedModel& model) {
    std::vector<SegmentInference> out;
    for (const SegmentParams& seg : model.segments) {
        if (seg.end - seg.start < 3)
            throw SegmentTooShort("segment [" + std::to_string(seg.start) + ", " +
                                  std::to_string(seg.end) + ") has fewer than 3 days");
        OlsFit ols = segment_ols(model.rows, seg.start, seg.end);
        SegmentInference inf;
        inf.start = seg.start;
        inf.end = seg.end;
        inf.beta = ols.coef(0);
        inf.gamma = ols.coef(1);
        inf.se_beta = ols.stderr_(0);
        inf.se_gamma = ols.stderr_(1);
        out.push_back(inf);
    }
    return out;
}

std::string to_json(const FittedModel& model) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["region_id"] = model.region_id;
    j["variant"] = static_cast<int>(model.variant);
    j["scheme"] = scheme_name(model.scheme);
    j["n_rows"] = model.n_rows;
    j["lambda"] = model.lambda;
    j["underreporting"] = {{"family", family_name(model.underreporting.family)},
                           {"a", model.underreporting.a},
                           {"b", model.underreporting.b},
                           {"horizon", model.underreporting.horizon},
                           {"cutoff", model.underreporting.cutoff}};
    j["change_points"] = model.change_points.final_points;
    j["candidates"] = model.change_points.candidates;
    j["clipped_windows"] = model.change_points.clipped_windows;

    nlohmann::ordered_json segs = nlohmann::ordered_json::array();
    for (const SegmentParams& s : model.segments)
        segs.push_back({{"start", s.start},
                        {"end", s.end},
                        {"beta", s.coef(0)},
                        {"gamma", s.coef(1)}});
    j["segments"] = segs;

    if (model.alpha)
        j["alpha"] = {{"estimate", model.alpha->estimate},
                      {"stderr", model.alpha->stderr_},
                      {"p_value", model.alpha->p_value},
                      {"ci_low", model.alpha->ci_low},
                      {"ci_high", model.alpha->ci_high}};
    if (model.weights) {
        j["neighbors"] = model.weights->neighbors;
        j["omega"] = model.weights->omega;
        j["excluded"] = model.weights->excluded;
    }
    if (model.var) {
        nlohmann::ordered_json phi = nlohmann::ordered_json::array();
        for (const Eigen::Matrix2d& m : model.var->phi)
            phi.push_back({m(0, 0), m(0, 1), m(1, 0), m(1, 1)});
        j["var"] = {{"p", model.var->p},
                    {"phi", phi},
                    {"noise_cov",
                     {model.var->noise_cov(0, 0), model.var->noise_cov(0, 1),
                      model.var->noise_cov(1, 0), model.var->noise_cov(1, 1)}},
                    {"segment_start", model.var->segment_start},
                    {"breaks", model.var_breaks}};
    }
    j["sigma2"] = model.sigma2;
    j["clamped_susceptible"] = model.clamped_susceptible;
    return j.dump(2);
}

std::string to_json(const ForecastReport& report) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["horizon"] = report.horizon;
    j["rolling"] = report.rolling;
    j["predicted_infected"] = report.predicted_infected;
    j["predicted_recovered"] = report.predicted_recovered;
    j["rel_err_infected"] = report.rel_err_infected;
    j["rel_err_recovered"] = report.rel_err_recovered;
    j["mrpe_infected"] = report.mrpe_infected;
    j["mrpe_recovered"] = report.mrpe_recovered;
    j["sd_infected"] = report.sd_infected;
    j["sd_recovered"] = report.sd_recovered;
    return j.dump(2);
}

}  // namespace episeg
