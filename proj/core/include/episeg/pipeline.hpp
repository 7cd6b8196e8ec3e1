#ifndef EPISEG_PIPELINE_HPP
#define EPISEG_PIPELINE_HPP

#include <optional>
#include <string>

#include "episeg/detect.hpp"
#include "episeg/spatial.hpp"
#include "episeg/var.hpp"

namespace episeg {

enum class ModelVariant { Model1 = 1, Model2 = 2, Model3 = 3 };

struct PipelineConfig {
    ModelVariant variant = ModelVariant::Model3;
    DetectConfig detect;
    WeightScheme scheme = WeightScheme::SimilarityTop5;
    double distance_threshold = 500.0;  // miles
    UnderReporting::Family u_family = UnderReporting::Family::None;
    double u_a = 0.0;                   // used directly when a_grid is empty
    double u_b = 0.0;                   // known b of the exponential family
    int u_cutoff = -1;
    std::vector<double> a_grid;         // empty: no reporting-loss search
    int var_p_max = 7;
    bool screen_var = true;
};

struct AlphaInference {
    double estimate = 0.0;
    double stderr_ = 0.0;
    double p_value = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Full Model 1/2/3 state after the three estimation steps.
struct FittedModel {
    ModelVariant variant = ModelVariant::Model1;
    WeightScheme scheme = WeightScheme::SimilarityTop5;
    std::string region_id;
    int n_rows = 0;  // T - 1
    UnderReporting underreporting;
    ChangePointResult change_points;      // step 1
    std::vector<SegmentParams> segments;  // step 2, raw scale
    std::optional<AlphaInference> alpha;
    std::optional<SpatialWeights> weights;
    std::optional<VarModel> var;
    std::vector<int> var_breaks;
    ScalingInfo scaling;
    double lambda = 0.0;

    // training-window state needed for diagnostics and forecasting
    std::vector<DesignRow> rows;             // raw design rows
    std::vector<Eigen::Vector2d> z;          // spatial regressor (count scale)
    std::vector<Eigen::Vector2d> residuals;  // step-2 residuals
    Eigen::MatrixXd xtx_inv;                 // augmented system inverse
    double sigma2 = 0.0;
    int clamped_susceptible = 0;

    int segment_of_row(int t) const;  // 1-based row index -> segment index
};

struct ForecastReport {
    int horizon = 0;
    bool rolling = true;
    std::vector<double> predicted_infected;
    std::vector<double> predicted_recovered;
    std::vector<double> rel_err_infected;  // empty in free-running mode w/o truth
    std::vector<double> rel_err_recovered;
    double mrpe_infected = 0.0;
    double mrpe_recovered = 0.0;
    double sd_infected = 0.0;
    double sd_recovered = 0.0;
};

// Three-step estimation: change points on the target alone, augmented least
// squares with segment-wise rates plus the spatial effect, VAR on the
// residuals. Model 1/2 truncate the pipeline.
FittedModel fit(const EpidemicSeries& series, const RegionCatalog& catalog,
                const PipelineConfig& config);

struct UnderReportingSearch {
    double best_a = 0.0;
    std::vector<double> grid;
    std::vector<double> mrpe;  // in-sample MRPE of the corrected increments
};

UnderReportingSearch fit_underreporting(const EpidemicSeries& series,
                                        const PipelineConfig& config,
                                        const std::vector<double>& grid);

// series must extend n_test days past the training window in rolling mode;
// free-running recurses on its own predictions.
ForecastReport forecast(const FittedModel& model, const EpidemicSeries& series,
                        const RegionCatalog& catalog, int n_test, bool rolling = true);

// In-sample cumulative reconstruction from day 1.
struct FittedSeries {
    std::vector<double> infected;
    std::vector<double> recovered;
};
FittedSeries fitted_series(const FittedModel& model, const EpidemicSeries& series);

AlphaInference alpha_inference(const FittedModel& model);

struct SegmentInference {
    int start = 0, end = 0;
    double beta = 0.0, gamma = 0.0;
    double se_beta = 0.0, se_gamma = 0.0;
};
std::vector<SegmentInference> segment_rate_inference(const FittedModel& model);

// Serialized with a stable field order and a schema_version marker.
std::string to_json(const FittedModel& model);
std::string to_json(const ForecastReport& report);

}  // namespace episeg

#endif
