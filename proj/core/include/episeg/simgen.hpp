#ifndef EPISEG_SIMGEN_HPP
#define EPISEG_SIMGEN_HPP

#include <cstdint>
#include <optional>

#include "episeg/pipeline.hpp"

namespace episeg {

// One synthetic setting: piecewise-constant rates with optional lognormal
// jitter, optional spatial component with a drifting neighbor, optional
// serially correlated (VAR) or white additive noise, optional reporting loss.
struct Scenario {
    char id = 'A';
    int horizon = 200;               // T
    std::vector<int> breaks;         // 1-based change days t_1 < ... < t_m
    std::vector<double> beta;        // per-segment rates, |breaks| + 1 entries
    std::vector<double> gamma;
    double lognormal_var = 0.0;      // log-scale variance of the rate jitter
    bool spatial = false;            // neighbor with beta_s(t) = 0.10 - 0.05 t/(T-1)
    double alpha = 0.0;
    bool var_noise = false;          // VAR(1), phi = [[0.8, 0], [0.2, 0.7]], 0.1 I noise
    bool white_noise = false;        // N(0, I_2)
    UnderReporting::Family u_family = UnderReporting::Family::None;
    double u_a = 0.0;
    double u_b = 0.0;
    double initial_infected = 10.0;  // I_f(1); smaller for long horizons so the
                                     // epidemic does not peak before the last break

    double beta_at(int t) const;     // segment rate at 1-based day t
    double gamma_at(int t) const;
    UnderReporting underreporting(int horizon_override = 0) const;
};

// The eight settings of the simulation study, checked-in constants.
Scenario scenario(char id);

struct GroundTruth {
    std::vector<int> breaks;
    std::vector<double> beta, gamma;
    double alpha = 0.0;
    Eigen::Matrix2d phi = Eigen::Matrix2d::Zero();
    double u_a = 0.0;
    std::vector<double> true_infected;  // I_f path, one per day
};

struct Simulated {
    EpidemicSeries target;                  // observed counts
    std::optional<EpidemicSeries> neighbor; // observed counts, id "S1"
    RegionCatalog catalog;                  // target + neighbor, 100 mi apart
    GroundTruth truth;
    int clamped = 0;                        // days where I_f or S hit zero
};

// Forward simulation from I_f(1) = initial_infected, R(1) = 0, N = 1e6:
// neighbor path
// first, then the noise path, then the coupled response recursion where each
// day's increment updates the state. extra_days extends the series past the
// scenario horizon for out-of-sample evaluation; rates and noise continue
// their last regime.
Simulated generate(const Scenario& sc, std::uint64_t seed, int extra_days = 0);

// Closed interval [t_j - (t_j - t_{j-1})/5, t_j + (t_{j+1} - t_j)/5] with
// t_0 = 0 and t_{m+1} = horizon; j is 0-based.
std::pair<double, double> success_interval(const std::vector<int>& breaks, int j, int horizon);

struct ReplicateConfig {
    int n_reps = 20;
    std::uint64_t seed = 1;
    PipelineConfig pipeline;
    int n_test = 0;   // out-of-sample days appended and forecast per replicate
    int jobs = 1;
};

struct ReplicateSummary {
    int n_reps = 0;
    int failures = 0;
    std::vector<double> success_rate;                  // per true break
    std::vector<double> location_mean, location_std;   // matched estimate / T
    std::vector<double> beta_mean, beta_std;           // per segment, reps with
    std::vector<double> gamma_mean, gamma_std;         // the true segment count
    int matched_segment_reps = 0;
    double alpha_mean = 0.0, alpha_std = 0.0;
    int alpha_count = 0;
    double mrpe_infected_mean = 0.0, mrpe_recovered_mean = 0.0;
    int mrpe_count = 0;
};

// Monte-Carlo study over per-replicate RNG streams derived from (seed, rep).
ReplicateSummary run_replicates(const Scenario& sc, const ReplicateConfig& config);

}  // namespace episeg

#endif
