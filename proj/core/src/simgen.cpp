#include "episeg/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace episeg {

namespace {

constexpr double kPopulation = 1e6;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

int segment_of_day(const std::vector<int>& breaks, int t) {
    int j = 0;
    while (j < static_cast<int>(breaks.size()) && t >= breaks[j]) ++j;
    return j;
}

Eigen::Matrix2d var_phi() {
    Eigen::Matrix2d phi;
    phi << 0.8, 0.0, 0.2, 0.7;
    return phi;
}

// forward SIR recursion with externally supplied per-day rates
struct SirState {
    double i_f = 10.0;
    double r = 0.0;
    int clamped = 0;

    // returns the true increments (dI_f, dR) for one step
    Eigen::Vector2d step(double beta, double gamma, const Eigen::Vector2d& extra) {
        const double s = std::max(0.0, kPopulation - i_f - r);
        Eigen::Vector2d d;
        d[0] = beta * s * i_f / kPopulation - gamma * i_f + extra[0];
        d[1] = gamma * i_f + extra[1];
        if (i_f + d[0] < 0.0) {
            d[0] = -i_f;
            ++clamped;
        }
        if (r + d[1] < 0.0) {
            d[1] = -r;
            ++clamped;
        }
        const double overshoot = (i_f + d[0]) + (r + d[1]) - kPopulation;
        if (overshoot > 0.0) {
            d[0] = std::max(-i_f, d[0] - overshoot);
            ++clamped;
        }
        i_f += d[0];
        r += d[1];
        return d;
    }
};

// cumulative observed counts from the true increments and the reporting loss
EpidemicSeries observe(const std::string& id, const std::vector<Eigen::Vector2d>& increments,
                       const UnderReporting& u, double initial_infected) {
    EpidemicSeries s;
    s.region_id = id;
    s.start_date = parse_date("2020-03-01");
    s.population = kPopulation;
    s.infected.push_back(initial_infected * (1.0 - u(1)));
    s.recovered.push_back(0.0);
    for (std::size_t t = 0; t < increments.size(); ++t) {
        const double one_minus_u = 1.0 - u(static_cast<int>(t) + 2);
        s.infected.push_back(s.infected.back() + increments[t][0] * one_minus_u);
        s.recovered.push_back(s.recovered.back() + increments[t][1]);
    }
    return s;
}

}  // namespace

double Scenario::beta_at(int t) const { return beta[segment_of_day(breaks, t)]; }
double Scenario::gamma_at(int t) const { return gamma[segment_of_day(breaks, t)]; }

UnderReporting Scenario::underreporting(int horizon_override) const {
    const int h = horizon_override > 0 ? horizon_override : horizon;
    switch (u_family) {
        case UnderReporting::Family::None:
            return UnderReporting::none();
        case UnderReporting::Family::Quadratic:
            return UnderReporting::quadratic(u_a, h);
        case UnderReporting::Family::Exponential:
            return UnderReporting::exponential(u_a, u_b);
    }
    return UnderReporting::none();
}

Scenario scenario(char id) {
    Scenario sc;
    sc.id = id;
    switch (id) {
        case 'A':
            sc = {'A', 200, {100}, {0.10, 0.05}, {0.04, 0.04}};
            sc.spatial = true;
            sc.alpha = 1.0;
            sc.var_noise = true;
            break;
        case 'B':
            sc = {'B', 250, {100, 200}, {0.10, 0.05, 0.10}, {0.04, 0.06, 0.04}};
            sc.lognormal_var = 0.005;
            sc.u_family = UnderReporting::Family::Exponential;
            sc.u_a = 0.05;
            sc.u_b = 10.0;
            break;
        case 'C':
            sc = scenario('A');
            sc.id = 'C';
            sc.u_family = UnderReporting::Family::Quadratic;
            sc.u_a = 0.5;
            break;
        case 'D':
            sc = scenario('B');
            sc.id = 'D';
            sc.lognormal_var = 0.01;
            sc.u_family = UnderReporting::Family::None;
            sc.u_a = sc.u_b = 0.0;
            break;
        case 'E':
            sc = scenario('A');
            sc.id = 'E';
            sc.var_noise = false;
            sc.white_noise = true;
            break;
        case 'F':
            sc = scenario('B');
            sc.id = 'F';
            sc.u_family = UnderReporting::Family::Quadratic;
            sc.u_a = 0.5;
            sc.u_b = 0.0;
            break;
        case 'G':
            sc = {'G', 500, {200, 300, 400}, {0.10, 0.06, 0.04, 0.05},
                  {0.04, 0.04, 0.06, 0.04}};
            sc.lognormal_var = 0.005;
            sc.initial_infected = 0.1;
            break;
        case 'H':
            sc = {'H', 500, {150, 250, 350, 400}, {0.10, 0.05, 0.04, 0.06, 0.04},
                  {0.04, 0.04, 0.06, 0.04, 0.06}};
            sc.lognormal_var = 0.005;
            sc.initial_infected = 0.1;
            break;
        default:
            throw Error(std::string("unknown scenario: ") + id);
    }
    return sc;
}

Simulated generate(const Scenario& sc, std::uint64_t seed, int extra_days) {
    if (sc.beta.size() != sc.breaks.size() + 1 || sc.gamma.size() != sc.beta.size())
        throw Error("scenario segment counts do not match its break count");
    const int total = sc.horizon + extra_days;
    const int n = total - 1;  // increments
    std::mt19937_64 rng(splitmix64(seed));
    std::normal_distribution<double> normal(0.0, 1.0);

    const UnderReporting u = sc.underreporting();

    // neighbor path: deterministic drift toward the target's second regime
    std::vector<Eigen::Vector2d> neighbor_inc;
    if (sc.spatial) {
        SirState ns;
        const double denom = static_cast<double>(sc.horizon - 1);
        for (int t = 1; t <= n; ++t) {
            const double beta_s = 0.10 - 0.05 * t / denom;
            neighbor_inc.push_back(ns.step(std::max(0.0, beta_s), 0.04, Eigen::Vector2d::Zero()));
        }
    }

    // additive noise path
    std::vector<Eigen::Vector2d> noise(n, Eigen::Vector2d::Zero());
    if (sc.var_noise) {
        const Eigen::Matrix2d phi = var_phi();
        const double sd = std::sqrt(0.1);
        Eigen::Vector2d e = Eigen::Vector2d::Zero();
        for (int t = 0; t < 100 + n; ++t) {
            Eigen::Vector2d eta(sd * normal(rng), sd * normal(rng));
            e = phi * e + eta;
            if (t >= 100) noise[t - 100] = e;
        }
    } else if (sc.white_noise) {
        for (auto& e : noise) e = Eigen::Vector2d(normal(rng), normal(rng));
    }

    // coupled response recursion: each day's increment updates the state
    const double jitter_sd = std::sqrt(sc.lognormal_var);
    SirState state;
    state.i_f = sc.initial_infected;
    std::vector<Eigen::Vector2d> target_inc;
    std::vector<double> true_infected{state.i_f};
    for (int t = 1; t <= n; ++t) {
        double beta = sc.beta_at(t), gamma = sc.gamma_at(t);
        if (sc.lognormal_var > 0.0) {
            beta = std::exp(std::log(beta) + jitter_sd * normal(rng));
            gamma = std::exp(std::log(gamma) + jitter_sd * normal(rng));
        }
        Eigen::Vector2d extra = noise[t - 1];
        if (sc.spatial && t >= 2) {
            // lagged neighbor increment, per capita, scaled to the target size
            extra += sc.alpha * (neighbor_inc[t - 2] / kPopulation) * kPopulation;
        }
        target_inc.push_back(state.step(beta, gamma, extra));
        true_infected.push_back(state.i_f);
    }

    Simulated out;
    out.target = observe("T0", target_inc, u, sc.initial_infected);
    out.clamped = state.clamped;
    out.catalog.add_series(out.target);
    if (sc.spatial) {
        out.neighbor = observe("S1", neighbor_inc, u, 10.0);
        out.catalog.add_series(*out.neighbor);
        out.catalog.set_distance("T0", "S1", 100.0);
    }
    out.truth.breaks = sc.breaks;
    out.truth.beta = sc.beta;
    out.truth.gamma = sc.gamma;
    out.truth.alpha = sc.alpha;
    if (sc.var_noise) out.truth.phi = var_phi();
    out.truth.u_a = sc.u_a;
    out.truth.true_infected = std::move(true_infected);
    return out;
}

std::pair<double, double> success_interval(const std::vector<int>& breaks, int j, int horizon) {
    const int m = static_cast<int>(breaks.size());
    if (j < 0 || j >= m) throw Error("break index out of range");
    const double prev = j == 0 ? 0.0 : breaks[j - 1];
    const double next = j == m - 1 ? horizon : breaks[j + 1];
    return {breaks[j] - (breaks[j] - prev) / 5.0, breaks[j] + (next - breaks[j]) / 5.0};
}

namespace {

struct RepResult {
    bool ok = false;
    std::vector<double> location;  // per break, NaN when missed
    std::vector<double> beta, gamma;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double mrpe_i = std::numeric_limits<double>::quiet_NaN();
    double mrpe_r = std::numeric_limits<double>::quiet_NaN();
};

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
}

}  // namespace

ReplicateSummary run_replicates(const Scenario& sc, const ReplicateConfig& config) {
    if (config.n_reps < 1) throw Error("n_reps must be at least 1");
    const int m = static_cast<int>(sc.breaks.size());
    std::vector<RepResult> results(config.n_reps);

    auto run_one = [&](int r) {
        RepResult& res = results[r];
        res.location.assign(m, std::numeric_limits<double>::quiet_NaN());
        try {
            Simulated sim = generate(sc, splitmix64(config.seed) + r, config.n_test);
            EpidemicSeries train = sim.target;
            train.infected.resize(sc.horizon);
            train.recovered.resize(sc.horizon);

            FittedModel model = fit(train, sim.catalog, config.pipeline);

            for (int j = 0; j < m; ++j) {
                auto [lo, hi] = success_interval(sc.breaks, j, sc.horizon);
                double best = std::numeric_limits<double>::quiet_NaN();
                for (int est : model.change_points.final_points) {
                    if (est < lo || est > hi) continue;
                    if (std::isnan(best) ||
                        std::abs(est - sc.breaks[j]) < std::abs(best - sc.breaks[j]))
                        best = est;
                }
                if (!std::isnan(best)) res.location[j] = best / sc.horizon;
            }
            if (model.segments.size() == sc.beta.size()) {
                for (const SegmentParams& seg : model.segments) {
                    res.beta.push_back(seg.coef(0));
                    res.gamma.push_back(seg.coef(1));
                }
            }
            if (model.alpha) res.alpha = model.alpha->estimate;
            if (config.n_test > 0) {
                ForecastReport fc = forecast(model, sim.target, sim.catalog, config.n_test);
                res.mrpe_i = fc.mrpe_infected;
                res.mrpe_r = fc.mrpe_recovered;
            }
            res.ok = true;
        } catch (const Error&) {
            res.ok = false;
        }
    };

    const int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
        for (int r = 0; r < config.n_reps; ++r) run_one(r);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (int r = next++; r < config.n_reps; r = next++) run_one(r);
            });
        for (auto& t : pool) t.join();
    }

    ReplicateSummary sum;
    sum.n_reps = config.n_reps;
    sum.success_rate.assign(m, 0.0);
    sum.location_mean.assign(m, 0.0);
    sum.location_std.assign(m, 0.0);

    int ok_count = 0;
    std::vector<std::vector<double>> locs(m);
    std::vector<std::vector<double>> betas(sc.beta.size()), gammas(sc.gamma.size());
    std::vector<double> alphas, mrpe_i, mrpe_r;
    for (const RepResult& res : results) {
        if (!res.ok) {
            ++sum.failures;
            continue;
        }
        ++ok_count;
        for (int j = 0; j < m; ++j)
            if (!std::isnan(res.location[j])) locs[j].push_back(res.location[j]);
        if (!res.beta.empty()) {
            ++sum.matched_segment_reps;
            for (std::size_t s = 0; s < res.beta.size(); ++s) {
                betas[s].push_back(res.beta[s]);
                gammas[s].push_back(res.gamma[s]);
            }
        }
        if (!std::isnan(res.alpha)) alphas.push_back(res.alpha);
        if (!std::isnan(res.mrpe_i)) {
            mrpe_i.push_back(res.mrpe_i);
            mrpe_r.push_back(res.mrpe_r);
        }
    }

    for (int j = 0; j < m; ++j) {
        sum.success_rate[j] =
            ok_count > 0 ? static_cast<double>(locs[j].size()) / ok_count : 0.0;
        mean_std(locs[j], sum.location_mean[j], sum.location_std[j]);
    }
    sum.beta_mean.resize(betas.size());
    sum.beta_std.resize(betas.size());
    sum.gamma_mean.resize(gammas.size());
    sum.gamma_std.resize(gammas.size());
    for (std::size_t s = 0; s < betas.size(); ++s) {
        mean_std(betas[s], sum.beta_mean[s], sum.beta_std[s]);
        mean_std(gammas[s], sum.gamma_mean[s], sum.gamma_std[s]);
    }
    mean_std(alphas, sum.alpha_mean, sum.alpha_std);
    sum.alpha_count = static_cast<int>(alphas.size());
    double dummy;
    mean_std(mrpe_i, sum.mrpe_infected_mean, dummy);
    mean_std(mrpe_r, sum.mrpe_recovered_mean, dummy);
    sum.mrpe_count = static_cast<int>(mrpe_i.size());
    return sum;
}

}  // namespace episeg
