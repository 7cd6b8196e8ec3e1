// episeg command line: simulate | fit | forecast | replicate | ingest-check
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "episeg/ingest.hpp"
#include "episeg/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct FitFlags {
    std::string data;  // direct series CSV
    std::string cases, populations, distances, national;
    std::string region;
    int model = 3;
    std::string weights = "similarity-top5";
    int block_size = 7;
    int lambda_grid = 20;
    double distance_threshold = 500.0;
    std::string u_family = "none";
    double u_a = 0.0, u_b = 0.0;
    int u_cutoff = -1;
    std::vector<double> a_grid;
    int a_grid_points = 21;
    double a_grid_low = 0.1, a_grid_high = 0.3;
    bool grid_search = false;
    int var_p_max = 7;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
    cmd->add_option("--data", f.data, "series CSV (date,region_id,infected,recovered,population)");
    cmd->add_option("--cases", f.cases, "cases CSV (date,region_id,cases,deaths)");
    cmd->add_option("--populations", f.populations, "population CSV (region_id,population)");
    cmd->add_option("--distances", f.distances, "distance CSV (region_a,region_b,miles)");
    cmd->add_option("--national", f.national, "national CSV (date,recovered,deaths)");
    cmd->add_option("--region", f.region, "target region id");
    cmd->add_option("--model", f.model, "model variant 1|2|3")->check(CLI::Range(1, 3));
    cmd->add_option("--weights", f.weights, "equal|distance|similarity-top5|similarity-all");
    cmd->add_option("--block-size", f.block_size, "fused-lasso block length")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda-grid", f.lambda_grid, "lambda grid points");
    cmd->add_option("--distance-threshold", f.distance_threshold, "neighbor cutoff in miles");
    cmd->add_option("--u-family", f.u_family, "none|quadratic|exponential");
    cmd->add_option("--u-a", f.u_a, "reporting-loss parameter a");
    cmd->add_option("--u-b", f.u_b, "reporting-loss parameter b");
    cmd->add_option("--u-cutoff", f.u_cutoff, "day after which reporting is complete");
    cmd->add_flag("--grid-search", f.grid_search, "select a by in-sample grid search");
    cmd->add_option("--a-grid", f.a_grid, "explicit grid of a values");
    cmd->add_option("--a-grid-low", f.a_grid_low, "grid lower bound");
    cmd->add_option("--a-grid-high", f.a_grid_high, "grid upper bound");
    cmd->add_option("--a-grid-points", f.a_grid_points, "grid size");
    cmd->add_option("--var-p-max", f.var_p_max, "maximum VAR lag order");
}

episeg::WeightScheme parse_scheme(const std::string& s) {
    if (s == "equal") return episeg::WeightScheme::Equal;
    if (s == "distance") return episeg::WeightScheme::DistancePower;
    if (s == "similarity-top5") return episeg::WeightScheme::SimilarityTop5;
    if (s == "similarity-all") return episeg::WeightScheme::SimilarityAll;
    throw CLI::ValidationError("--weights", "unknown scheme: " + s);
}

episeg::UnderReporting::Family parse_family(const std::string& s) {
    if (s == "none") return episeg::UnderReporting::Family::None;
    if (s == "quadratic") return episeg::UnderReporting::Family::Quadratic;
    if (s == "exponential") return episeg::UnderReporting::Family::Exponential;
    throw CLI::ValidationError("--u-family", "unknown family: " + s);
}

episeg::PipelineConfig to_config(const FitFlags& f) {
    episeg::PipelineConfig c;
    c.variant = static_cast<episeg::ModelVariant>(f.model);
    c.detect.block_size = f.block_size;
    c.detect.lambda_grid_size = f.lambda_grid;
    c.scheme = parse_scheme(f.weights);
    c.distance_threshold = f.distance_threshold;
    c.u_family = parse_family(f.u_family);
    c.u_a = f.u_a;
    c.u_b = f.u_b;
    c.u_cutoff = f.u_cutoff;
    c.var_p_max = f.var_p_max;
    if (f.grid_search) {
        if (!f.a_grid.empty()) {
            c.a_grid = f.a_grid;
        } else {
            for (int i = 0; i < f.a_grid_points; ++i)
                c.a_grid.push_back(f.a_grid_low + (f.a_grid_high - f.a_grid_low) * i /
                                                      std::max(1, f.a_grid_points - 1));
        }
    }
    return c;
}

episeg::RegionCatalog load_catalog(const FitFlags& f) {
    if (!f.data.empty()) {
        episeg::RegionCatalog catalog;
        for (auto& s : episeg::read_series_csv(f.data)) catalog.add_series(std::move(s));
        if (!f.distances.empty()) {
            // reuse the distance schema for simulated catalogs too
            std::ifstream in(f.distances);
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
                catalog.set_distance(line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1),
                                     std::stod(line.substr(c2 + 1)));
            }
        }
        return catalog;
    }
    auto build = episeg::assemble_catalog(f.cases, f.populations, f.distances, f.national);
    for (const auto& id : build.isolated)
        std::cerr << "note: region " << id << " has no distance entries\n";
    return std::move(build.catalog);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw episeg::Error("cannot write " + path);
    out << text << '\n';
}

ordered_json model_report(const episeg::FittedModel& model, const episeg::EpidemicSeries& series) {
    ordered_json j = ordered_json::parse(episeg::to_json(model));
    ordered_json dates = ordered_json::array();
    // change point t is the first day of a new regime, 1-based row index
    for (int t : model.change_points.final_points)
        dates.push_back(episeg::format_date(series.date_at(t)));
    j["change_point_dates"] = dates;
    if (model.variant == episeg::ModelVariant::Model3 && model.residuals.size() > 20) {
        auto acf = episeg::residual_acf(model.residuals, 10);
        j["residual_acf"] = {{"infected", acf[0]}, {"recovered", acf[1]}};
    }
    return j;
}

int cmd_simulate(const std::string& id, std::uint64_t seed, const std::string& out_dir,
                 int extra_days) {
    if (id.size() != 1 || id[0] < 'A' || id[0] > 'H') {
        std::cerr << "error: unknown scenario '" << id << "' (expected A..H)\n";
        return 2;
    }
    episeg::Simulated sim = episeg::generate(episeg::scenario(id[0]), seed, extra_days);
    fs::create_directories(out_dir);

    std::vector<episeg::EpidemicSeries> all{sim.target};
    if (sim.neighbor) all.push_back(*sim.neighbor);
    episeg::write_series_csv(out_dir + "/series.csv", all);
    if (sim.neighbor)
        write_text(out_dir + "/distances.csv", "region_a,region_b,miles\nT0,S1,100");

    ordered_json truth;
    truth["schema_version"] = 1;
    truth["scenario"] = id;
    truth["seed"] = seed;
    truth["breaks"] = sim.truth.breaks;
    truth["beta"] = sim.truth.beta;
    truth["gamma"] = sim.truth.gamma;
    truth["alpha"] = sim.truth.alpha;
    truth["u_a"] = sim.truth.u_a;
    truth["clamped"] = sim.clamped;
    write_text(out_dir + "/truth.json", truth.dump(2));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change-point detection and forecasting for piecewise-stationary SIR models"};
    app.require_subcommand(1);
    app.set_config("--config");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic scenario dataset");
    std::string scenario_id = "A", out_dir = ".";
    std::uint64_t seed = 1;
    int extra_days = 0;
    sim->add_option("--scenario", scenario_id, "scenario id A..H")->required();
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--extra-days", extra_days, "days past the scenario horizon");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "estimate change points, rates, and the residual VAR");
    FitFlags ff;
    std::string fit_out = "model.json", plot_out;
    add_fit_flags(fit_cmd, ff);
    fit_cmd->add_option("--out", fit_out, "model JSON path");
    fit_cmd->add_option("--plot", plot_out, "fitted-vs-observed CSV path");

    // forecast
    auto* fc_cmd = app.add_subcommand("forecast", "fit on a training window and predict ahead");
    FitFlags fcf;
    int horizon = 14, train_days = 0;
    std::string mode = "rolling", fc_out = "forecast.json", fc_plot;
    add_fit_flags(fc_cmd, fcf);
    fc_cmd->add_option("--horizon", horizon, "days to predict");
    fc_cmd->add_option("--train-days", train_days, "training length (default: all minus horizon)");
    fc_cmd->add_option("--mode", mode, "rolling|free");
    fc_cmd->add_option("--out", fc_out, "report JSON path");
    fc_cmd->add_option("--plot", fc_plot, "observed-vs-predicted CSV path");

    // replicate
    auto* rep_cmd = app.add_subcommand("replicate", "Monte-Carlo study over a scenario");
    std::string rep_scenario = "A", rep_out = "summary.csv";
    int n_reps = 20, n_test = 0, jobs = 1, rep_block = 7, rep_model = 0;
    std::uint64_t rep_seed = 1;
    rep_cmd->add_option("--scenario", rep_scenario, "scenario id A..H")->required();
    rep_cmd->add_option("--reps", n_reps, "replicate count");
    rep_cmd->add_option("--seed", rep_seed, "base seed");
    rep_cmd->add_option("--n-test", n_test, "out-of-sample days per replicate");
    rep_cmd->add_option("--jobs", jobs, "parallel workers");
    rep_cmd->add_option("--block-size", rep_block, "fused-lasso block length");
    rep_cmd->add_option("--model", rep_model, "model variant (default per scenario)");
    rep_cmd->add_option("--out", rep_out, "summary CSV path");

    // ingest-check
    auto* ing_cmd = app.add_subcommand("ingest-check", "validate a real-data bundle");
    FitFlags inf;
    add_fit_flags(ing_cmd, inf);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(scenario_id, seed, out_dir, extra_days);

        if (fit_cmd->parsed()) {
            episeg::RegionCatalog catalog = load_catalog(ff);
            if (ff.region.empty()) {
                auto ids = catalog.region_ids();
                if (ids.empty()) throw episeg::Error("no regions in input");
                ff.region = ids.front();
            }
            const episeg::EpidemicSeries& series = catalog.series(ff.region);
            episeg::FittedModel model = episeg::fit(series, catalog, to_config(ff));
            write_text(fit_out, model_report(model, series).dump(2));
            if (!plot_out.empty()) {
                episeg::FittedSeries fs_ = episeg::fitted_series(model, series);
                std::ofstream out(plot_out);
                out << "date,observed_infected,fitted_infected,observed_recovered,fitted_recovered\n";
                out.precision(17);
                for (std::size_t t = 0; t < fs_.infected.size(); ++t)
                    out << episeg::format_date(series.date_at(t)) << ',' << series.infected[t]
                        << ',' << fs_.infected[t] << ',' << series.recovered[t] << ','
                        << fs_.recovered[t] << '\n';
            }
            return 0;
        }

        if (fc_cmd->parsed()) {
            if (horizon == 0) {
                write_text(fc_out, episeg::to_json(episeg::ForecastReport{}));
                return 0;
            }
            episeg::RegionCatalog catalog = load_catalog(fcf);
            if (fcf.region.empty()) fcf.region = catalog.region_ids().front();
            const episeg::EpidemicSeries& full = catalog.series(fcf.region);
            const int t_train =
                train_days > 0 ? train_days : static_cast<int>(full.size()) - horizon;
            if (t_train < 3 || t_train > static_cast<int>(full.size()))
                throw episeg::InsufficientData("training window does not fit the series");
            episeg::EpidemicSeries train = full;
            train.infected.resize(t_train);
            train.recovered.resize(t_train);

            episeg::FittedModel model = episeg::fit(train, catalog, to_config(fcf));
            const bool rolling = mode != "free";
            episeg::ForecastReport report =
                episeg::forecast(model, full, catalog, horizon, rolling);
            write_text(fc_out, episeg::to_json(report));
            if (!fc_plot.empty()) {
                std::ofstream out(fc_plot);
                out << "date,observed_infected,predicted_infected,observed_recovered,predicted_recovered\n";
                out.precision(17);
                for (int h = 0; h < horizon; ++h) {
                    const int day = t_train + h;
                    out << episeg::format_date(full.date_at(day)) << ',';
                    if (day < static_cast<int>(full.size()))
                        out << full.infected[day];
                    out << ',' << report.predicted_infected[h] << ',';
                    if (day < static_cast<int>(full.size()))
                        out << full.recovered[day];
                    out << ',' << report.predicted_recovered[h] << '\n';
                }
            }
            return 0;
        }

        if (rep_cmd->parsed()) {
            if (rep_scenario.size() != 1 || rep_scenario[0] < 'A' || rep_scenario[0] > 'H') {
                std::cerr << "error: unknown scenario '" << rep_scenario << "'\n";
                return 2;
            }
            episeg::Scenario sc = episeg::scenario(rep_scenario[0]);
            episeg::ReplicateConfig rc;
            rc.n_reps = n_reps;
            rc.seed = rep_seed;
            rc.n_test = n_test;
            rc.jobs = jobs;
            rc.pipeline.detect.block_size = rep_block;
            rc.pipeline.variant = rep_model > 0 ? static_cast<episeg::ModelVariant>(rep_model)
                                  : sc.spatial  ? episeg::ModelVariant::Model3
                                                : episeg::ModelVariant::Model1;
            rc.pipeline.scheme = episeg::WeightScheme::Equal;
            rc.pipeline.u_family = sc.u_family;
            rc.pipeline.u_a = sc.u_a;
            rc.pipeline.u_b = sc.u_b;
            episeg::ReplicateSummary sum = episeg::run_replicates(sc, rc);

            std::ofstream out(rep_out);
            out << "metric,index,value\n";
            out.precision(10);
            out << "n_reps,," << sum.n_reps << "\nfailures,," << sum.failures << '\n';
            for (std::size_t j = 0; j < sum.success_rate.size(); ++j)
                out << "success_rate," << j + 1 << ',' << sum.success_rate[j] << '\n'
                    << "location_mean," << j + 1 << ',' << sum.location_mean[j] << '\n'
                    << "location_std," << j + 1 << ',' << sum.location_std[j] << '\n';
            for (std::size_t s = 0; s < sum.beta_mean.size(); ++s)
                out << "beta_mean," << s + 1 << ',' << sum.beta_mean[s] << '\n'
                    << "beta_std," << s + 1 << ',' << sum.beta_std[s] << '\n'
                    << "gamma_mean," << s + 1 << ',' << sum.gamma_mean[s] << '\n'
                    << "gamma_std," << s + 1 << ',' << sum.gamma_std[s] << '\n';
            if (sum.alpha_count > 0)
                out << "alpha_mean,," << sum.alpha_mean << "\nalpha_std,," << sum.alpha_std << '\n';
            if (sum.mrpe_count > 0)
                out << "mrpe_infected,," << sum.mrpe_infected_mean << "\nmrpe_recovered,,"
                    << sum.mrpe_recovered_mean << '\n';
            return 0;
        }

        if (ing_cmd->parsed()) {
            auto build = episeg::assemble_catalog(inf.cases, inf.populations, inf.distances,
                                                  inf.national);
            std::cout << "regions: " << build.catalog.region_ids().size() << '\n'
                      << "gap fills: " << build.gap_fills << '\n'
                      << "non-monotone recovered days: " << build.non_monotone_recovered << '\n';
            for (const auto& id : build.isolated) std::cout << "isolated: " << id << '\n';
            for (const auto& id : build.skipped) std::cout << "skipped: " << id << '\n';
            return 0;
        }
    } catch (const episeg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
