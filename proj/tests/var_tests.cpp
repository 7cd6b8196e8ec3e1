#include <cmath>
#include <random>

#include "doctest.h"
#include "episeg/var.hpp"

using namespace episeg;

namespace {

std::vector<Eigen::Vector2d> simulate_var1(const Eigen::Matrix2d& phi, int n, double noise_sd,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::Vector2d> eps;
    Eigen::Vector2d prev = Eigen::Vector2d::Zero();
    for (int t = 0; t < n + 50; ++t) {  // burn-in to reach stationarity
        Eigen::Vector2d e = phi * prev + noise_sd * Eigen::Vector2d(normal(rng), normal(rng));
        if (t >= 50) eps.push_back(e);
        prev = e;
    }
    return eps;
}

}  // namespace

TEST_CASE("white noise selects lag order zero") {
    auto eps = simulate_var1(Eigen::Matrix2d::Zero(), 400, 1.0, 3);
    VarModel m = fit_var(eps, 7);
    CHECK(m.p == 0);
    CHECK(m.phi.empty());
    CHECK(m.noise_cov(0, 0) == doctest::Approx(1.0).epsilon(0.2));
    CHECK(m.predict({Eigen::Vector2d(5.0, -2.0)}) == Eigen::Vector2d(0.0, 0.0));
}

TEST_CASE("a noiseless autoregression is recovered exactly") {
    Eigen::Matrix2d phi;
    phi << 0.8, 0.0, 0.2, 0.7;
    // exact recursion from a vector with weight on both eigen-directions, so
    // the lag Gram matrix stays full rank while every row fits perfectly
    std::vector<Eigen::Vector2d> eps{Eigen::Vector2d(1.0, -0.5)};
    for (int t = 1; t < 50; ++t) eps.push_back(phi * eps.back());
    VarModel m = fit_var(eps, 3);
    REQUIRE(m.p >= 1);
    CHECK((m.phi[0] - phi).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(m.noise_cov.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("the first-order coefficients are consistent on long samples") {
    Eigen::Matrix2d phi;
    phi << 0.8, 0.0, 0.2, 0.7;
    auto eps = simulate_var1(phi, 4000, 0.3, 11);
    VarModel m = fit_var(eps, 7);
    REQUIRE(m.p >= 1);
    CHECK((m.phi[0] - phi).cwiseAbs().maxCoeff() < 0.06);
}

TEST_CASE("prediction applies the lag polynomial to the trailing history") {
    VarModel m;
    m.p = 2;
    Eigen::Matrix2d p1, p2;
    p1 << 0.5, 0.0, 0.0, 0.5;
    p2 << 0.1, 0.0, 0.0, -0.1;
    m.phi = {p1, p2};
    std::vector<Eigen::Vector2d> hist{Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(2.0, 4.0)};
    Eigen::Vector2d pred = m.predict(hist);
    CHECK(pred[0] == doctest::Approx(0.5 * 2.0 + 0.1 * 1.0));
    CHECK(pred[1] == doctest::Approx(0.5 * 4.0 - 0.1 * 1.0));
    // shorter histories truncate the polynomial instead of throwing
    Eigen::Vector2d part = m.predict({Eigen::Vector2d(2.0, 4.0)});
    CHECK(part[0] == doctest::Approx(1.0));
}

TEST_CASE("too few residuals are rejected") {
    std::vector<Eigen::Vector2d> eps(10, Eigen::Vector2d(1.0, 1.0));
    CHECK_THROWS_AS(fit_var(eps, 3), InsufficientData);
}

TEST_CASE("autocorrelations start at one and follow the AR decay") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::Vector2d> eps;
    Eigen::Vector2d prev = Eigen::Vector2d::Zero();
    for (int t = 0; t < 4050; ++t) {
        Eigen::Vector2d e = 0.8 * prev + Eigen::Vector2d(normal(rng), normal(rng));
        if (t >= 50) eps.push_back(e);
        prev = e;
    }
    auto acf = residual_acf(eps, 5);
    REQUIRE(acf.size() == 2);
    for (int coord = 0; coord < 2; ++coord) {
        CHECK(acf[coord][0] == 1.0);
        for (int h = 1; h <= 5; ++h)
            CHECK(acf[coord][h] == doctest::Approx(std::pow(0.8, h)).epsilon(0.15));
    }
    CHECK_THROWS_AS(residual_acf(eps, static_cast<int>(eps.size()) / 2), Error);
}

TEST_CASE("screening is quiet on a stationary autoregression") {
    Eigen::Matrix2d phi;
    phi << 0.6, 0.0, 0.1, 0.5;
    auto eps = simulate_var1(phi, 400, 0.3, 13);
    VarScreenResult r = screen_var_breaks(eps, 8);
    CHECK(r.breaks.empty());
    CHECK(r.model.segment_start == 1);
}

TEST_CASE("a regime change in the autoregression is localized") {
    Eigen::Matrix2d phi_a, phi_b;
    phi_a << 0.9, 0.0, 0.0, 0.9;
    phi_b << -0.6, 0.0, 0.0, -0.6;
    std::mt19937_64 rng(21);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::Vector2d> eps;
    Eigen::Vector2d prev = Eigen::Vector2d::Zero();
    const int n = 400, change = 200;
    for (int t = 0; t < n; ++t) {
        const Eigen::Matrix2d& phi = t < change ? phi_a : phi_b;
        Eigen::Vector2d e = phi * prev + 0.3 * Eigen::Vector2d(normal(rng), normal(rng));
        eps.push_back(e);
        prev = e;
    }
    VarScreenResult r = screen_var_breaks(eps, 8);
    REQUIRE(!r.breaks.empty());
    bool close = false;
    for (int b : r.breaks)
        if (std::abs(b - change) <= 16) close = true;
    CHECK(close);
    // the forecasting model is refit past the last break
    CHECK(r.model.segment_start > change - 16);
    if (r.model.p >= 1) CHECK(r.model.phi[0](0, 0) < 0.0);
}
