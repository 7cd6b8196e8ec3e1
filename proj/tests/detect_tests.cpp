#include <cmath>
#include <random>

#include "doctest.h"
#include "episeg/detect.hpp"

using namespace episeg;

namespace {

std::vector<DesignRow> piecewise_rows(int n, const std::vector<int>& breaks,
                                      const std::vector<Eigen::Vector2d>& levels,
                                      double noise_sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DesignRow> rows(n);
    for (int t = 1; t <= n; ++t) {
        std::size_t seg = 0;
        while (seg < breaks.size() && t >= breaks[seg]) ++seg;
        DesignRow& r = rows[t - 1];
        r.x.resize(2, 2);
        r.x << normal(rng), normal(rng), normal(rng), normal(rng);
        r.y = r.x * levels[seg];
        if (noise_sd > 0.0) r.y += noise_sd * Eigen::Vector2d(normal(rng), normal(rng));
    }
    return rows;
}

}  // namespace

TEST_CASE("segment least squares recovers exact coefficients and zero residual") {
    auto rows = piecewise_rows(20, {}, {Eigen::Vector2d(0.7, -0.2)}, 0.0, 5);
    OlsFit fit = segment_ols(rows, 1, 21);
    CHECK(fit.coef(0) == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(fit.coef(1) == doctest::Approx(-0.2).epsilon(1e-10));
    CHECK(fit.rss == doctest::Approx(0.0).epsilon(1e-18));
    CHECK(fit.stderr_(0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("segments with fewer than two rows are rejected") {
    auto rows = piecewise_rows(10, {}, {Eigen::Vector2d(1.0, 1.0)}, 0.0, 1);
    CHECK_THROWS_AS(segment_ols(rows, 5, 6), SegmentTooShort);
    CHECK_NOTHROW(segment_ols(rows, 5, 7));
}

TEST_CASE("duplicating every row halves the squared standard error") {
    auto rows = piecewise_rows(30, {}, {Eigen::Vector2d(0.5, 0.5)}, 0.4, 8);
    std::vector<DesignRow> doubled;
    for (const auto& r : rows) {
        doubled.push_back(r);
        doubled.push_back(r);
    }
    OlsFit one = segment_ols(rows, 1, 31);
    OlsFit two = segment_ols(doubled, 1, 61);
    // same coefficients; xtx doubles and sigma2 is nearly unchanged, so the
    // variance roughly halves
    CHECK((one.coef - two.coef).norm() < 1e-10);
    CHECK(two.stderr_(0) == doctest::Approx(one.stderr_(0) / std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("hard thresholding keeps exactly the strong increment blocks") {
    auto rows = piecewise_rows(64, {33}, {Eigen::Vector2d(0.9, -0.3), Eigen::Vector2d(0.1, 0.5)},
                               0.05, 3);
    BlockPartition p = make_partition(64, 8);
    auto [scaled, scaling] = standardize(rows);
    ThetaEstimate est = block_fused_lasso(scaled, p, 1e-3);
    std::vector<int> blocks = hard_threshold(est, scaled, p);
    REQUIRE(blocks.size() == 1);
    CHECK(p.begin(blocks[0]) == 33);
}

TEST_CASE("hard thresholding returns nothing on a stationary series") {
    auto rows = piecewise_rows(64, {}, {Eigen::Vector2d(0.6, 0.2)}, 0.3, 12);
    BlockPartition p = make_partition(64, 8);
    auto [scaled, scaling] = standardize(rows);
    LambdaSelection sel = lambda_path_and_cv(scaled, p, 20);
    ThetaEstimate est = block_fused_lasso(scaled, p, sel.lambda);
    std::vector<int> blocks = hard_threshold(est, scaled, p);
    CHECK(blocks.empty());
}

TEST_CASE("candidate clustering splits distant groups and keeps near ones") {
    auto one = cluster_candidates({98, 105}, 8);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::vector<int>{98, 105});

    auto two = cluster_candidates({98, 105, 301, 308}, 8);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == std::vector<int>{98, 105});
    CHECK(two[1] == std::vector<int>{301, 308});

    auto single = cluster_candidates({42}, 8);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == std::vector<int>{42});

    CHECK(cluster_candidates({}, 8).empty());
}

TEST_CASE("local refinement matches a brute-force two-segment scan") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 48, b = 8;
        std::vector<DesignRow> rows(n);
        for (auto& r : rows) {
            r.x.resize(2, 2);
            r.x << normal(rng), normal(rng), normal(rng), normal(rng);
            r.y << normal(rng), normal(rng);
        }
        BlockPartition p = make_partition(n, b);
        ThetaEstimate est = block_fused_lasso(rows, p, 1e-4);
        const Eigen::MatrixXd levels = est.levels();
        const int c0 = p.begin(3);  // candidate at the start of block 3
        std::vector<std::vector<int>> clusters{{c0}};
        ChangePointResult refined = exhaustive_refine(rows, rows, clusters, est, p);
        REQUIRE(refined.final_points.size() == 1);

        // scan the same window with the same local levels
        const Eigen::VectorXd left = levels.row((1 + 4) / 2 - 1).transpose();
        const Eigen::VectorXd right = levels.row((4 + p.block_count()) / 2 - 1).transpose();
        const int lo = std::max(c0 - b, 1), hi = std::min(c0 + b, n + 1);
        double best_sse = std::numeric_limits<double>::infinity();
        int best_s = -1;
        for (int s = std::max({lo + 1, 3}); s <= std::min({hi - 1, n - 1}); ++s) {
            double sse = 0.0;
            for (int t = lo; t < s; ++t)
                sse += (rows[t - 1].y - rows[t - 1].x * left).squaredNorm();
            for (int t = s; t < hi; ++t)
                sse += (rows[t - 1].y - rows[t - 1].x * right).squaredNorm();
            if (sse < best_sse) {
                best_sse = sse;
                best_s = s;
            }
        }
        CHECK(refined.final_points[0] == best_s);
    }
}

TEST_CASE("the full detection stack finds a clean break exactly") {
    auto rows = piecewise_rows(120, {61}, {Eigen::Vector2d(0.9, -0.3), Eigen::Vector2d(0.1, 0.5)},
                               0.02, 19);
    DetectConfig config;
    config.block_size = 8;
    DetectOutput out = detect_change_points(rows, config);
    REQUIRE(out.result.final_points.size() == 1);
    CHECK(std::abs(out.result.final_points[0] - 61) <= 2);
    REQUIRE(out.result.segments.size() == 2);
    CHECK(out.result.segments[0].coef(0) == doctest::Approx(0.9).epsilon(0.05));
    CHECK(out.result.segments[1].coef(1) == doctest::Approx(0.5).epsilon(0.05));
    // segments tile [1, n + 1)
    CHECK(out.result.segments.front().start == 1);
    CHECK(out.result.segments.back().end == 121);
    CHECK(out.result.segments[0].end == out.result.segments[1].start);
}

TEST_CASE("the full detection stack is quiet on a stationary series") {
    auto rows = piecewise_rows(120, {}, {Eigen::Vector2d(0.6, 0.2)}, 0.3, 23);
    DetectConfig config;
    config.block_size = 8;
    DetectOutput out = detect_change_points(rows, config);
    CHECK(out.result.final_points.empty());
    REQUIRE(out.result.segments.size() == 1);
    CHECK(out.result.segments[0].start == 1);
    CHECK(out.result.segments[0].end == 121);
}

TEST_CASE("detection accuracy improves as the sample grows") {
    // empirical version of the localization guarantee: the detected break
    // stays within one block of the truth across seeds and sample sizes
    for (int n : {120, 240}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto rows = piecewise_rows(
                n, {n / 2 + 1},
                {Eigen::Vector2d(0.9, -0.3), Eigen::Vector2d(0.1, 0.5)}, 0.1, seed);
            DetectConfig config;
            config.block_size = 8;
            DetectOutput out = detect_change_points(rows, config);
            REQUIRE(out.result.final_points.size() == 1);
            CHECK(std::abs(out.result.final_points[0] - (n / 2 + 1)) <= 8);
        }
    }
}

TEST_CASE("two breaks are localized and ordered") {
    auto rows = piecewise_rows(
        180, {61, 121},
        {Eigen::Vector2d(0.9, -0.3), Eigen::Vector2d(0.1, 0.5), Eigen::Vector2d(0.8, 0.1)}, 0.05,
        31);
    DetectConfig config;
    config.block_size = 8;
    DetectOutput out = detect_change_points(rows, config);
    REQUIRE(out.result.final_points.size() == 2);
    CHECK(out.result.final_points[0] < out.result.final_points[1]);
    CHECK(std::abs(out.result.final_points[0] - 61) <= 8);
    CHECK(std::abs(out.result.final_points[1] - 121) <= 8);
    CHECK(out.result.segments.size() == 3);
}
