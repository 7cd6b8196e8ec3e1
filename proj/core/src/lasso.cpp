#include "episeg/lasso.hpp"

#include <algorithm>
#include <cmath>

namespace episeg {

namespace {

constexpr double kTol = 1e-9;
constexpr int kMaxSweeps = 10000;

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

}  // namespace

BlockPartition make_partition(int n, int block_size) {
    if (block_size < 2) throw Error("block size must be >= 2");
    if (n < 2 * block_size) throw InsufficientData("need at least two blocks of data");
    BlockPartition p;
    p.block_size = block_size;
    const int k = n / block_size;
    p.boundaries.resize(k + 1);
    for (int i = 0; i < k; ++i) p.boundaries[i] = 1 + i * block_size;
    p.boundaries[k] = n + 1;  // last block absorbs the remainder
    return p;
}

int BlockPartition::block_of(int t) const {
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
    return static_cast<int>(it - boundaries.begin()) - 1;
}

Eigen::MatrixXd ThetaEstimate::levels() const {
    Eigen::MatrixXd out = theta;
    for (Eigen::Index i = 1; i < out.rows(); ++i) out.row(i) += out.row(i - 1);
    return out;
}

BlockSystem::BlockSystem(const std::vector<DesignRow>& rows, const BlockPartition& partition) {
    n_ = static_cast<int>(rows.size());
    if (n_ == 0) throw InsufficientData("empty design");
    d_ = static_cast<int>(rows.front().x.cols());
    k_ = partition.block_count();

    // per-block moments, then suffix sums
    std::vector<Eigen::MatrixXd> xtx(k_, Eigen::MatrixXd::Zero(d_, d_));
    std::vector<Eigen::VectorXd> xty(k_, Eigen::VectorXd::Zero(d_));
    for (int i = 0; i < k_; ++i) {
        for (int t = partition.begin(i); t < partition.end(i); ++t) {
            const DesignRow& r = rows[t - 1];
            xtx[i] += r.x.transpose() * r.x;
            xty[i] += r.x.transpose() * r.y;
            yty_ += r.y.squaredNorm();
        }
    }
    for (int i = k_ - 2; i >= 0; --i) {
        xtx[i] += xtx[i + 1];
        xty[i] += xty[i + 1];
    }

    gram_.resize(k_ * d_, k_ * d_);
    xty_.resize(k_ * d_);
    for (int i = 0; i < k_; ++i) {
        xty_.segment(i * d_, d_) = xty[i];
        for (int j = 0; j < k_; ++j)
            gram_.block(i * d_, j * d_, d_, d_) = xtx[std::max(i, j)];
    }
}

double BlockSystem::quadratic_loss(const Eigen::VectorXd& theta_flat) const {
    const double rss =
        yty_ - 2.0 * xty_.dot(theta_flat) + theta_flat.dot(gram_ * theta_flat);
    return rss / (2.0 * n_);
}

double BlockSystem::lambda_max() const { return xty_.lpNorm<Eigen::Infinity>() / n_; }

ThetaEstimate block_fused_lasso(const BlockSystem& system, double lambda,
                                const Eigen::VectorXd* warm) {
    if (lambda < 0.0) throw Error("lambda must be >= 0");
    const int p = system.blocks() * system.dim();
    const double n = system.n_rows();
    const Eigen::MatrixXd& G = system.gram();
    const Eigen::VectorXd& c = system.xty();

    Eigen::VectorXd theta = warm ? *warm : Eigen::VectorXd::Zero(p);
    // residual correlation vector rho = c - G theta, maintained incrementally
    Eigen::VectorXd rho = c - G * theta;

    ThetaEstimate est;
    est.lambda = lambda;
    est.converged = false;
    const double thr = n * lambda;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_delta = 0.0;
        for (int j = 0; j < p; ++j) {
            const double gjj = G(j, j);
            if (gjj <= 0.0) continue;  // zero column, coefficient stays put
            const double old = theta[j];
            const double z = rho[j] + gjj * old;
            const double updated = soft_threshold(z, thr) / gjj;
            const double delta = updated - old;
            if (delta != 0.0) {
                theta[j] = updated;
                rho -= G.col(j) * delta;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        est.iterations = sweep + 1;
        if (max_delta < kTol) {
            est.converged = true;
            break;
        }
    }
    est.theta = Eigen::Map<Eigen::MatrixXd>(theta.data(), system.dim(), system.blocks())
                    .transpose();
    return est;
}

ThetaEstimate block_fused_lasso(const std::vector<DesignRow>& rows,
                                const BlockPartition& partition, double lambda) {
    return block_fused_lasso(BlockSystem(rows, partition), lambda);
}

LambdaSelection lambda_path_and_cv(const std::vector<DesignRow>& rows,
                                   const BlockPartition& partition, int grid_size) {
    if (grid_size < 2) throw Error("grid size must be >= 2");
    const int k = partition.block_count();
    const int d = static_cast<int>(rows.front().x.cols());
    const double lmax = BlockSystem(rows, partition).lambda_max();

    LambdaSelection sel;
    sel.grid.resize(grid_size);
    const double lmin = 1e-4 * lmax;
    for (int g = 0; g < grid_size; ++g)
        sel.grid[g] = lmax > 0.0
                          ? std::exp(std::log(lmin) +
                                     (std::log(lmax) - std::log(lmin)) * g / (grid_size - 1))
                          : 0.0;
    sel.cv_error.assign(grid_size, 0.0);

    // expanding-window one-step-ahead folds over all but the first 20% of
    // blocks; validating only a tail window ties the penalty choice to
    // whatever regime happens to end the series
    const int first_val = std::max(1, static_cast<int>(std::ceil(0.2 * k)));
    if (first_val >= k) throw InsufficientData("too few blocks for cross-validation");

    // one training system per fold origin; lambdas walked largest-first with
    // warm starts
    for (int v = first_val; v < k; ++v) {
        BlockPartition sub;
        sub.block_size = partition.block_size;
        sub.boundaries.assign(partition.boundaries.begin(), partition.boundaries.begin() + v + 1);
        BlockSystem train(rows, sub);

        Eigen::VectorXd warm = Eigen::VectorXd::Zero(v * d);
        for (int g = grid_size - 1; g >= 0; --g) {
            ThetaEstimate est = block_fused_lasso(train, sel.grid[g], &warm);
            Eigen::MatrixXd lv = est.levels();
            const Eigen::VectorXd level = lv.row(v - 1).transpose();
            double sse = 0.0;
            for (int t = partition.begin(v); t < partition.end(v); ++t)
                sse += (rows[t - 1].y - rows[t - 1].x * level).squaredNorm();
            sel.cv_error[g] += sse;
            warm = Eigen::Map<Eigen::VectorXd>(
                Eigen::MatrixXd(est.theta.transpose()).data(), v * d);
        }
    }

    int best = grid_size - 1;
    for (int g = grid_size - 1; g >= 0; --g)
        if (sel.cv_error[g] < sel.cv_error[best]) best = g;
    sel.lambda = sel.grid[best];
    return sel;
}

}  // namespace episeg
