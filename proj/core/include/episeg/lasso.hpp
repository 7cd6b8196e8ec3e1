#ifndef EPISEG_LASSO_HPP
#define EPISEG_LASSO_HPP

#include <Eigen/Dense>
#include <vector>

#include "episeg/design.hpp"

namespace episeg {

// Equal-size day blocks over rows t = 1..n; the last block absorbs the
// remainder so that b_n <= last block size < 2 b_n.
struct BlockPartition {
    int block_size = 7;              // b_n
    std::vector<int> boundaries;     // r_0 = 1 < r_1 < ... < r_{k_n} = n + 1

    int block_count() const { return static_cast<int>(boundaries.size()) - 1; }
    // day range of block i (0-based block index), 1-based day indices [begin, end)
    int begin(int i) const { return boundaries[i]; }
    int end(int i) const { return boundaries[i + 1]; }
    // block containing 1-based day t
    int block_of(int t) const;
};

BlockPartition make_partition(int n, int block_size);

// Estimate of the block-increment parameter vector.  theta row i holds the
// d-vector theta_{i+1}: row 0 is the level of the first block, subsequent
// rows are increments.
struct ThetaEstimate {
    Eigen::MatrixXd theta;  // k_n x d
    double lambda = 0.0;
    int iterations = 0;
    bool converged = true;

    // per-block coefficient levels: cumulative sums of the increments
    Eigen::MatrixXd levels() const;
};

// Cached quadratic form of the lower-triangular block design: expanded column
// block j collects the X rows of blocks j..k_n, so Gram blocks are suffix
// sums and never require materializing the 2n x d*k_n matrix.
class BlockSystem {
  public:
    BlockSystem(const std::vector<DesignRow>& rows, const BlockPartition& partition);

    int n_rows() const { return n_; }
    int dim() const { return d_; }
    int blocks() const { return k_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::VectorXd& xty() const { return xty_; }
    double yty() const { return yty_; }

    // (1/2n) || Y - X Theta ||^2 over the stacked 2n-entry system
    double quadratic_loss(const Eigen::VectorXd& theta_flat) const;
    // smallest lambda at which the solution is identically zero
    double lambda_max() const;

  private:
    int n_ = 0, d_ = 0, k_ = 0;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd xty_;
    double yty_ = 0.0;
};

// Solves (1/2n) ||Y - X Theta||^2 + lambda ||Theta||_1 over the block design
// by cyclic coordinate descent. warm, when given, seeds the iterate.
ThetaEstimate block_fused_lasso(const BlockSystem& system, double lambda,
                                const Eigen::VectorXd* warm = nullptr);
ThetaEstimate block_fused_lasso(const std::vector<DesignRow>& rows,
                                const BlockPartition& partition, double lambda);

struct LambdaSelection {
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> cv_error;
};

// Log-spaced grid over [1e-4 lambda_max, lambda_max]; expanding-window
// one-step-ahead prediction error over all blocks after the first 20%; ties
// broken toward larger lambda.
LambdaSelection lambda_path_and_cv(const std::vector<DesignRow>& rows,
                                   const BlockPartition& partition, int grid_size);

}  // namespace episeg

#endif
