#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ivdag {

// Relative singular-value cutoff below which a design is treated as rank
// deficient. Degenerate designs fail loudly instead of being pseudo-inverted.
inline constexpr double kRankTolerance = 1e-10;

struct FitResult {
    Eigen::VectorXd coefficients;
    double rss = 0.0;
    std::vector<int> support;  // predictor indices with nonzero coefficient
};

/// Ordinary least squares via SVD (no normal equations). Throws RankDeficient
/// when n < m or the smallest singular value is below kRankTolerance times
/// the largest. An empty design (m = 0) yields rss = |y|^2.
FitResult least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

/// Weighted-lasso subproblem: minimize
///   sum_i (y_i - v'x_i)^2 + 2n * penalty_level * sum_l weights_l |v_l|
/// with binary weights; weight-0 coordinates are unpenalized.
struct LassoProblem {
    const Eigen::MatrixXd& design;
    const Eigen::VectorXd& response;
    double penalty_level = 0.0;          // the product gamma * tau
    const std::vector<std::uint8_t>& weights;
};

inline constexpr int kLassoMaxSweeps = 10000;

/// Coordinate descent with covariance (Gram) updates. Convergence is declared
/// when the max coordinate change in a full sweep is <= tol; throws
/// MaxIterations after kLassoMaxSweeps sweeps.
Eigen::VectorXd weighted_lasso(const LassoProblem& problem, const Eigen::VectorXd& init, double tol);

/// Gram-form core used by the TLP path: n enters only through xtx = X'X and
/// xty = X'y.
Eigen::VectorXd weighted_lasso_gram(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xty,
                                    double n, double penalty_level,
                                    const std::vector<std::uint8_t>& weights, Eigen::VectorXd v,
                                    double tol, int max_sweeps = kLassoMaxSweeps);

/// Orthonormal basis for the column span of m (thin SVD). Throws RankDeficient
/// on numerically collinear columns. m with zero columns gives an n x 0 basis.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m);

/// v' (P_A - P_B) v for nested column sets B within A of z, computed from
/// orthonormal bases, never by forming the n x n projector. Result is
/// clamped at zero (it is nonnegative up to roundoff since B is nested in A).
double projection_quadratic_form(const Eigen::MatrixXd& z, const std::vector<int>& cols_a,
                                 const std::vector<int>& cols_b, const Eigen::VectorXd& v);

/// Submatrix of z restricted to the given columns, in the given order.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& z, const std::vector<int>& cols);

}  // namespace ivdag
