#include "ivdag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ivdag/errors.hpp"

namespace ivdag {

namespace {

double soft_threshold(double z, double a) {
    if (z > a) return z - a;
    if (z < -a) return z + a;
    return 0.0;
}

}  // namespace

FitResult least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    const Eigen::Index n = design.rows();
    const Eigen::Index m = design.cols();
    if (response.size() != n)
        throw DimensionMismatch("least_squares: response length " + std::to_string(response.size()) +
                                " does not match " + std::to_string(n) + " rows");
    FitResult fit;
    if (m == 0) {
        fit.coefficients = Eigen::VectorXd::Zero(0);
        fit.rss = response.squaredNorm();
        return fit;
    }
    if (n < m)
        throw RankDeficient("least_squares: fewer observations (" + std::to_string(n) +
                            ") than predictors (" + std::to_string(m) + ")");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(m - 1) < kRankTolerance * sv(0))
        throw RankDeficient("least_squares: collinear predictors (singular value ratio " +
                            std::to_string(sv(m - 1) / sv(0)) + ")");
    fit.coefficients = svd.solve(response);
    fit.rss = (response - design * fit.coefficients).squaredNorm();
    for (Eigen::Index l = 0; l < m; ++l) {
        if (fit.coefficients(l) != 0.0) fit.support.push_back(static_cast<int>(l));
    }
    return fit;
}

Eigen::VectorXd weighted_lasso_gram(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xty,
                                    double n, double penalty_level,
                                    const std::vector<std::uint8_t>& weights, Eigen::VectorXd v,
                                    double tol, int max_sweeps) {
    const Eigen::Index m = xtx.rows();
    if (v.size() != m) throw DimensionMismatch("weighted_lasso: init length mismatch");
    if (static_cast<Eigen::Index>(weights.size()) != m)
        throw DimensionMismatch("weighted_lasso: weights length mismatch");

    // residual gradient g = X'y - X'X v, kept current coordinate by coordinate
    Eigen::VectorXd g = xty - xtx * v;
    const double lambda = n * penalty_level;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index l = 0; l < m; ++l) {
            const double denom = xtx(l, l);
            if (denom <= 0.0) continue;  // all-zero column, coefficient stays put
            const double z = g(l) + denom * v(l);
            const double vl = weights[static_cast<std::size_t>(l)]
                                  ? soft_threshold(z, lambda) / denom
                                  : z / denom;
            const double delta = vl - v(l);
            if (delta != 0.0) {
                v(l) = vl;
                g -= delta * xtx.col(l);
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change <= tol) return v;
    }
    throw MaxIterations("weighted_lasso: no convergence in " + std::to_string(max_sweeps) +
                        " sweeps (ill-conditioned design?)");
}

Eigen::VectorXd weighted_lasso(const LassoProblem& problem, const Eigen::VectorXd& init, double tol) {
    if (tol <= 0.0) throw DimensionMismatch("weighted_lasso: tol must be positive");
    if (problem.penalty_level < 0.0)
        throw DimensionMismatch("weighted_lasso: penalty_level must be nonnegative");
    const Eigen::MatrixXd xtx = problem.design.transpose() * problem.design;
    const Eigen::VectorXd xty = problem.design.transpose() * problem.response;
    return weighted_lasso_gram(xtx, xty, static_cast<double>(problem.design.rows()),
                               problem.penalty_level, problem.weights, init, tol);
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
    if (m.cols() == 0) return Eigen::MatrixXd::Zero(m.rows(), 0);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const Eigen::Index k = m.cols();
    if (m.rows() < k || sv(k - 1) < kRankTolerance * sv(0))
        throw RankDeficient("orthonormal_basis: rank-deficient column set (" + std::to_string(k) +
                            " columns, " + std::to_string(m.rows()) + " rows)");
    return svd.matrixU();
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& z, const std::vector<int>& cols) {
    Eigen::MatrixXd out(z.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const int c = cols[i];
        if (c < 0 || c >= z.cols())
            throw DimensionMismatch("column index " + std::to_string(c) + " out of range");
        out.col(static_cast<Eigen::Index>(i)) = z.col(c);
    }
    return out;
}

double projection_quadratic_form(const Eigen::MatrixXd& z, const std::vector<int>& cols_a,
                                 const std::vector<int>& cols_b, const Eigen::VectorXd& v) {
    for (const int c : cols_b) {
        if (std::find(cols_a.begin(), cols_a.end(), c) == cols_a.end())
            throw NotNested("projection_quadratic_form: B is not a subset of A");
    }
    const Eigen::MatrixXd qa = orthonormal_basis(select_columns(z, cols_a));
    const Eigen::MatrixXd qb = orthonormal_basis(select_columns(z, cols_b));
    const double quad = (qa.transpose() * v).squaredNorm() - (qb.transpose() * v).squaredNorm();
    return std::max(quad, 0.0);
}

}  // namespace ivdag
