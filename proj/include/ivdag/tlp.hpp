#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ivdag/linalg.hpp"

namespace ivdag {

/// Tuning parameters of one nodewise sparsity-constrained regression.
struct TlpConfig {
    double gamma = 1.0;          // penalty multiplier
    double tau = 0.1;            // truncation threshold, also the nonzero cutoff
    int kappa = 1;               // sparsity budget, in [1, q]
    int max_dc_iterations = 50;
    double cd_tol = 1e-8;        // coordinate-descent max-change tolerance
    double dc_tol = 1e-6;        // outer-loop max-norm change tolerance
};

struct TlpFit {
    Eigen::VectorXd tilde_v;             // fixed point of the iteration
    Eigen::VectorXd v_hat;               // after projection and refit
    std::vector<int> support;            // kept index set, sorted
    int dc_iterations_used = 0;
    bool dc_converged = true;            // false when the iteration cap was hit
    std::vector<double> objective_trace; // penalized objective per iteration
};

/// Truncated-L1 surrogate of the L0 indicator: min(|z| / tau, 1).
double tlp_surrogate(double z, double tau);

/// Reusable X'X for repeated fits against the same design (e.g. perturbation
/// replicates, where only the response changes).
struct TlpGram {
    Eigen::MatrixXd xtx;
    int n = 0;

    TlpGram() = default;
    explicit TlpGram(const Eigen::MatrixXd& x) : xtx(x.transpose() * x), n(static_cast<int>(x.rows())) {}
};

/// The full constrained fit: difference-of-convex iteration on the weighted
/// lasso, then projection onto the sparsity budget and an unpenalized refit.
/// An init with more than kappa entries above tau in magnitude is truncated
/// to its kappa largest before the first iteration.
TlpFit dc_constrained_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TlpConfig& cfg,
                          const Eigen::VectorXd& init);

TlpFit dc_constrained_fit_gram(const TlpGram& gram, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, const TlpConfig& cfg,
                               const Eigen::VectorXd& init);

/// Keeps the kappa largest |tilde_v| (ties to the lowest index) and refits
/// unpenalized least squares on those columns; support holds the kept set.
FitResult l0_project_refit(const Eigen::VectorXd& tilde_v, int kappa, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y);

struct TuningGrids {
    std::vector<double> taus{0.05, 0.1, 0.15};
    // explicit penalty grid; when empty it is resolved from the data at fit
    // time as gamma_count log-spaced values anchored at max |x_l' y_j|
    std::vector<double> gammas;
    int gamma_count = 100;
    double gamma_floor = 0.05;
    std::vector<int> kappas;
};

/// Fills an empty gamma grid from the given data; explicit grids pass through.
TuningGrids resolve_gammas(TuningGrids grids, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// gamma grid: `count` log-spaced values from max_abs_corr down to
/// max_abs_corr^floor_frac. A max correlation at or below one is clamped so
/// the grid stays positive and decreasing.
std::vector<double> log_spaced_gamma_grid(double max_abs_corr, int count, double floor_frac);

/// Default grids: tau in {0.05, 0.1, 0.15}, 100 log-spaced gammas anchored at
/// max_{l,j} |x_l' y_j|, kappa in 1..min(kappa_max, q).
TuningGrids default_grids(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int gamma_count = 100,
                          double gamma_floor = 0.05, int kappa_max = 30);

/// Gaussian profile-likelihood BIC: n log(rss / n) + df log(n).
double bic_score(double rss, int support_size, int n);

/// Scans the grid (tau ascending, gamma in grid order, kappa ascending),
/// sharing one DC solve per (tau, gamma) across the kappa column. Cells that
/// fail numerically are skipped; ties keep the earliest cell. Throws when
/// every cell fails.
std::pair<TlpConfig, TlpFit> bic_tune(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const TuningGrids& grids);

}  // namespace ivdag
