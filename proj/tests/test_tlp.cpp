#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ivdag/errors.hpp"
#include "ivdag/rng.hpp"
#include "ivdag/tlp.hpp"

using namespace ivdag;

namespace {

Eigen::MatrixXd gaussian_design(int n, int q, RngStream& rng) {
    Eigen::MatrixXd x(n, q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j) x(i, j) = rng.next_gaussian();
    return x;
}

// exhaustive best-subset oracle: minimal RSS over all supports of given size
double best_subset_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int size) {
    const int q = static_cast<int>(x.cols());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> subset;
    const std::function<void(int)> recurse = [&](int start) {
        if (static_cast<int>(subset.size()) == size) {
            Eigen::MatrixXd sub(x.rows(), size);
            for (int i = 0; i < size; ++i) sub.col(i) = x.col(subset[static_cast<std::size_t>(i)]);
            const Eigen::VectorXd coef =
                (sub.transpose() * sub).ldlt().solve(sub.transpose() * y);
            best = std::min(best, (y - sub * coef).squaredNorm());
            return;
        }
        for (int c = start; c < q; ++c) {
            subset.push_back(c);
            recurse(c + 1);
            subset.pop_back();
        }
    };
    recurse(0);
    return best;
}

}  // namespace

TEST_CASE("surrogate evaluates min(|z|/tau, 1)") {
    CHECK(tlp_surrogate(0.0, 0.7) == doctest::Approx(0.0));
    CHECK(tlp_surrogate(0.25, 0.5) == doctest::Approx(0.5));
    CHECK(tlp_surrogate(-3.0, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("l0_project_refit ranks by magnitude with lowest-index ties") {
    RngStream rng(5, 0);
    const Eigen::MatrixXd x = gaussian_design(20, 3, rng);
    const Eigen::VectorXd y = x.col(0) + 0.5 * x.col(2);

    Eigen::VectorXd tilde(3);
    tilde << 0.9, 0.1, 0.5;
    CHECK(l0_project_refit(tilde, 2, x, y).support == std::vector<int>{0, 2});

    Eigen::VectorXd tied(3);
    tied << 0.5, 0.5, 0.0;
    CHECK(l0_project_refit(tied, 1, x, y).support == std::vector<int>{0});
}

TEST_CASE("l0_project_refit with kappa = q reduces to ordinary least squares") {
    RngStream rng(6, 0);
    const Eigen::MatrixXd x = gaussian_design(15, 3, rng);
    const Eigen::VectorXd y = x.col(1) - x.col(2);
    Eigen::VectorXd tilde(3);
    tilde << 0.1, 0.2, 0.3;
    const FitResult fit = l0_project_refit(tilde, 3, x, y);
    const FitResult ols = least_squares(x, y);
    CHECK((fit.coefficients - ols.coefficients).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("l0 support is invariant to positive rescaling") {
    RngStream rng(7, 0);
    const Eigen::MatrixXd x = gaussian_design(25, 5, rng);
    const Eigen::VectorXd y = x.col(0) + x.col(3);
    Eigen::VectorXd tilde(5);
    tilde << 0.4, -0.9, 0.05, 0.7, -0.2;
    const auto base = l0_project_refit(tilde, 3, x, y).support;
    const auto scaled = l0_project_refit(17.3 * tilde, 3, x, y).support;
    CHECK(base == scaled);
}

TEST_CASE("dc_constrained_fit recovers a strong-signal support") {
    RngStream rng(41, 0);
    const int n = 60;
    const int q = 6;
    Eigen::MatrixXd x = gaussian_design(n, q, rng);
    // near-orthonormal columns
    for (int j = 0; j < q; ++j) x.col(j) *= std::sqrt(n) / x.col(j).norm();
    Eigen::VectorXd y = 2.0 * x.col(1) - 1.5 * x.col(4);
    for (int i = 0; i < n; ++i) y(i) += 0.1 * rng.next_gaussian();

    TlpConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 0.1;
    cfg.kappa = 2;
    const TlpFit fit = dc_constrained_fit(x, y, cfg, Eigen::VectorXd::Zero(q));
    CHECK(fit.support == std::vector<int>{1, 4});
    CHECK(fit.dc_converged);

    // the projected refit attains the exhaustive best-subset optimum
    const double rss = (y - x * fit.v_hat).squaredNorm();
    CHECK(rss == doctest::Approx(best_subset_rss(x, y, 2)).epsilon(1e-8));
}

TEST_CASE("dc_constrained_fit on a zero response returns zero coefficients") {
    RngStream rng(43, 0);
    const Eigen::MatrixXd x = gaussian_design(30, 4, rng);
    TlpConfig cfg;
    cfg.gamma = 0.2;
    cfg.tau = 0.1;
    cfg.kappa = 2;
    const TlpFit fit = dc_constrained_fit(x, Eigen::VectorXd::Zero(30), cfg, Eigen::VectorXd::Zero(4));
    CHECK(fit.v_hat.lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
    CHECK(fit.support.size() == 2);
}

TEST_CASE("first iterate from zero equals the plain lasso at penalty gamma*tau") {
    RngStream rng(47, 0);
    const Eigen::MatrixXd x = gaussian_design(50, 5, rng);
    Eigen::VectorXd y = x.col(0) - 0.7 * x.col(2);
    for (int i = 0; i < 50; ++i) y(i) += 0.2 * rng.next_gaussian();

    TlpConfig cfg;
    cfg.gamma = 0.8;
    cfg.tau = 0.15;
    cfg.kappa = 3;
    cfg.max_dc_iterations = 1;
    const TlpFit fit = dc_constrained_fit(x, y, cfg, Eigen::VectorXd::Zero(5));

    const std::vector<std::uint8_t> all_ones(5, 1);
    const Eigen::VectorXd lasso =
        weighted_lasso({x, y, cfg.gamma * cfg.tau, all_ones}, Eigen::VectorXd::Zero(5), cfg.cd_tol);
    CHECK((fit.tilde_v - lasso).lpNorm<Eigen::Infinity>() < 1e-7);
    CHECK_FALSE(fit.dc_converged);  // the cap fired, reported as a warning flag
}

TEST_CASE("property: the penalized objective is nonincreasing across DC iterations") {
    RngStream rng(53, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 40;
        const int q = 8;
        const Eigen::MatrixXd x = gaussian_design(n, q, rng);
        Eigen::VectorXd y = x.col(0) + 0.4 * x.col(5);
        for (int i = 0; i < n; ++i) y(i) += 0.5 * rng.next_gaussian();
        TlpConfig cfg;
        cfg.gamma = 0.1 + 0.4 * rng.next_double();
        cfg.tau = 0.05 + 0.15 * rng.next_double();
        cfg.kappa = 3;
        const TlpFit fit = dc_constrained_fit(x, y, cfg, Eigen::VectorXd::Zero(q));
        for (std::size_t t = 1; t < fit.objective_trace.size(); ++t) {
            CHECK(fit.objective_trace[t] <=
                  fit.objective_trace[t - 1] + 1e-8 * (1.0 + std::abs(fit.objective_trace[t - 1])));
        }
    }
}

TEST_CASE("an infeasible warm start is truncated to the kappa largest entries") {
    RngStream rng(59, 0);
    const Eigen::MatrixXd x = gaussian_design(30, 4, rng);
    const Eigen::VectorXd y = x.col(1);
    TlpConfig cfg;
    cfg.gamma = 0.3;
    cfg.tau = 0.1;
    cfg.kappa = 1;
    Eigen::VectorXd init(4);
    init << 1.0, 2.0, 3.0, 4.0;  // four entries above tau, budget one
    const TlpFit fit = dc_constrained_fit(x, y, cfg, init);
    CHECK(fit.support.size() == 1);  // well-defined despite the bad init
}

TEST_CASE("config validation") {
    RngStream rng(61, 0);
    const Eigen::MatrixXd x = gaussian_design(10, 3, rng);
    const Eigen::VectorXd y = x.col(0);
    TlpConfig cfg;
    cfg.kappa = 4;  // exceeds q
    CHECK_THROWS_AS(dc_constrained_fit(x, y, cfg, Eigen::VectorXd::Zero(3)), DimensionMismatch);
    cfg.kappa = 1;
    cfg.tau = 0.0;
    CHECK_THROWS_AS(dc_constrained_fit(x, y, cfg, Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST_CASE("bic_tune picks the single-predictor truth over larger budgets") {
    RngStream rng(67, 0);
    const int n = 80;
    const Eigen::MatrixXd x = gaussian_design(n, 5, rng);
    Eigen::VectorXd y = 3.0 * x.col(2);
    for (int i = 0; i < n; ++i) y(i) += 0.3 * rng.next_gaussian();

    TuningGrids grids;
    grids.taus = {0.1};
    grids.gammas = {0.5};
    grids.kappas = {1, 2, 3};
    const auto [cfg, fit] = bic_tune(x, y, grids);
    CHECK(cfg.kappa == 1);
    CHECK(fit.support == std::vector<int>{2});

    // hand-computed BIC over the three refits agrees with the winner
    double best = std::numeric_limits<double>::infinity();
    int best_kappa = 0;
    TlpConfig base = cfg;
    for (const int kappa : grids.kappas) {
        base.kappa = kappa;
        const TlpFit cell = dc_constrained_fit(x, y, base, Eigen::VectorXd::Zero(5));
        const double rss = (y - x * cell.v_hat).squaredNorm();
        const double bic = bic_score(rss, static_cast<int>(cell.support.size()), n);
        if (bic < best) {
            best = bic;
            best_kappa = kappa;
        }
    }
    CHECK(best_kappa == cfg.kappa);
}

TEST_CASE("bic_tune on pure noise selects the hand-computed minimum") {
    RngStream rng(71, 0);
    const int n = 60;
    const Eigen::MatrixXd x = gaussian_design(n, 6, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = rng.next_gaussian();

    TuningGrids grids;
    grids.taus = {0.1};
    grids.gammas = {0.3};
    grids.kappas = {1, 2, 3, 4, 5};
    const auto [cfg, fit] = bic_tune(x, y, grids);
    TlpConfig base = cfg;
    double best = std::numeric_limits<double>::infinity();
    int best_kappa = 0;
    for (const int kappa : grids.kappas) {
        base.kappa = kappa;
        const TlpFit cell = dc_constrained_fit(x, y, base, Eigen::VectorXd::Zero(6));
        const double rss = (y - x * cell.v_hat).squaredNorm();
        const double bic = bic_score(rss, static_cast<int>(cell.support.size()), n);
        if (bic < best) {
            best = bic;
            best_kappa = kappa;
        }
    }
    CHECK(cfg.kappa == best_kappa);
}

TEST_CASE("bic_tune with singleton grids returns that configuration") {
    RngStream rng(73, 0);
    const Eigen::MatrixXd x = gaussian_design(40, 4, rng);
    const Eigen::VectorXd y = x.col(0);
    TuningGrids grids;
    grids.taus = {0.05};
    grids.gammas = {0.7};
    grids.kappas = {2};
    const auto [cfg, fit] = bic_tune(x, y, grids);
    CHECK(cfg.tau == doctest::Approx(0.05));
    CHECK(cfg.gamma == doctest::Approx(0.7));
    CHECK(cfg.kappa == 2);
    CHECK(fit.support.size() == 2);
}

TEST_CASE("gamma grid is anchored at the max correlation and clamped when small") {
    const auto grid = log_spaced_gamma_grid(100.0, 5, 0.05);
    CHECK(grid.front() == doctest::Approx(100.0));
    CHECK(grid.back() == doctest::Approx(std::exp(0.05 * std::log(100.0))));
    CHECK(grid.front() > grid.back());
    for (const double g : log_spaced_gamma_grid(0.3, 4, 0.05)) CHECK(g > 0.0);
}
