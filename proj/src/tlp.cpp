#include "ivdag/tlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ivdag/errors.hpp"

namespace ivdag {

namespace {

constexpr double kBicRssFloor = 1e-12;

void check_config(const TlpConfig& cfg, Eigen::Index q) {
    if (cfg.gamma <= 0.0 || cfg.tau <= 0.0)
        throw DimensionMismatch("tlp: gamma and tau must be positive");
    if (cfg.kappa < 1 || cfg.kappa > q)
        throw DimensionMismatch("tlp: kappa=" + std::to_string(cfg.kappa) +
                                " outside [1, q=" + std::to_string(q) + "]");
}

// all indices ranked by |v| descending, ties broken by lowest index
std::vector<int> magnitude_order(const Eigen::VectorXd& v) {
    std::vector<int> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double va = std::abs(v(a));
        const double vb = std::abs(v(b));
        if (va != vb) return va > vb;
        return a < b;
    });
    return order;
}

// indices of the kappa largest |v|, ties broken by lowest index, sorted
std::vector<int> top_kappa(const Eigen::VectorXd& v, int kappa) {
    std::vector<int> order = magnitude_order(v);
    order.resize(static_cast<std::size_t>(std::min<Eigen::Index>(kappa, v.size())));
    std::sort(order.begin(), order.end());
    return order;
}

// Step-1 feasibility: at most kappa entries of the initializer may exceed tau
// in magnitude. Violations (warm starts, mostly) are projected onto the
// feasible set by zeroing everything outside the kappa largest.
Eigen::VectorXd clamp_init(const Eigen::VectorXd& init, const TlpConfig& cfg) {
    int active = 0;
    for (Eigen::Index l = 0; l < init.size(); ++l) {
        if (std::abs(init(l)) > cfg.tau) ++active;
    }
    if (active <= cfg.kappa) return init;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(init.size());
    for (const int l : top_kappa(init, cfg.kappa)) out(l) = init(l);
    return out;
}

// penalized objective rss + 2 n gamma tau sum_l min(|v_l|, tau), whose
// linearized concave part gives exactly the weighted-lasso step
double tlp_objective(const TlpGram& gram, const Eigen::VectorXd& xty, double yty,
                     const Eigen::VectorXd& v, const TlpConfig& cfg) {
    const double rss = yty - 2.0 * v.dot(xty) + v.dot(gram.xtx * v);
    double pen = 0.0;
    for (Eigen::Index l = 0; l < v.size(); ++l) pen += std::min(std::abs(v(l)), cfg.tau);
    return rss + 2.0 * gram.n * cfg.gamma * cfg.tau * pen;
}

struct DcResult {
    Eigen::VectorXd tilde_v;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

DcResult dc_iterate(const TlpGram& gram, const Eigen::VectorXd& xty, double yty,
                    const TlpConfig& cfg, Eigen::VectorXd v) {
    const Eigen::Index q = gram.xtx.rows();
    DcResult res;
    res.objective_trace.push_back(tlp_objective(gram, xty, yty, v, cfg));
    std::vector<std::uint8_t> weights(static_cast<std::size_t>(q));
    for (int t = 1; t <= cfg.max_dc_iterations; ++t) {
        for (Eigen::Index l = 0; l < q; ++l)
            weights[static_cast<std::size_t>(l)] = std::abs(v(l)) <= cfg.tau ? 1 : 0;
        Eigen::VectorXd next = weighted_lasso_gram(gram.xtx, xty, gram.n, cfg.gamma * cfg.tau,
                                                   weights, v, cfg.cd_tol);
        const double change = (next - v).lpNorm<Eigen::Infinity>();
        v = std::move(next);
        res.objective_trace.push_back(tlp_objective(gram, xty, yty, v, cfg));
        if (change <= cfg.dc_tol) {
            // the solve that fires the stationarity check reproduces the
            // previous iterate; the fixed point was reached at t - 1
            res.iterations = t - 1;
            res.converged = true;
            break;
        }
        res.iterations = t;
    }
    res.tilde_v = std::move(v);
    return res;
}

}  // namespace

double tlp_surrogate(double z, double tau) {
    if (tau <= 0.0) throw DimensionMismatch("tlp_surrogate: tau must be positive");
    return std::min(std::abs(z) / tau, 1.0);
}

FitResult l0_project_refit(const Eigen::VectorXd& tilde_v, int kappa, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y) {
    if (kappa < 1 || kappa > x.cols())
        throw DimensionMismatch("l0_project_refit: kappa outside [1, q]");
    const std::vector<int> kept = top_kappa(tilde_v, kappa);
    const FitResult sub = least_squares(select_columns(x, kept), y);
    FitResult fit;
    fit.coefficients = Eigen::VectorXd::Zero(x.cols());
    for (std::size_t i = 0; i < kept.size(); ++i)
        fit.coefficients(kept[i]) = sub.coefficients(static_cast<Eigen::Index>(i));
    fit.rss = sub.rss;
    fit.support = kept;
    return fit;
}

TlpFit dc_constrained_fit_gram(const TlpGram& gram, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, const TlpConfig& cfg,
                               const Eigen::VectorXd& init) {
    check_config(cfg, x.cols());
    if (init.size() != x.cols()) throw DimensionMismatch("dc_constrained_fit: init length mismatch");
    const Eigen::VectorXd xty = x.transpose() * y;
    const double yty = y.squaredNorm();
    DcResult dc = dc_iterate(gram, xty, yty, cfg, clamp_init(init, cfg));

    TlpFit fit;
    fit.dc_iterations_used = dc.iterations;
    fit.dc_converged = dc.converged;
    fit.objective_trace = std::move(dc.objective_trace);
    fit.tilde_v = std::move(dc.tilde_v);
    FitResult refit = l0_project_refit(fit.tilde_v, cfg.kappa, x, y);
    fit.v_hat = std::move(refit.coefficients);
    fit.support = std::move(refit.support);
    return fit;
}

TlpFit dc_constrained_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TlpConfig& cfg,
                          const Eigen::VectorXd& init) {
    return dc_constrained_fit_gram(TlpGram(x), x, y, cfg, init);
}

std::vector<double> log_spaced_gamma_grid(double max_abs_corr, int count, double floor_frac) {
    if (count < 1) throw DimensionMismatch("gamma grid needs at least one value");
    double top = std::log(max_abs_corr);
    if (!(top > 0.0) || !std::isfinite(top)) top = std::log(1.05);
    const double bottom = floor_frac * top;
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (count == 1) {
        grid[0] = std::exp(top);
        return grid;
    }
    const double step = (bottom - top) / (count - 1);
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::exp(top + i * step);
    return grid;
}

TuningGrids resolve_gammas(TuningGrids grids, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (grids.gammas.empty()) {
        const double max_corr = (x.transpose() * y).cwiseAbs().maxCoeff();
        grids.gammas = log_spaced_gamma_grid(max_corr, grids.gamma_count, grids.gamma_floor);
    }
    return grids;
}

TuningGrids default_grids(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int gamma_count,
                          double gamma_floor, int kappa_max) {
    TuningGrids grids;
    grids.gamma_count = gamma_count;
    grids.gamma_floor = gamma_floor;
    const int top = std::min<int>(kappa_max, static_cast<int>(x.cols()));
    for (int k = 1; k <= top; ++k) grids.kappas.push_back(k);
    return resolve_gammas(std::move(grids), x, y);
}

double bic_score(double rss, int support_size, int n) {
    return n * std::log(std::max(rss, kBicRssFloor) / n) + support_size * std::log(static_cast<double>(n));
}

std::pair<TlpConfig, TlpFit> bic_tune(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const TuningGrids& grids_in) {
    const TuningGrids grids = resolve_gammas(grids_in, x, y);
    if (grids.taus.empty() || grids.gammas.empty() || grids.kappas.empty())
        throw DimensionMismatch("bic_tune: empty tuning grid");
    const Eigen::Index q = x.cols();
    const int n = static_cast<int>(x.rows());
    const TlpGram gram(x);
    const Eigen::VectorXd xty = x.transpose() * y;
    const double yty = y.squaredNorm();

    std::vector<int> kappas;
    for (const int k : grids.kappas) {
        if (k >= 1 && k <= q && k < n) kappas.push_back(k);
    }
    std::sort(kappas.begin(), kappas.end());
    kappas.erase(std::unique(kappas.begin(), kappas.end()), kappas.end());
    if (kappas.empty()) throw DimensionMismatch("bic_tune: no feasible kappa in grid");

    double best_bic = std::numeric_limits<double>::infinity();
    bool found = false;
    TlpConfig best_cfg;
    Eigen::VectorXd best_tilde;
    int best_iters = 0;
    bool best_converged = true;

    // scan thresholds from the largest down: BIC ties between tau cells are
    // common (identical supports give identical refits) and the larger
    // threshold gives the more stable candidate-intervention rule
    std::vector<double> taus = grids.taus;
    std::sort(taus.begin(), taus.end(), std::greater<>());
    for (const double tau : taus) {
        for (const double gamma : grids.gammas) {
            TlpConfig cfg;
            cfg.tau = tau;
            cfg.gamma = gamma;
            cfg.kappa = kappas.back();
            DcResult dc;
            try {
                dc = dc_iterate(gram, xty, yty, cfg, Eigen::VectorXd::Zero(q));
            } catch (const Error&) {
                continue;  // cell failure excludes the whole (tau, gamma) column
            }
            // Supports are nested across kappa (top-1 within top-2, ...), so one
            // Cholesky grown a column at a time scores the whole kappa column.
            std::vector<int> order = magnitude_order(dc.tilde_v);
            order.resize(static_cast<std::size_t>(kappas.back()));
            Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(order.size(), order.size());
            Eigen::VectorXd rhs(order.size());       // L^{-1} (X'y)_B
            double rss = yty;
            std::size_t built = 0;
            std::size_t kappa_idx = 0;
            std::vector<int> prefix;
            for (int target = 1; target <= static_cast<int>(order.size()) && kappa_idx < kappas.size();
                 ++target) {
                // grow the factor by column `target-1`
                const int col = order[static_cast<std::size_t>(target - 1)];
                const Eigen::Index i = static_cast<Eigen::Index>(built);
                for (Eigen::Index r = 0; r < i; ++r) {
                    double v = gram.xtx(order[static_cast<std::size_t>(r)], col);
                    for (Eigen::Index t = 0; t < r; ++t) v -= chol(r, t) * chol(i, t);
                    chol(i, r) = v / chol(r, r);
                }
                double diag = gram.xtx(col, col);
                for (Eigen::Index t = 0; t < i; ++t) diag -= chol(i, t) * chol(i, t);
                if (diag <= kRankTolerance * std::max(gram.xtx(col, col), 1.0)) break;  // singular block
                chol(i, i) = std::sqrt(diag);
                double b = xty(col);
                for (Eigen::Index t = 0; t < i; ++t) b -= chol(i, t) * rhs(t);
                rhs(i) = b / chol(i, i);
                rss -= rhs(i) * rhs(i);
                ++built;
                prefix.push_back(col);
                if (target == kappas[kappa_idx]) {
                    const double bic = bic_score(std::max(rss, 0.0), target, n);
                    if (bic < best_bic) {
                        best_bic = bic;
                        best_cfg = cfg;
                        best_cfg.kappa = target;
                        best_tilde = dc.tilde_v;
                        best_iters = dc.iterations;
                        best_converged = dc.converged;
                        found = true;
                    }
                    ++kappa_idx;
                }
            }
        }
    }
    if (!found) throw RankDeficient("bic_tune: every grid cell failed");

    TlpFit fit;
    fit.tilde_v = best_tilde;
    fit.dc_iterations_used = best_iters;
    fit.dc_converged = best_converged;
    FitResult refit = l0_project_refit(best_tilde, best_cfg.kappa, x, y);
    fit.v_hat = std::move(refit.coefficients);
    fit.support = std::move(refit.support);
    return {best_cfg, fit};
}

}  // namespace ivdag
