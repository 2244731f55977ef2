#include "ivdag/refit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ivdag/errors.hpp"
#include "ivdag/parallel.hpp"

namespace ivdag {

DirectedGraph WeightedDag::edge_graph(double threshold) const {
    DirectedGraph g(static_cast<int>(u.rows()));
    for (int k = 0; k < u.rows(); ++k) {
        for (int j = 0; j < u.cols(); ++j) {
            if (k != j && std::abs(u(k, j)) > threshold) g.edges.insert(k, j);
        }
    }
    return g;
}

RefitResult refit_dag(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const SuperGraph& s,
                      const RefitTuning& tuning, int threads) {
    if (x.rows() != y.rows()) throw RowMismatch("refit_dag: X and Y row counts differ");
    const int n = static_cast<int>(y.rows());
    const int p = static_cast<int>(y.cols());
    const int q = static_cast<int>(x.cols());
    if (s.p != p || s.q != q) throw DimensionMismatch("refit_dag: super-graph dimensions mismatch");
    if (tuning.fixed_kappa && static_cast<int>(tuning.fixed_kappa->size()) != p)
        throw DimensionMismatch("refit_dag: fixed_kappa needs one entry per node");

    RefitResult res;
    res.dag = WeightedDag(p, q);
    res.kappa_used.assign(static_cast<std::size_t>(p), 0);
    res.clamped.assign(static_cast<std::size_t>(p), 0);
    res.zero_variance.assign(static_cast<std::size_t>(p), 0);

    parallel_for(p, threads, [&](int j) {
        const std::vector<int> an = s.ancestors_of(j);
        const std::vector<int> in = s.interventions_on(j);
        const int m = static_cast<int>(an.size() + in.size());
        const int dof = n - m;
        if (dof <= 0)
            throw DegreesOfFreedomExhausted("refit_dag: node " + std::to_string(j + 1) + " has " +
                                            std::to_string(m) + " predictors for n=" +
                                            std::to_string(n));
        if (m == 0) {
            res.dag.sigma2(j) = y.col(j).squaredNorm() / n;
            if (res.dag.sigma2(j) <= 0.0) res.zero_variance[static_cast<std::size_t>(j)] = 1;
            return;
        }

        Eigen::MatrixXd design(n, m);
        for (std::size_t i = 0; i < an.size(); ++i) design.col(static_cast<Eigen::Index>(i)) = y.col(an[i]);
        for (std::size_t i = 0; i < in.size(); ++i)
            design.col(static_cast<Eigen::Index>(an.size() + i)) = x.col(in[i]);

        double rss = 0.0;
        Eigen::VectorXd coef;
        std::vector<int> support;
        if (tuning.fixed_kappa) {
            int kappa = (*tuning.fixed_kappa)[static_cast<std::size_t>(j)];
            if (kappa > m) {
                kappa = m;
                res.clamped[static_cast<std::size_t>(j)] = 1;
            }
            kappa = std::max(kappa, 1);
            TlpConfig cfg;
            cfg.kappa = kappa;
            cfg.tau = tuning.tau_grid.empty() ? 0.1 : tuning.tau_grid.front();
            // lightest penalty of the default grid: with a fixed budget the
            // selection is driven by the projection, not the shrinkage
            const double max_corr = (design.transpose() * y.col(j)).cwiseAbs().maxCoeff();
            cfg.gamma = log_spaced_gamma_grid(max_corr, 2, tuning.gamma_floor).back();
            TlpFit fit = dc_constrained_fit(design, y.col(j), cfg, Eigen::VectorXd::Zero(m));
            coef = fit.v_hat;
            support = fit.support;
            rss = (y.col(j) - design * coef).squaredNorm();
            res.kappa_used[static_cast<std::size_t>(j)] = kappa;
        } else {
            TuningGrids grids;
            grids.taus = tuning.tau_grid;
            const double max_corr = (design.transpose() * y.col(j)).cwiseAbs().maxCoeff();
            grids.gammas = log_spaced_gamma_grid(max_corr, tuning.gamma_count, tuning.gamma_floor);
            if (tuning.kappa_grid.empty()) {
                for (int k = 1; k <= m; ++k) grids.kappas.push_back(k);
            } else {
                grids.kappas = tuning.kappa_grid;
            }
            auto [cfg, fit] = bic_tune(design, y.col(j), grids);
            coef = fit.v_hat;
            support = fit.support;
            rss = (y.col(j) - design * coef).squaredNorm();
            res.kappa_used[static_cast<std::size_t>(j)] = cfg.kappa;
        }

        for (const int idx : support) {
            if (idx < static_cast<int>(an.size())) {
                res.dag.u(an[static_cast<std::size_t>(idx)], j) = coef(idx);
            } else {
                res.dag.w(in[static_cast<std::size_t>(idx) - an.size()], j) = coef(idx);
            }
        }
        res.dag.sigma2(j) = rss / dof;
        if (res.dag.sigma2(j) <= 0.0) res.zero_variance[static_cast<std::size_t>(j)] = 1;
    });
    return res;
}

}  // namespace ivdag
