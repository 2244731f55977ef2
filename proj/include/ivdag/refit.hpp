#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ivdag/graph.hpp"
#include "ivdag/tlp.hpp"

namespace ivdag {

/// The generative model: U_{kj} != 0 means Y_k -> Y_j, W_{lj} != 0 means
/// X_l intervenes on Y_j, sigma2 the per-node noise variances.
struct WeightedDag {
    Eigen::MatrixXd u;       // p x p
    Eigen::MatrixXd w;       // q x p
    Eigen::VectorXd sigma2;  // length p

    WeightedDag() = default;
    WeightedDag(int p, int q)
        : u(Eigen::MatrixXd::Zero(p, p)), w(Eigen::MatrixXd::Zero(q, p)),
          sigma2(Eigen::VectorXd::Zero(p)) {}

    DirectedGraph edge_graph(double threshold = 0.0) const;
};

struct RefitTuning {
    // one budget per node; values above the available predictor count are
    // clamped with a warning flag in the result
    std::optional<std::vector<int>> fixed_kappa;
    // BIC grid used when fixed_kappa is absent
    std::vector<int> kappa_grid;
    std::vector<double> tau_grid{0.05, 0.1, 0.15};
    int gamma_count = 100;
    double gamma_floor = 0.05;
};

struct RefitResult {
    WeightedDag dag;
    std::vector<int> kappa_used;          // per node; 0 when no predictors
    std::vector<std::uint8_t> clamped;    // budget exceeded available predictors
    std::vector<std::uint8_t> zero_variance;
};

/// Per-node sparsity-constrained regression of Y_j on its super-graph
/// ancestors and candidate interventions, one combined budget over the
/// stacked predictors. sigma2_j is the refit residual sum of squares over
/// n - |an(j)| - |in(j)|.
RefitResult refit_dag(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const SuperGraph& s,
                      const RefitTuning& tuning, int threads = 1);

}  // namespace ivdag
