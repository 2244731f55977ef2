#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "ivdag/graph.hpp"
#include "ivdag/inference.hpp"
#include "ivdag/refit.hpp"
#include "ivdag/rng.hpp"

namespace ivdag {

enum class GraphKind { random_graph, hub };
enum class WSetup { A, B, C };

struct SimDesign {
    int p = 10;
    int q = 30;
    int n = 300;
    GraphKind graph_kind = GraphKind::random_graph;
    WSetup setup = WSetup::A;
    double sigma2_min = 0.5;
    double sigma2_max = 1.0;
    double x_corr = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Ground truth of one simulated model: coefficients, the exact reduced form
/// V = W (I - U)^{-1}, the precision matrix, and the true super-graph.
struct SimulationTruth {
    WeightedDag dag;
    Eigen::MatrixXd v;      // q x p
    Eigen::MatrixXd omega;  // p x p
    SuperGraph s;           // true ancestral set, supp(V), true heights
};

/// Random: upper off-diagonal entries iid Bernoulli(1/p) in {0, 1}.
/// Hub: U(1, 2j+1) = U(2, 2j+2) = 1 for j = 1..floor(p/2)-2 (1-based).
Eigen::MatrixXd gen_u(GraphKind kind, int p, RngStream& rng);

/// Deterministic intervention patterns A/B/C stacked as (A', B', 0')'.
Eigen::MatrixXd gen_w(WSetup setup, int p, int q);

SimulationTruth make_truth(const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                           const Eigen::VectorXd& sigma2);
SimulationTruth make_truth(const SimDesign& design, RngStream& rng);

/// X rows iid N(0, Sigma_X) with AR(1) entries x_corr^|l-l'| (sampled by the
/// AR recursion, exact for this covariance); Y solved in topological order.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_data(const SimulationTruth& truth, int n,
                                                        double x_corr, RngStream& rng);

/// Structural Hamming distance: number of support disagreements.
int shd(const Eigen::MatrixXd& u_hat, const Eigen::MatrixXd& u_true);

enum class TestMethod { dp_lr, lr, olr };

struct ExperimentDesign {
    SimDesign sim;
    HypothesisSpec hypothesis;
    // signal strengths injected into the hypothesis edges; 0 is the null.
    // Edge mode perturbs only the first hypothesis edge, pathway mode all.
    std::vector<double> levels{0.0};
    int reps = 100;
    double alpha = 0.05;
    DpConfig dp;
    Tuning tuning;
    std::vector<TestMethod> methods{TestMethod::dp_lr, TestMethod::lr, TestMethod::olr};
    int threads = 1;
};

struct ExperimentCell {
    TestMethod method;
    double level = 0.0;
    int reps = 0;
    int rejections = 0;
    int failures = 0;

    double rejection_rate() const {
        const int ok = reps - failures;
        return ok > 0 ? static_cast<double>(rejections) / ok : 0.0;
    }
};

/// Type-I / power sweep. Per-replication failures are tallied per cell, never
/// abort the sweep. Deterministic given the design seeds.
std::vector<ExperimentCell> run_experiment(const ExperimentDesign& design);

}  // namespace ivdag
