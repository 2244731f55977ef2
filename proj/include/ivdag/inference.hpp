#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ivdag/graph.hpp"
#include "ivdag/peeling.hpp"
#include "ivdag/rng.hpp"

namespace ivdag {

// Combined data matrix Z = (X, Y): intervention columns first.
inline int x_column(int l) { return l; }
inline int y_column(int q, int k) { return q + k; }

Eigen::MatrixXd stack_xy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Z-column index sets of one node's unconstrained (A) and null-constrained
/// (B) models: A_j = an(j) u in(j) u d(j), B_j = (an(j) u in(j)) \ d(j).
struct NodeTestSets {
    std::vector<int> a_cols;
    std::vector<int> b_cols;
};

NodeTestSets node_test_sets(const SuperGraph& s, const HypothesisClassification& cls, int j);

/// Noise-variance estimates: sigma2_j = RSS of Y_j on (Y_an, X_in) over
/// n - |an(j)| - |in(j)|. Perfect fits yield zero (callers may warn).
Eigen::VectorXd sigma_hat(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const SuperGraph& s);

/// Per-node statistic T = v'(P_A - P_B)v / [v'(I - P_A)v / (n - |A|)].
/// Summed over contributing nodes as T/2 this is the likelihood ratio; the
/// same scaling applies to the perturbation replicas, which is what makes the
/// per-node F calibration exact under a correct super-graph.
double node_statistic(const Eigen::MatrixXd& z, const std::vector<int>& a_cols,
                      const std::vector<int>& b_cols, const Eigen::VectorXd& v);

/// Lr = sum over nodes with nonempty d(j) of T_j / 2. Requires a regular
/// classification. Always nonnegative.
double likelihood_ratio_edges(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y,
                              const SuperGraph& s, const HypothesisClassification& cls);

/// Adds N(0, diag(sigma2)) noise to y; returns (y_star, e_star). The noise is
/// returned because the replicate statistic is a function of it.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> perturb(const Eigen::MatrixXd& y,
                                                    const Eigen::VectorXd& sigma2,
                                                    RngStream& stream);

/// Replicate statistic Lr*: same form as Lr with the known perturbation noise
/// in place of Y_j and the starred A*/B* sets from the perturbed structure
/// estimate; the summation index stays the original d(j) != {} nodes.
double dp_star_statistic(const Eigen::MatrixXd& e_star, const Eigen::MatrixXd& z_star,
                         const SuperGraph& s_star, const HypothesisClassification& cls_star,
                         const HypothesisClassification& cls_original);

/// True iff the starred estimate dominates: A* contains A and C* contains C.
bool supergraph_contains(const SuperGraph& s_star, const SuperGraph& s);

/// Chi-square tail of 2 Lr on |D| degrees of freedom; d_size = 0 gives 1.
/// The normal branch (for large |D|) is opt-in.
double asymptotic_pvalue(double lr, int d_size, bool normal_branch = false);

/// Monte-Carlo p-value: #{Lr*_m >= Lr among contained replicates} over
/// #{contained replicates}. Throws NoContainedReplicates on a zero count.
double dp_pvalue(const std::vector<double>& lr_star, const std::vector<std::uint8_t>& contained,
                 double lr);

/// Holm step-down adjustment; preserves input order.
std::vector<double> holm_adjust(const std::vector<double>& pvalues);

struct DpConfig {
    int replicates = 500;
    std::uint64_t seed = 0;
    int parallelism = 1;
    bool warm_start = true;
};

enum class PvalueMethod { dp, asymptotic, both };

struct EdgeTestDetail {
    std::pair<int, int> edge;
    bool degenerate = false;
    double lr = 0.0;
    double pvalue_raw = 1.0;
    double pvalue_adjusted = 1.0;
    double asymptotic_raw = 1.0;
};

struct DpTestReport {
    TestMode mode = TestMode::edges;
    double lr = 0.0;
    std::vector<double> lr_nu;                    // pathway: per sub-hypothesis
    std::vector<double> lr_star;                  // edge mode: per replicate
    std::vector<std::vector<double>> lr_star_nu;  // pathway: [nu][replicate]
    std::vector<std::uint8_t> contained;
    std::vector<std::uint8_t> replicate_failed;
    double pvalue = 1.0;
    int n_contained = 0;
    int failed_replicates = 0;
    HypothesisClassification classification;
    double asymptotic_pvalue = 1.0;
    Eigen::VectorXd sigma2_hat;
    std::string degeneracy_reason;           // nonempty when the p-value is forced to one
    std::vector<EdgeTestDetail> subtests;    // irregular-hypothesis decomposition
    bool used_oracle = false;
};

struct TestOptions {
    PvalueMethod method = PvalueMethod::both;
    std::optional<SuperGraph> oracle;  // bypasses structure learning entirely
};

/// Simultaneous directed-edge test. Degenerate hypotheses return p-value one
/// without replicates; irregular ones are decomposed into single-edge tests
/// sharing one replicate set and combined by Holm.
DpTestReport dp_edge_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const HypothesisSpec& hyp, const DpConfig& dp, const Tuning& tuning,
                          const TestOptions& opts = {});

/// Pathway test: p-value one when any hypothesized edge is degenerate or the
/// hypothesis is irregular, else the max over per-edge replicate ratios.
DpTestReport dp_pathway_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                             const HypothesisSpec& hyp, const DpConfig& dp, const Tuning& tuning,
                             const TestOptions& opts = {});

}  // namespace ivdag
