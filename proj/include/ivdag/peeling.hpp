#pragma once

#include <Eigen/Dense>
#include <utility>
#include <variant>
#include <vector>

#include "ivdag/graph.hpp"
#include "ivdag/tlp.hpp"

namespace ivdag {

/// Estimated reduced-form coefficient matrix (q x p, column j from the
/// nodewise fit of Y_j on X) with the per-column thresholds used to decide
/// which entries count as nonzero.
struct ReducedFormEstimate {
    Eigen::MatrixXd v;
    Eigen::VectorXd taus;
};

struct PeelRound {
    int height = 0;
    std::vector<std::pair<int, int>> instrument_leaf_pairs;  // (row l, leaf j)
    std::vector<int> removed;                                // leaves peeled this round
    std::vector<std::pair<int, int>> layer_edges;            // k -> j with h(j) = h-1
    std::vector<std::pair<int, int>> skip_relations;         // k -> j with h(j) < h-1
};

struct PeelTrace {
    std::vector<PeelRound> rounds;
};

struct PeelOptions {
    // strict mode additionally requires the minimal positive row l0-norm to be
    // exactly one in every round (exact-input oracle testing)
    bool strict = false;
};

/// Sequentially identifies instrument-leaf pairs from the sparsity pattern of
/// v, assigns topological heights, recovers between-layer relations, and
/// returns the super-graph (ancestral closure + thresholded interventions).
/// Throws PeelStalled with the surviving submatrix when a round finds no
/// usable instrument row while primary nodes remain.
std::pair<SuperGraph, PeelTrace> peel(const ReducedFormEstimate& est, const PeelOptions& opts = {});

using Tuning = std::variant<TlpConfig, TuningGrids>;

/// Nodewise fits plus everything the perturbation replicates need to rerun
/// them: the selected per-node configs and the DC fixed points (warm starts).
struct StructureFit {
    SuperGraph s;
    ReducedFormEstimate reduced;
    Eigen::MatrixXd tilde_v;         // q x p
    std::vector<TlpConfig> configs;  // per node
    PeelTrace trace;
};

/// Nodewise constrained regressions of each Y_j on X (fixed config or BIC
/// over the grids), then peeling. Deterministic given data and tuning.
StructureFit learn_structure(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                             const Tuning& tuning, const PeelOptions& opts = {}, int threads = 1);

/// Relearn with tuning frozen at previously selected per-node configs;
/// warm_start (when non-null, q x p) initializes each node's DC iteration.
StructureFit learn_structure_frozen(const TlpGram& gram, const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& y, const std::vector<TlpConfig>& configs,
                                    const Eigen::MatrixXd* warm_start, const PeelOptions& opts = {});

}  // namespace ivdag
