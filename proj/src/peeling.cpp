#include "ivdag/peeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ivdag/errors.hpp"
#include "ivdag/parallel.hpp"

namespace ivdag {

namespace {

void check_estimate(const ReducedFormEstimate& est) {
    if (est.v.cols() != est.taus.size())
        throw DimensionMismatch("peel: taus length must match the number of primary columns");
    for (Eigen::Index j = 0; j < est.taus.size(); ++j) {
        if (!(est.taus(j) > 0.0)) throw DimensionMismatch("peel: thresholds must be positive");
    }
}

}  // namespace

std::pair<SuperGraph, PeelTrace> peel(const ReducedFormEstimate& est, const PeelOptions& opts) {
    check_estimate(est);
    const int q = static_cast<int>(est.v.rows());
    const int p = static_cast<int>(est.v.cols());
    const auto above = [&](int l, int j) {
        return std::abs(est.v(l, j)) > est.taus(j);
    };

    std::vector<std::uint8_t> active(static_cast<std::size_t>(p), 1);
    std::vector<int> heights(static_cast<std::size_t>(p), -1);
    PeelTrace trace;
    DirectedGraph relations(p);  // layer edges plus deeper relations found

    int remaining = p;
    for (int h = 0; remaining > 0; ++h) {
        // row l0-norms over the surviving columns, entries below tau_j as zero
        int min_norm = std::numeric_limits<int>::max();
        std::vector<int> norms(static_cast<std::size_t>(q), 0);
        for (int l = 0; l < q; ++l) {
            int count = 0;
            for (int j = 0; j < p; ++j) {
                if (active[static_cast<std::size_t>(j)] && above(l, j)) ++count;
            }
            norms[static_cast<std::size_t>(l)] = count;
            if (count > 0) min_norm = std::min(min_norm, count);
        }
        const auto surviving = [&] {
            std::vector<int> rows, cols;
            for (int l = 0; l < q; ++l)
                if (norms[static_cast<std::size_t>(l)] > 0) rows.push_back(l);
            for (int j = 0; j < p; ++j)
                if (active[static_cast<std::size_t>(j)]) cols.push_back(j);
            return std::make_pair(rows, cols);
        };
        if (min_norm == std::numeric_limits<int>::max()) {
            auto [rows, cols] = surviving();
            throw PeelStalled("peel: no instrument row left while " + std::to_string(remaining) +
                                  " primary nodes remain (insufficient instruments or thresholds "
                                  "too aggressive)",
                              rows, cols);
        }
        if (opts.strict && min_norm != 1) {
            auto [rows, cols] = surviving();
            throw PeelStalled("peel: strict mode requires an instrument row of l0-norm 1, found " +
                                  std::to_string(min_norm),
                              rows, cols);
        }

        PeelRound round;
        round.height = h;
        std::vector<std::vector<int>> instruments_of(static_cast<std::size_t>(p));
        for (int l = 0; l < q; ++l) {
            if (norms[static_cast<std::size_t>(l)] != min_norm) continue;
            int leaf = -1;
            double best = -1.0;
            for (int j = 0; j < p; ++j) {
                if (!active[static_cast<std::size_t>(j)]) continue;
                const double mag = std::abs(est.v(l, j));
                if (mag > best) {  // ties keep the lowest column index
                    best = mag;
                    leaf = j;
                }
            }
            round.instrument_leaf_pairs.emplace_back(l, leaf);
            instruments_of[static_cast<std::size_t>(leaf)].push_back(l);
        }

        for (const auto& [l, leaf] : round.instrument_leaf_pairs) {
            (void)l;
            if (heights[static_cast<std::size_t>(leaf)] < 0) {
                heights[static_cast<std::size_t>(leaf)] = h;
                round.removed.push_back(leaf);
            }
        }
        std::sort(round.removed.begin(), round.removed.end());

        // Relations from each new leaf to already peeled nodes: k -> j holds
        // when every instrument row of k clears the threshold at column j of
        // the original matrix. Consecutive layers are the between-layer edges;
        // deeper hits are recorded as ancestral relations in their own right.
        for (const int k : round.removed) {
            const auto& instruments = instruments_of[static_cast<std::size_t>(k)];
            for (int j = 0; j < p; ++j) {
                const int hj = heights[static_cast<std::size_t>(j)];
                if (j == k || hj < 0 || hj >= h) continue;
                bool all_hit = !instruments.empty();
                for (const int l : instruments) {
                    if (!above(l, j)) {
                        all_hit = false;
                        break;
                    }
                }
                if (!all_hit) continue;
                if (hj == h - 1) {
                    round.layer_edges.emplace_back(k, j);
                } else {
                    round.skip_relations.emplace_back(k, j);
                }
                relations.edges.insert(k, j);
            }
        }

        for (const int k : round.removed) active[static_cast<std::size_t>(k)] = 0;
        remaining -= static_cast<int>(round.removed.size());
        trace.rounds.push_back(std::move(round));
    }

    SuperGraph s(p, q);
    s.ancestral = ancestral_closure(relations);
    for (int l = 0; l < q; ++l) {
        for (int j = 0; j < p; ++j) {
            if (above(l, j)) s.interventions.insert(l, j);
        }
    }
    s.heights = heights;
    return {s, trace};
}

StructureFit learn_structure(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                             const Tuning& tuning, const PeelOptions& opts, int threads) {
    if (x.rows() != y.rows()) throw RowMismatch("learn_structure: X and Y row counts differ");
    const int q = static_cast<int>(x.cols());
    const int p = static_cast<int>(y.cols());

    StructureFit fit;
    fit.reduced.v = Eigen::MatrixXd::Zero(q, p);
    fit.reduced.taus = Eigen::VectorXd::Zero(p);
    fit.tilde_v = Eigen::MatrixXd::Zero(q, p);
    fit.configs.resize(static_cast<std::size_t>(p));

    // the gamma anchor is global (max over all columns of Y), not per node
    Tuning resolved = tuning;
    if (auto* grids = std::get_if<TuningGrids>(&resolved)) *grids = resolve_gammas(*grids, x, y);

    const TlpGram gram(x);
    parallel_for(p, threads, [&](int j) {
        if (const auto* fixed = std::get_if<TlpConfig>(&resolved)) {
            TlpFit node = dc_constrained_fit_gram(gram, x, y.col(j), *fixed,
                                                  Eigen::VectorXd::Zero(q));
            fit.reduced.v.col(j) = node.v_hat;
            fit.tilde_v.col(j) = node.tilde_v;
            fit.configs[static_cast<std::size_t>(j)] = *fixed;
        } else {
            auto [cfg, node] = bic_tune(x, y.col(j), std::get<TuningGrids>(resolved));
            fit.reduced.v.col(j) = node.v_hat;
            fit.tilde_v.col(j) = node.tilde_v;
            fit.configs[static_cast<std::size_t>(j)] = cfg;
        }
        fit.reduced.taus(j) = fit.configs[static_cast<std::size_t>(j)].tau;
    });

    auto [s, trace] = peel(fit.reduced, opts);
    fit.s = std::move(s);
    fit.trace = std::move(trace);
    return fit;
}

StructureFit learn_structure_frozen(const TlpGram& gram, const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& y, const std::vector<TlpConfig>& configs,
                                    const Eigen::MatrixXd* warm_start, const PeelOptions& opts) {
    const int q = static_cast<int>(x.cols());
    const int p = static_cast<int>(y.cols());
    if (static_cast<int>(configs.size()) != p)
        throw DimensionMismatch("learn_structure_frozen: one config per primary node required");

    StructureFit fit;
    fit.reduced.v = Eigen::MatrixXd::Zero(q, p);
    fit.reduced.taus = Eigen::VectorXd::Zero(p);
    fit.tilde_v = Eigen::MatrixXd::Zero(q, p);
    fit.configs = configs;
    for (int j = 0; j < p; ++j) {
        const Eigen::VectorXd init =
            warm_start ? Eigen::VectorXd(warm_start->col(j)) : Eigen::VectorXd::Zero(q);
        TlpFit node = dc_constrained_fit_gram(gram, x, y.col(j), configs[static_cast<std::size_t>(j)], init);
        fit.reduced.v.col(j) = node.v_hat;
        fit.tilde_v.col(j) = node.tilde_v;
        fit.reduced.taus(j) = configs[static_cast<std::size_t>(j)].tau;
    }
    auto [s, trace] = peel(fit.reduced, opts);
    fit.s = std::move(s);
    fit.trace = std::move(trace);
    return fit;
}

}  // namespace ivdag
