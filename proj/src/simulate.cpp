#include "ivdag/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ivdag/errors.hpp"
#include "ivdag/parallel.hpp"

namespace ivdag {

void SimDesign::validate() const {
    if (p < 1 || q < 1 || n < 1) throw DimensionMismatch("sim design: p, q, n must be positive");
    if ((setup == WSetup::A || setup == WSetup::B) && q < 2 * p)
        throw DimensionMismatch("setups A and B require q >= 2p");
    if (setup == WSetup::C && q < p) throw DimensionMismatch("setup C requires q >= p");
    if (graph_kind == GraphKind::hub && p < 3) throw DimensionMismatch("hub graphs require p >= 3");
    if (x_corr <= -1.0 || x_corr >= 1.0) throw DimensionMismatch("x_corr must lie in (-1, 1)");
}

Eigen::MatrixXd gen_u(GraphKind kind, int p, RngStream& rng) {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(p, p);
    if (kind == GraphKind::random_graph) {
        const double prob = 1.0 / p;
        for (int k = 0; k < p; ++k) {
            for (int j = k + 1; j < p; ++j) {
                if (rng.next_bernoulli(prob)) u(k, j) = 1.0;
            }
        }
    } else {
        // hub nodes 1 and 2 (1-based): U_{1,2j+1} = U_{2,2j+2} = 1 for
        // j = 1..floor(p/2)-2; both targets stay below p by construction
        const std::int64_t limit =
            std::min<std::int64_t>(p / 2 - 2, (static_cast<std::int64_t>(p) - 2) / 2);
        for (std::int64_t j = 1; j <= limit; ++j) {
            u(0, 2 * j) = 1.0;      // 0-based column of node 2j+1
            u(1, 2 * j + 1) = 1.0;  // 0-based column of node 2j+2
        }
    }
    return u;
}

Eigen::MatrixXd gen_w(WSetup setup, int p, int q) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(q, p);
    switch (setup) {
        case WSetup::A: {
            if (q < 2 * p) throw DimensionMismatch("setup A requires q >= 2p");
            for (int j = 0; j < p; ++j) w(j, j) = 1.0;  // A = I
            for (int j = 0; j + 1 < p; ++j) {           // B: diagonal and superdiagonal, last row empty
                w(p + j, j) = 1.0;
                w(p + j, j + 1) = 1.0;
            }
            break;
        }
        case WSetup::B: {
            if (q < 2 * p) throw DimensionMismatch("setup B requires q >= 2p");
            for (int j = 0; j + 1 < p; ++j) {
                w(j, j) = 1.0;
                w(j, j + 1) = 1.0;
                w(p + j, j) = 1.0;
                w(p + j, j + 1) = 1.0;
            }
            w(p - 1, p - 1) = 1.0;  // the only valid instrument
            break;
        }
        case WSetup::C: {
            if (q < p) throw DimensionMismatch("setup C requires q >= p");
            for (int j = 0; j < p; ++j) w(j, j) = 1.0;
            break;
        }
    }
    return w;
}

SimulationTruth make_truth(const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                           const Eigen::VectorXd& sigma2) {
    const int p = static_cast<int>(u.rows());
    const int q = static_cast<int>(w.rows());
    if (u.cols() != p || w.cols() != p || sigma2.size() != p)
        throw DimensionMismatch("make_truth: inconsistent dimensions");
    for (int j = 0; j < p; ++j) {
        if (!(sigma2(j) > 0.0)) throw DimensionMismatch("make_truth: sigma2 must be positive");
    }

    SimulationTruth truth;
    truth.dag.u = u;
    truth.dag.w = w;
    truth.dag.sigma2 = sigma2;

    const DirectedGraph g = truth.dag.edge_graph();
    if (has_cycle(g)) throw CyclicInput("make_truth: U must represent a DAG");

    const Eigen::MatrixXd i_minus_u = Eigen::MatrixXd::Identity(p, p) - u;
    truth.v = i_minus_u.transpose().partialPivLu().solve(w.transpose()).transpose();
    truth.omega = i_minus_u * sigma2.cwiseInverse().asDiagonal() * i_minus_u.transpose();

    truth.s = SuperGraph(p, q);
    truth.s.ancestral = ancestral_closure(g);
    for (int l = 0; l < q; ++l) {
        for (int j = 0; j < p; ++j) {
            if (std::abs(truth.v(l, j)) > 1e-9) truth.s.interventions.insert(l, j);
        }
    }
    truth.s.heights = topological_heights(g);
    return truth;
}

SimulationTruth make_truth(const SimDesign& design, RngStream& rng) {
    design.validate();
    const Eigen::MatrixXd u = gen_u(design.graph_kind, design.p, rng);
    const Eigen::MatrixXd w = gen_w(design.setup, design.p, design.q);
    Eigen::VectorXd sigma2(design.p);
    for (int j = 0; j < design.p; ++j) {
        sigma2(j) = design.p == 1 ? design.sigma2_min
                                  : design.sigma2_min + (design.sigma2_max - design.sigma2_min) * j /
                                                            (design.p - 1);
    }
    return make_truth(u, w, sigma2);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_data(const SimulationTruth& truth, int n,
                                                        double x_corr, RngStream& rng) {
    const int p = static_cast<int>(truth.dag.u.rows());
    const int q = static_cast<int>(truth.dag.w.rows());
    Eigen::MatrixXd x(n, q);
    const double innov = std::sqrt(1.0 - x_corr * x_corr);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.next_gaussian();
        for (int l = 1; l < q; ++l) x(i, l) = x_corr * x(i, l - 1) + innov * rng.next_gaussian();
    }
    Eigen::MatrixXd eps(n, p);
    for (int j = 0; j < p; ++j) {
        const double sd = std::sqrt(truth.dag.sigma2(j));
        for (int i = 0; i < n; ++i) eps(i, j) = sd * rng.next_gaussian();
    }
    // Y_j = sum_k U_kj Y_k + (W' x)_j + eps_j, filled ancestors-first
    Eigen::MatrixXd y = x * truth.dag.w + eps;
    const DirectedGraph g = truth.dag.edge_graph();
    for (const int j : topological_order(g)) {
        for (int k = 0; k < p; ++k) {
            if (truth.dag.u(k, j) != 0.0) y.col(j) += truth.dag.u(k, j) * y.col(k);
        }
    }
    return {std::move(x), std::move(y)};
}

int shd(const Eigen::MatrixXd& u_hat, const Eigen::MatrixXd& u_true) {
    if (u_hat.rows() != u_true.rows() || u_hat.cols() != u_true.cols())
        throw DimensionMismatch("shd: matrices of unequal shape");
    int count = 0;
    for (Eigen::Index k = 0; k < u_hat.rows(); ++k) {
        for (Eigen::Index j = 0; j < u_hat.cols(); ++j) {
            if ((u_hat(k, j) != 0.0) != (u_true(k, j) != 0.0)) ++count;
        }
    }
    return count;
}

namespace {

enum class RepOutcome { accepted, rejected, failed };

struct RepResult {
    RepOutcome dp = RepOutcome::failed;
    RepOutcome lr = RepOutcome::failed;
    RepOutcome olr = RepOutcome::failed;
};

std::uint64_t rep_stream_id(std::size_t level_idx, int rep) {
    return static_cast<std::uint64_t>(level_idx) * 1000003ULL + static_cast<std::uint64_t>(rep);
}

}  // namespace

std::vector<ExperimentCell> run_experiment(const ExperimentDesign& design) {
    design.sim.validate();
    design.hypothesis.validate(design.sim.p);
    const bool want_dp = std::find(design.methods.begin(), design.methods.end(),
                                   TestMethod::dp_lr) != design.methods.end();
    const bool want_lr =
        std::find(design.methods.begin(), design.methods.end(), TestMethod::lr) != design.methods.end();
    const bool want_olr =
        std::find(design.methods.begin(), design.methods.end(), TestMethod::olr) != design.methods.end();

    std::vector<ExperimentCell> cells;
    for (const TestMethod method : design.methods) {
        for (const double level : design.levels) {
            ExperimentCell cell;
            cell.method = method;
            cell.level = level;
            cell.reps = design.reps;
            cells.push_back(cell);
        }
    }

    for (std::size_t level_idx = 0; level_idx < design.levels.size(); ++level_idx) {
        const double level = design.levels[level_idx];
        std::vector<RepResult> results(static_cast<std::size_t>(design.reps));
        parallel_for(design.reps, design.threads, [&](int rep) {
            RepResult& res = results[static_cast<std::size_t>(rep)];
            RngStream stream(design.sim.seed, rep_stream_id(level_idx, rep));
            Eigen::MatrixXd u = gen_u(design.sim.graph_kind, design.sim.p, stream);
            // the null holds exactly over the hypothesis set; alternatives add
            // signal back on top of it
            for (const auto& [k, j] : design.hypothesis.edges) u(k, j) = 0.0;
            if (level != 0.0) {
                if (design.hypothesis.mode == TestMode::edges) {
                    u(design.hypothesis.edges.front().first, design.hypothesis.edges.front().second) =
                        level;
                } else {
                    for (const auto& [k, j] : design.hypothesis.edges) u(k, j) = level;
                }
            }
            Eigen::VectorXd sigma2(design.sim.p);
            for (int j = 0; j < design.sim.p; ++j) {
                sigma2(j) = design.sim.p == 1
                                ? design.sim.sigma2_min
                                : design.sim.sigma2_min +
                                      (design.sim.sigma2_max - design.sim.sigma2_min) * j /
                                          (design.sim.p - 1);
            }
            const SimulationTruth truth =
                make_truth(u, gen_w(design.sim.setup, design.sim.p, design.sim.q), sigma2);
            const auto [x, y] = sample_data(truth, design.sim.n, design.sim.x_corr, stream);

            const auto run_test = [&](const TestOptions& opts, const DpConfig& dp) {
                return design.hypothesis.mode == TestMode::edges
                           ? dp_edge_test(x, y, design.hypothesis, dp, design.tuning, opts)
                           : dp_pathway_test(x, y, design.hypothesis, dp, design.tuning, opts);
            };

            if (want_dp || want_lr) {
                try {
                    DpConfig dp = design.dp;
                    dp.parallelism = 1;
                    dp.seed = design.dp.seed ^ (0x5851F42D4C957F2DULL * (rep_stream_id(level_idx, rep) + 1));
                    TestOptions opts;
                    opts.method = want_dp ? PvalueMethod::both : PvalueMethod::asymptotic;
                    const DpTestReport report = run_test(opts, dp);
                    if (want_dp)
                        res.dp = report.pvalue < design.alpha ? RepOutcome::rejected
                                                              : RepOutcome::accepted;
                    if (want_lr)
                        res.lr = report.asymptotic_pvalue < design.alpha ? RepOutcome::rejected
                                                                         : RepOutcome::accepted;
                } catch (const Error&) {
                    // counted as failures for both learned-structure methods
                }
            }
            if (want_olr) {
                try {
                    DpConfig dp = design.dp;
                    dp.parallelism = 1;
                    TestOptions opts;
                    opts.method = PvalueMethod::asymptotic;
                    opts.oracle = truth.s;
                    const DpTestReport report = run_test(opts, dp);
                    res.olr = report.pvalue < design.alpha ? RepOutcome::rejected
                                                           : RepOutcome::accepted;
                } catch (const Error&) {
                }
            }
        });

        for (std::size_t mi = 0; mi < design.methods.size(); ++mi) {
            ExperimentCell& cell = cells[mi * design.levels.size() + level_idx];
            for (const RepResult& res : results) {
                const RepOutcome outcome = design.methods[mi] == TestMethod::dp_lr ? res.dp
                                           : design.methods[mi] == TestMethod::lr ? res.lr
                                                                                  : res.olr;
                if (outcome == RepOutcome::rejected) ++cell.rejections;
                if (outcome == RepOutcome::failed) ++cell.failures;
            }
        }
    }
    return cells;
}

}  // namespace ivdag
