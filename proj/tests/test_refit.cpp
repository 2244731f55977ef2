#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ivdag/errors.hpp"
#include "ivdag/refit.hpp"
#include "ivdag/rng.hpp"
#include "ivdag/simulate.hpp"

using namespace ivdag;

namespace {

SimulationTruth chain_truth() {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(5, 5);
    u(0, 1) = 0.5;
    u(1, 2) = 0.5;
    u(2, 3) = 0.5;
    u(0, 3) = -0.1;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
    w(0, 0) = 1.0;
    w(2, 1) = 1.0;
    w(4, 2) = 1.0;
    w(1, 3) = 1.0;
    w(3, 4) = 1.0;
    return make_truth(u, w, Eigen::VectorXd::Ones(5));
}

}  // namespace

TEST_CASE("diagonal-instrument super-graph refits W and leaves U empty") {
    RngStream rng(101, 0);
    SimDesign design;
    design.p = 4;
    design.q = 4;
    design.setup = WSetup::C;
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(4, 4);
    const SimulationTruth truth = make_truth(u, gen_w(WSetup::C, 4, 4), Eigen::VectorXd::Ones(4));
    const auto [x, y] = sample_data(truth, 1500, 0.5, rng);

    SuperGraph s(4, 4);
    for (int j = 0; j < 4; ++j) s.interventions.insert(j, j);
    RefitTuning tuning;
    tuning.fixed_kappa = std::vector<int>{1, 1, 1, 1};
    const RefitResult res = refit_dag(x, y, s, tuning);
    CHECK(res.dag.u.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    for (int j = 0; j < 4; ++j) {
        CHECK(res.dag.w(j, j) == doctest::Approx(1.0).epsilon(0.1));
        CHECK(res.dag.sigma2(j) == doctest::Approx(1.0).epsilon(0.2));
    }
}

TEST_CASE("refit on the worked example recovers the edge coefficients across seeds") {
    const SimulationTruth truth = chain_truth();
    RngStream rng(202, 0);
    int hits = 0;
    const int seeds = 20;
    for (int rep = 0; rep < seeds; ++rep) {
        const auto [x, y] = sample_data(truth, 2000, 0.5, rng);
        RefitTuning tuning;  // BIC over the full per-node grid
        const RefitResult res = refit_dag(x, y, truth.s, tuning);
        const bool ok = std::abs(res.dag.u(0, 1) - 0.5) < 0.1 && std::abs(res.dag.u(1, 2) - 0.5) < 0.1 &&
                        std::abs(res.dag.u(2, 3) - 0.5) < 0.1 && std::abs(res.dag.u(0, 3) + 0.1) < 0.1;
        if (ok) ++hits;
    }
    CHECK(hits >= 18);  // 90% of seeds
}

TEST_CASE("empty super-graph yields the null model with n in the denominator") {
    RngStream rng(303, 0);
    Eigen::MatrixXd x(40, 2), y(40, 2);
    for (int i = 0; i < 40; ++i) {
        for (int c = 0; c < 2; ++c) {
            x(i, c) = rng.next_gaussian();
            y(i, c) = rng.next_gaussian();
        }
    }
    const SuperGraph s(2, 2);
    RefitTuning tuning;
    const RefitResult res = refit_dag(x, y, s, tuning);
    CHECK(res.dag.u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(res.dag.w.cwiseAbs().maxCoeff() == 0.0);
    for (int j = 0; j < 2; ++j)
        CHECK(res.dag.sigma2(j) == doctest::Approx(y.col(j).squaredNorm() / 40));
}

TEST_CASE("refit supports stay inside the super-graph and never beat the null fit") {
    RngStream rng(404, 0);
    for (int trial = 0; trial < 10; ++trial) {
        SimDesign design;
        design.p = 5;
        design.q = 10;
        const SimulationTruth truth = make_truth(design, rng);
        const auto [x, y] = sample_data(truth, 400, 0.5, rng);
        RefitTuning tuning;
        const RefitResult res = refit_dag(x, y, truth.s, tuning);
        for (int k = 0; k < 5; ++k) {
            for (int j = 0; j < 5; ++j) {
                if (res.dag.u(k, j) != 0.0) CHECK(truth.s.ancestral.contains(k, j));
            }
        }
        for (int l = 0; l < 10; ++l) {
            for (int j = 0; j < 5; ++j) {
                if (res.dag.w(l, j) != 0.0) CHECK(truth.s.interventions.contains(l, j));
            }
        }
        DirectedGraph g = res.dag.edge_graph();
        CHECK_FALSE(has_cycle(g));
        for (int j = 0; j < 5; ++j) {
            const Eigen::VectorXd fitted =
                y * res.dag.u.col(j) + x * res.dag.w.col(j);
            CHECK((y.col(j) - fitted).squaredNorm() <= y.col(j).squaredNorm() + 1e-9);
        }
    }
}

TEST_CASE("budgets above the predictor count are clamped and flagged") {
    RngStream rng(505, 0);
    Eigen::MatrixXd x(60, 2), y(60, 1);
    for (int i = 0; i < 60; ++i) {
        x(i, 0) = rng.next_gaussian();
        x(i, 1) = rng.next_gaussian();
        y(i, 0) = x(i, 0) + 0.2 * rng.next_gaussian();
    }
    SuperGraph s(1, 2);
    s.interventions.insert(0, 0);
    RefitTuning tuning;
    tuning.fixed_kappa = std::vector<int>{5};  // only one predictor available
    const RefitResult res = refit_dag(x, y, s, tuning);
    CHECK(res.clamped[0] == 1);
    CHECK(res.kappa_used[0] == 1);
}

TEST_CASE("degrees of freedom exhaustion is an error") {
    Eigen::MatrixXd x(3, 4), y(3, 1);
    x.setRandom();
    y.setRandom();
    SuperGraph s(1, 4);
    for (int l = 0; l < 4; ++l) s.interventions.insert(l, 0);
    RefitTuning tuning;
    CHECK_THROWS_AS(refit_dag(x, y, s, tuning), DegreesOfFreedomExhausted);
}
