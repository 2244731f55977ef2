// Command-line front end: simulate / learn / test-edge / test-path / eval /
// experiment subcommands over the ivdag library.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "ivdag/errors.hpp"
#include "ivdag/io.hpp"
#include "ivdag/parallel.hpp"

namespace {

using ivdag::Tuning;

struct TuningFlags {
    std::vector<double> tau_grid{0.05, 0.1, 0.15};
    int gamma_count = 100;
    double gamma_floor = 0.05;
    int kappa_max = 30;
    // fixed configuration (used when all three are set)
    double fixed_tau = 0.0;
    double fixed_gamma = 0.0;
    int fixed_kappa = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--tau-grid", tau_grid, "threshold grid for BIC tuning")->delimiter(',');
        cmd->add_option("--gamma-count", gamma_count, "number of log-spaced penalty values");
        cmd->add_option("--gamma-floor", gamma_floor, "lower end of the penalty grid as a log fraction");
        cmd->add_option("--kappa-max", kappa_max, "largest sparsity budget in the BIC grid");
        cmd->add_option("--fixed-tau", fixed_tau, "fixed threshold (skips BIC when gamma/kappa also set)");
        cmd->add_option("--fixed-gamma", fixed_gamma, "fixed penalty multiplier");
        cmd->add_option("--fixed-kappa", fixed_kappa, "fixed sparsity budget");
    }

    Tuning resolve(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const {
        if (fixed_tau > 0.0 && fixed_gamma > 0.0 && fixed_kappa > 0) {
            ivdag::TlpConfig cfg;
            cfg.tau = fixed_tau;
            cfg.gamma = fixed_gamma;
            cfg.kappa = fixed_kappa;
            return cfg;
        }
        ivdag::TuningGrids grids = ivdag::default_grids(x, y, gamma_count, gamma_floor, kappa_max);
        grids.taus = tau_grid;
        return grids;
    }
};

ivdag::GraphKind parse_graph_kind(const std::string& s) {
    if (s == "random") return ivdag::GraphKind::random_graph;
    if (s == "hub") return ivdag::GraphKind::hub;
    throw CLI::ValidationError("--graph must be 'random' or 'hub'");
}

ivdag::WSetup parse_setup(const std::string& s) {
    if (s == "A" || s == "a") return ivdag::WSetup::A;
    if (s == "B" || s == "b") return ivdag::WSetup::B;
    if (s == "C" || s == "c") return ivdag::WSetup::C;
    throw CLI::ValidationError("--setup must be A, B or C");
}

void print_report_summary(const ivdag::DpTestReport& report) {
    std::printf("mode:                %s\n",
                report.mode == ivdag::TestMode::edges ? "edge test" : "pathway test");
    std::printf("p-value:             %.6g\n", report.pvalue);
    std::printf("asymptotic p-value:  %.6g\n", report.asymptotic_pvalue);
    std::printf("Lr:                  %.6g\n", report.lr);
    std::printf("nondegenerate edges: %zu of %zu\n", report.classification.nondegenerate.size(),
                report.classification.hypothesis.size());
    std::printf("regular:             %s\n", report.classification.is_regular ? "yes" : "no");
    if (!report.contained.empty())
        std::printf("replicates:          %zu (%d contained, %d failed)\n", report.contained.size(),
                    report.n_contained, report.failed_replicates);
    if (!report.degeneracy_reason.empty())
        std::printf("note:                %s\n", report.degeneracy_reason.c_str());
    for (const auto& sub : report.subtests) {
        std::printf("  edge %d->%d: %s, p=%.6g (adjusted %.6g)\n", sub.edge.first + 1,
                    sub.edge.second + 1, sub.degenerate ? "degenerate" : "tested", sub.pvalue_raw,
                    sub.pvalue_adjusted);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Structure learning and likelihood-ratio inference for Gaussian DAGs with "
                 "unspecified additive interventions"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name
    app.set_config("--config", "", "configuration file (ini format, keys match flags)");
    int threads = ivdag::default_threads();
    app.add_option("--threads", threads, "worker pool size (env IVDAG_THREADS sets the default)");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "generate data from a synthetic model");
    ivdag::SimDesign design;
    std::string graph_kind = "random";
    std::string setup = "A";
    std::string out_x = "x.csv", out_y = "y.csv", out_truth;
    sim_cmd->add_option("--p", design.p, "primary variables")->required();
    sim_cmd->add_option("--q", design.q, "intervention variables")->required();
    sim_cmd->add_option("--n", design.n, "sample size")->required();
    sim_cmd->add_option("--graph", graph_kind, "random | hub");
    sim_cmd->add_option("--setup", setup, "intervention pattern A | B | C");
    sim_cmd->add_option("--x-corr", design.x_corr, "AR(1) correlation of the interventions");
    sim_cmd->add_option("--sigma2-min", design.sigma2_min, "smallest noise variance");
    sim_cmd->add_option("--sigma2-max", design.sigma2_max, "largest noise variance");
    sim_cmd->add_option("--seed", design.seed, "master seed");
    sim_cmd->add_option("--out-x", out_x, "interventions CSV path");
    sim_cmd->add_option("--out-y", out_y, "responses CSV path");
    sim_cmd->add_option("--out-truth", out_truth, "truth JSON path (coefficients, V, super-graph)");

    // ---- learn ----
    auto* learn_cmd = app.add_subcommand("learn", "estimate the super-graph by peeling");
    std::string y_path, x_path;
    bool header = false;
    bool do_refit = false;
    TuningFlags learn_tuning;
    std::string out_supergraph = "supergraph.json", out_trace, out_vhat, out_u, out_w, out_edges;
    learn_cmd->add_option("--y", y_path, "responses CSV")->required();
    learn_cmd->add_option("--x", x_path, "interventions CSV")->required();
    learn_cmd->add_flag("--header", header, "input CSVs carry a header row");
    learn_tuning.attach(learn_cmd);
    learn_cmd->add_flag("--refit", do_refit, "also reconstruct coefficient matrices on the super-graph");
    learn_cmd->add_option("--out-supergraph", out_supergraph, "super-graph JSON path");
    learn_cmd->add_option("--out-trace", out_trace, "peeling trace JSON path");
    learn_cmd->add_option("--out-vhat", out_vhat, "reduced-form estimate CSV path");
    learn_cmd->add_option("--out-u", out_u, "refit U matrix CSV path");
    learn_cmd->add_option("--out-w", out_w, "refit W matrix CSV path");
    learn_cmd->add_option("--out-edges", out_edges, "refit edge list JSON path");

    // ---- test-edge / test-path ----
    struct TestFlags {
        std::string y_path, x_path, hypothesis_path, oracle_path, out_report;
        bool header = false;
        double alpha = 0.05;
        int replicates = 500;
        std::uint64_t seed = 0;
        std::string method = "dp";
        TuningFlags tuning;
    };
    TestFlags edge_flags, path_flags;
    auto attach_test_flags = [](CLI::App* cmd, TestFlags& f) {
        cmd->add_option("--y", f.y_path, "responses CSV")->required();
        cmd->add_option("--x", f.x_path, "interventions CSV")->required();
        cmd->add_flag("--header", f.header, "input CSVs carry a header row");
        cmd->add_option("--hypothesis", f.hypothesis_path, "hypothesis JSON (1-based [from,to] pairs)")
            ->required();
        cmd->add_option("--alpha", f.alpha, "significance level for the printed decision");
        cmd->add_option("--replicates", f.replicates, "Monte-Carlo replicates");
        cmd->add_option("--seed", f.seed, "master seed for the perturbation streams");
        cmd->add_option("--oracle-supergraph", f.oracle_path, "skip learning, use this super-graph JSON");
        cmd->add_option("--method", f.method, "dp | asymptotic | both");
        cmd->add_option("--out-report", f.out_report, "report JSON path");
        f.tuning.attach(cmd);
    };
    auto* edge_cmd =
        app.add_subcommand("test-edge", "data-perturbation likelihood-ratio test of directed edges");
    attach_test_flags(edge_cmd, edge_flags);
    auto* path_cmd =
        app.add_subcommand("test-path", "data-perturbation likelihood-ratio test of a pathway");
    attach_test_flags(path_cmd, path_flags);

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "structural Hamming distance between two edge lists");
    std::string eval_a, eval_b;
    eval_cmd->add_option("estimated", eval_a, "edge-list JSON")->required();
    eval_cmd->add_option("reference", eval_b, "edge-list JSON")->required();

    // ---- experiment ----
    auto* exp_cmd = app.add_subcommand("experiment", "type-I error / power sweep from a design file");
    std::string design_path, out_csv, out_json;
    exp_cmd->add_option("design", design_path, "experiment design JSON")->required();
    exp_cmd->add_option("--out-csv", out_csv, "result table CSV path");
    exp_cmd->add_option("--out-json", out_json, "result table JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage error
    }

    if (sim_cmd->parsed()) {
        design.graph_kind = parse_graph_kind(graph_kind);
        design.setup = parse_setup(setup);
        ivdag::RngStream rng(design.seed, 0);
        const ivdag::SimulationTruth truth = ivdag::make_truth(design, rng);
        const auto [x, y] = ivdag::sample_data(truth, design.n, design.x_corr, rng);
        ivdag::write_matrix_csv(out_x, x);
        ivdag::write_matrix_csv(out_y, y);
        if (!out_truth.empty()) ivdag::write_json(out_truth, ivdag::truth_to_json(truth));
        std::printf("wrote %s (%d x %d) and %s (%d x %d)\n", out_x.c_str(), design.n, design.q,
                    out_y.c_str(), design.n, design.p);
        return 0;
    }

    if (learn_cmd->parsed()) {
        const ivdag::Dataset ds = ivdag::parse_dataset(y_path, x_path, header);
        const Tuning tuning = learn_tuning.resolve(ds.x, ds.y);
        const ivdag::StructureFit fit = ivdag::learn_structure(ds.x, ds.y, tuning, {}, threads);
        ivdag::write_json(out_supergraph, ivdag::supergraph_to_json(fit.s));
        if (!out_trace.empty()) ivdag::write_json(out_trace, ivdag::trace_to_json(fit.trace));
        if (!out_vhat.empty()) ivdag::write_matrix_csv(out_vhat, fit.reduced.v);
        std::printf("super-graph: %zu ancestral relations, %zu candidate interventions\n",
                    fit.s.ancestral.size(), fit.s.interventions.size());
        if (do_refit) {
            ivdag::RefitTuning refit_tuning;
            const ivdag::RefitResult refit = ivdag::refit_dag(ds.x, ds.y, fit.s, refit_tuning, threads);
            if (!out_u.empty()) ivdag::write_matrix_csv(out_u, refit.dag.u);
            if (!out_w.empty()) ivdag::write_matrix_csv(out_w, refit.dag.w);
            if (!out_edges.empty()) ivdag::write_json(out_edges, ivdag::dag_to_json(refit.dag));
            int edges = 0;
            for (Eigen::Index k = 0; k < refit.dag.u.rows(); ++k)
                for (Eigen::Index j = 0; j < refit.dag.u.cols(); ++j)
                    if (refit.dag.u(k, j) != 0.0) ++edges;
            std::printf("refit: %d directed edges\n", edges);
        }
        return 0;
    }

    const auto run_test_cmd = [&](const TestFlags& f, ivdag::TestMode mode) {
        const ivdag::Dataset ds = ivdag::parse_dataset(f.y_path, f.x_path, f.header);
        ivdag::HypothesisSpec hyp = ivdag::hypothesis_from_json(ivdag::read_json(f.hypothesis_path));
        hyp.mode = mode;
        ivdag::DpConfig dp;
        dp.replicates = f.replicates;
        dp.seed = f.seed;
        dp.parallelism = threads;
        ivdag::TestOptions opts;
        if (f.method == "dp") {
            opts.method = ivdag::PvalueMethod::dp;
        } else if (f.method == "asymptotic") {
            opts.method = ivdag::PvalueMethod::asymptotic;
        } else if (f.method == "both") {
            opts.method = ivdag::PvalueMethod::both;
        } else {
            throw CLI::ValidationError("--method must be dp, asymptotic or both");
        }
        if (!f.oracle_path.empty())
            opts.oracle = ivdag::supergraph_from_json(ivdag::read_json(f.oracle_path));
        const Tuning tuning = f.tuning.resolve(ds.x, ds.y);
        const ivdag::DpTestReport report =
            mode == ivdag::TestMode::edges ? ivdag::dp_edge_test(ds.x, ds.y, hyp, dp, tuning, opts)
                                           : ivdag::dp_pathway_test(ds.x, ds.y, hyp, dp, tuning, opts);
        print_report_summary(report);
        std::printf("decision at alpha=%.3g: %s\n", f.alpha,
                    report.pvalue < f.alpha ? "reject H0" : "do not reject H0");
        if (!f.out_report.empty()) ivdag::write_json(f.out_report, ivdag::report_to_json(report));
        return 0;
    };

    if (edge_cmd->parsed()) return run_test_cmd(edge_flags, ivdag::TestMode::edges);
    if (path_cmd->parsed()) return run_test_cmd(path_flags, ivdag::TestMode::pathway);

    if (eval_cmd->parsed()) {
        const auto [pa, ea] = ivdag::edge_list_from_json(ivdag::read_json(eval_a));
        const auto [pb, eb] = ivdag::edge_list_from_json(ivdag::read_json(eval_b));
        if (pa != pb) throw ivdag::DimensionMismatch("edge lists disagree on p");
        ivdag::PairSet sa(pa, pa), sb(pb, pb);
        for (const auto& [k, j] : ea) sa.insert(k, j);
        for (const auto& [k, j] : eb) sb.insert(k, j);
        int distance = 0;
        for (const auto& [k, j] : ea)
            if (!sb.contains(k, j)) ++distance;
        for (const auto& [k, j] : eb)
            if (!sa.contains(k, j)) ++distance;
        std::printf("shd: %d\n", distance);
        return 0;
    }

    if (exp_cmd->parsed()) {
        const nlohmann::json j = ivdag::read_json(design_path);
        ivdag::ExperimentDesign exp;
        const auto& sim = j.at("sim");
        exp.sim.p = sim.at("p").get<int>();
        exp.sim.q = sim.at("q").get<int>();
        exp.sim.n = sim.at("n").get<int>();
        exp.sim.graph_kind = parse_graph_kind(sim.value("graph", "random"));
        exp.sim.setup = parse_setup(sim.value("setup", "A"));
        exp.sim.x_corr = sim.value("x_corr", 0.5);
        exp.sim.seed = sim.value("seed", 0ULL);
        exp.hypothesis = ivdag::hypothesis_from_json(j.at("hypothesis"));
        exp.levels = j.value("levels", std::vector<double>{0.0});
        exp.reps = j.value("reps", 100);
        exp.alpha = j.value("alpha", 0.05);
        if (j.contains("dp")) {
            exp.dp.replicates = j["dp"].value("replicates", 500);
            exp.dp.seed = j["dp"].value("seed", 0ULL);
            exp.dp.warm_start = j["dp"].value("warm_start", true);
        }
        exp.methods.clear();
        for (const std::string m : j.value("methods", std::vector<std::string>{"dp-lr", "lr", "olr"})) {
            if (m == "dp-lr") exp.methods.push_back(ivdag::TestMethod::dp_lr);
            else if (m == "lr") exp.methods.push_back(ivdag::TestMethod::lr);
            else if (m == "olr") exp.methods.push_back(ivdag::TestMethod::olr);
            else throw ivdag::ParseError("unknown method '" + m + "'");
        }
        exp.threads = threads;
        // tuning block: fixed config or grid parameters
        if (j.contains("tuning") && j["tuning"].contains("fixed_tau")) {
            ivdag::TlpConfig cfg;
            cfg.tau = j["tuning"].at("fixed_tau").get<double>();
            cfg.gamma = j["tuning"].at("fixed_gamma").get<double>();
            cfg.kappa = j["tuning"].at("fixed_kappa").get<int>();
            exp.tuning = cfg;
        } else {
            // the gamma grid stays empty here: its anchor depends on the data,
            // which varies per replication, so each run resolves it itself
            ivdag::TuningGrids grids;
            int kappa_max = 30;
            if (j.contains("tuning")) {
                const auto& t = j["tuning"];
                grids.taus = t.value("tau_grid", grids.taus);
                grids.gamma_count = t.value("gamma_count", grids.gamma_count);
                grids.gamma_floor = t.value("gamma_floor", grids.gamma_floor);
                kappa_max = t.value("kappa_max", kappa_max);
            }
            for (int k = 1; k <= std::min(kappa_max, exp.sim.q); ++k) grids.kappas.push_back(k);
            exp.tuning = grids;
        }
        const auto cells = ivdag::run_experiment(exp);
        const std::string csv = ivdag::experiment_cells_to_csv(cells);
        std::fputs(csv.c_str(), stdout);
        if (!out_csv.empty()) ivdag::write_text(out_csv, csv);
        if (!out_json.empty()) ivdag::write_json(out_json, ivdag::experiment_cells_to_json(cells));
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ivdag::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == ivdag::ErrorKind::data ? 3 : 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
