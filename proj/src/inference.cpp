#include "ivdag/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "ivdag/errors.hpp"
#include "ivdag/linalg.hpp"
#include "ivdag/parallel.hpp"
#include "ivdag/stats.hpp"

namespace ivdag {

Eigen::MatrixXd stack_xy(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (x.rows() != y.rows()) throw RowMismatch("stack_xy: X and Y row counts differ");
    Eigen::MatrixXd z(x.rows(), x.cols() + y.cols());
    z << x, y;
    return z;
}

NodeTestSets node_test_sets(const SuperGraph& s, const HypothesisClassification& cls, int j) {
    const std::vector<int> an = s.ancestors_of(j);
    const std::vector<int> in = s.interventions_on(j);
    std::vector<int> d;
    if (const auto it = cls.per_node_d.find(j); it != cls.per_node_d.end()) d = it->second;

    NodeTestSets sets;
    for (const int l : in) sets.a_cols.push_back(x_column(l));
    for (const int l : in) sets.b_cols.push_back(x_column(l));
    std::vector<int> a_primary;
    std::set_union(an.begin(), an.end(), d.begin(), d.end(), std::back_inserter(a_primary));
    for (const int k : a_primary) sets.a_cols.push_back(y_column(s.q, k));
    std::vector<int> b_primary;
    std::set_difference(an.begin(), an.end(), d.begin(), d.end(), std::back_inserter(b_primary));
    for (const int k : b_primary) sets.b_cols.push_back(y_column(s.q, k));
    std::sort(sets.a_cols.begin(), sets.a_cols.end());
    std::sort(sets.b_cols.begin(), sets.b_cols.end());
    return sets;
}

Eigen::VectorXd sigma_hat(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const SuperGraph& s) {
    if (x.rows() != y.rows()) throw RowMismatch("sigma_hat: X and Y row counts differ");
    const int n = static_cast<int>(y.rows());
    const int p = static_cast<int>(y.cols());
    if (s.p != p || s.q != x.cols()) throw DimensionMismatch("sigma_hat: super-graph dimensions mismatch");
    const Eigen::MatrixXd z = stack_xy(x, y);
    Eigen::VectorXd sigma2(p);
    for (int j = 0; j < p; ++j) {
        const std::vector<int> an = s.ancestors_of(j);
        const std::vector<int> in = s.interventions_on(j);
        const int m = static_cast<int>(an.size() + in.size());
        const int dof = n - m;
        if (dof <= 0)
            throw DegreesOfFreedomExhausted("sigma_hat: node " + std::to_string(j + 1) + " has " +
                                            std::to_string(m) + " predictors for n=" + std::to_string(n));
        std::vector<int> cols;
        for (const int l : in) cols.push_back(x_column(l));
        for (const int k : an) cols.push_back(y_column(s.q, k));
        const Eigen::MatrixXd basis = orthonormal_basis(select_columns(z, cols));
        const double rss =
            std::max(y.col(j).squaredNorm() - (basis.transpose() * y.col(j)).squaredNorm(), 0.0);
        sigma2(j) = rss / dof;
    }
    return sigma2;
}

double node_statistic(const Eigen::MatrixXd& z, const std::vector<int>& a_cols,
                      const std::vector<int>& b_cols, const Eigen::VectorXd& v) {
    const Eigen::MatrixXd qa = orthonormal_basis(select_columns(z, a_cols));
    const Eigen::MatrixXd qb = orthonormal_basis(select_columns(z, b_cols));
    const double proj_a = (qa.transpose() * v).squaredNorm();
    const double quad = std::max(proj_a - (qb.transpose() * v).squaredNorm(), 0.0);
    const int dof = static_cast<int>(z.rows()) - static_cast<int>(a_cols.size());
    if (dof <= 0)
        throw DegreesOfFreedomExhausted("node_statistic: |A| >= n leaves no residual degrees of freedom");
    const double resid = std::max(v.squaredNorm() - proj_a, 0.0);
    const double denom = resid / dof;
    if (denom <= 0.0) return quad > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return quad / denom;
}

double likelihood_ratio_edges(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y,
                              const SuperGraph& s, const HypothesisClassification& cls) {
    if (!cls.is_regular)
        throw CyclicInput("likelihood_ratio_edges: hypothesis is irregular with respect to the graph");
    double lr = 0.0;
    for (const auto& [j, d] : cls.per_node_d) {
        (void)d;
        const NodeTestSets sets = node_test_sets(s, cls, j);
        lr += 0.5 * node_statistic(z, sets.a_cols, sets.b_cols, y.col(j));
    }
    return lr;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> perturb(const Eigen::MatrixXd& y,
                                                    const Eigen::VectorXd& sigma2,
                                                    RngStream& stream) {
    if (sigma2.size() != y.cols()) throw DimensionMismatch("perturb: sigma2 length mismatch");
    Eigen::MatrixXd e_star(y.rows(), y.cols());
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        if (sigma2(j) < 0.0) throw DimensionMismatch("perturb: negative variance");
        const double sd = std::sqrt(sigma2(j));
        for (Eigen::Index i = 0; i < y.rows(); ++i) e_star(i, j) = sd * stream.next_gaussian();
    }
    return {y + e_star, e_star};
}

double dp_star_statistic(const Eigen::MatrixXd& e_star, const Eigen::MatrixXd& z_star,
                         const SuperGraph& s_star, const HypothesisClassification& cls_star,
                         const HypothesisClassification& cls_original) {
    double lr = 0.0;
    for (const auto& [j, d] : cls_original.per_node_d) {
        (void)d;
        const NodeTestSets sets = node_test_sets(s_star, cls_star, j);
        lr += 0.5 * node_statistic(z_star, sets.a_cols, sets.b_cols, e_star.col(j));
    }
    return lr;
}

bool supergraph_contains(const SuperGraph& s_star, const SuperGraph& s) {
    if (s_star.p != s.p || s_star.q != s.q)
        throw DimensionMismatch("supergraph_contains: dimension mismatch");
    return s_star.ancestral.contains_all(s.ancestral) &&
           s_star.interventions.contains_all(s.interventions);
}

double asymptotic_pvalue(double lr, int d_size, bool normal_branch) {
    if (d_size <= 0) return 1.0;
    if (normal_branch)
        return stats::normal_sf((2.0 * lr - d_size) / std::sqrt(2.0 * d_size));
    return stats::chi2_sf(2.0 * lr, static_cast<double>(d_size));
}

double dp_pvalue(const std::vector<double>& lr_star, const std::vector<std::uint8_t>& contained,
                 double lr) {
    if (lr_star.size() != contained.size())
        throw DimensionMismatch("dp_pvalue: replicate vectors of unequal length");
    int n_contained = 0;
    int hits = 0;
    for (std::size_t m = 0; m < lr_star.size(); ++m) {
        if (!contained[m]) continue;
        ++n_contained;
        if (lr_star[m] >= lr) ++hits;
    }
    if (n_contained == 0)
        throw NoContainedReplicates(
            "dp_pvalue: no replicate structure contained the original estimate");
    return static_cast<double>(hits) / n_contained;
}

std::vector<double> holm_adjust(const std::vector<double>& pvalues) {
    const std::size_t k = pvalues.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::vector<double> adjusted(k, 1.0);
    double running = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double scaled = static_cast<double>(k - i) * pvalues[order[i]];
        running = std::max(running, scaled);
        adjusted[order[i]] = std::min(running, 1.0);
    }
    return adjusted;
}

namespace {

struct ReplicateOutcome {
    std::vector<double> stats;
    bool contained = false;
    bool failed = false;
};

// One learn-free or frozen-tuning relearn per replicate; stats_fn maps the
// perturbed draw to whatever per-replicate statistics the caller needs.
std::vector<ReplicateOutcome> run_replicates(
    const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::VectorXd& sigma2,
    const SuperGraph& s, const StructureFit* fit, const DpConfig& dp, std::size_t n_stats,
    const std::function<std::vector<double>(const Eigen::MatrixXd& e_star,
                                            const Eigen::MatrixXd& z_star,
                                            const SuperGraph& s_star)>& stats_fn) {
    std::vector<ReplicateOutcome> out(static_cast<std::size_t>(dp.replicates));
    const TlpGram gram = fit ? TlpGram(x) : TlpGram();
    parallel_for(dp.replicates, dp.parallelism, [&](int m) {
        auto& slot = out[static_cast<std::size_t>(m)];
        slot.stats.assign(n_stats, 0.0);
        try {
            RngStream stream(dp.seed, static_cast<std::uint64_t>(m));
            auto [y_star, e_star] = perturb(y, sigma2, stream);
            SuperGraph s_star;
            if (fit) {
                s_star = learn_structure_frozen(gram, x, y_star, fit->configs,
                                                dp.warm_start ? &fit->tilde_v : nullptr)
                             .s;
            } else {
                s_star = s;  // oracle mode: the structure is held fixed
            }
            slot.contained = supergraph_contains(s_star, s);
            slot.stats = stats_fn(e_star, stack_xy(x, y_star), s_star);
        } catch (const Error&) {
            slot.failed = true;
            slot.contained = false;
            slot.stats.assign(n_stats, 0.0);
        }
    });
    return out;
}

void fill_replicate_columns(DpTestReport& report, const std::vector<ReplicateOutcome>& outcomes) {
    report.contained.clear();
    report.replicate_failed.clear();
    report.n_contained = 0;
    report.failed_replicates = 0;
    for (const auto& o : outcomes) {
        report.contained.push_back(o.contained ? 1 : 0);
        report.replicate_failed.push_back(o.failed ? 1 : 0);
        if (o.contained) ++report.n_contained;
        if (o.failed) ++report.failed_replicates;
    }
}

struct Structure {
    SuperGraph s;
    std::optional<StructureFit> fit;  // absent in oracle mode
};

Structure obtain_structure(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Tuning& tuning,
                           const TestOptions& opts, int threads) {
    Structure st;
    if (opts.oracle) {
        st.s = *opts.oracle;
        if (st.s.p != y.cols() || st.s.q != x.cols())
            throw DimensionMismatch("oracle super-graph dimensions do not match the data");
        return st;
    }
    st.fit = learn_structure(x, y, tuning, {}, threads);
    st.s = st.fit->s;
    return st;
}

}  // namespace

DpTestReport dp_edge_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const HypothesisSpec& hyp, const DpConfig& dp, const Tuning& tuning,
                          const TestOptions& opts) {
    hyp.validate(static_cast<int>(y.cols()));
    DpTestReport report;
    report.mode = TestMode::edges;
    report.used_oracle = opts.oracle.has_value();

    const Structure st = obtain_structure(x, y, tuning, opts, dp.parallelism);
    report.classification = classify_hypothesis(hyp, st.s);
    const auto& cls = report.classification;

    if (cls.is_degenerate) {
        report.degeneracy_reason =
            "every hypothesized edge is degenerate: the reverse relation is ancestral in the "
            "estimated super-graph";
        report.pvalue = 1.0;
        report.asymptotic_pvalue = 1.0;
        return report;
    }

    const Eigen::MatrixXd z = stack_xy(x, y);
    report.sigma2_hat = sigma_hat(y, x, st.s);

    if (!cls.is_regular) {
        // Decompose into single-edge tests (each one is regular or degenerate
        // on its own) and combine with Holm. All sub-tests share one
        // replicate set: the perturbed structure does not depend on the
        // hypothesis.
        const std::size_t k = hyp.edges.size();
        std::vector<HypothesisClassification> sub_cls(k);
        std::vector<double> sub_lr(k, 0.0);
        std::vector<double> asym(k, 1.0);
        for (std::size_t e = 0; e < k; ++e) {
            HypothesisSpec single{{hyp.edges[e]}, TestMode::edges};
            sub_cls[e] = classify_hypothesis(single, st.s);
            if (sub_cls[e].is_degenerate) continue;
            sub_lr[e] = likelihood_ratio_edges(z, y, st.s, sub_cls[e]);
            asym[e] = asymptotic_pvalue(sub_lr[e], 1);
        }
        const std::vector<double> asym_adjusted = holm_adjust(asym);
        report.asymptotic_pvalue = *std::min_element(asym_adjusted.begin(), asym_adjusted.end());

        std::vector<double> raw(k, 1.0);
        if (opts.method != PvalueMethod::asymptotic) {
            const auto outcomes = run_replicates(
                x, y, report.sigma2_hat, st.s, st.fit ? &*st.fit : nullptr, dp, k,
                [&](const Eigen::MatrixXd& e_star, const Eigen::MatrixXd& z_star,
                    const SuperGraph& s_star) {
                    std::vector<double> vals(k, 0.0);
                    for (std::size_t e = 0; e < k; ++e) {
                        if (sub_cls[e].is_degenerate) continue;
                        HypothesisSpec single{{hyp.edges[e]}, TestMode::edges};
                        const auto cls_star = classify_hypothesis(single, s_star);
                        vals[e] = dp_star_statistic(e_star, z_star, s_star, cls_star, sub_cls[e]);
                    }
                    return vals;
                });
            fill_replicate_columns(report, outcomes);
            report.lr_star_nu.assign(k, {});
            for (const auto& o : outcomes) {
                for (std::size_t e = 0; e < k; ++e) report.lr_star_nu[e].push_back(o.stats[e]);
            }
            for (std::size_t e = 0; e < k; ++e) {
                if (sub_cls[e].is_degenerate) continue;
                raw[e] = dp_pvalue(report.lr_star_nu[e], report.contained, sub_lr[e]);
            }
        } else {
            raw = asym;
        }
        const std::vector<double> adjusted = holm_adjust(raw);
        for (std::size_t e = 0; e < k; ++e) {
            EdgeTestDetail detail;
            detail.edge = hyp.edges[e];
            detail.degenerate = sub_cls[e].is_degenerate;
            detail.lr = sub_lr[e];
            detail.pvalue_raw = raw[e];
            detail.pvalue_adjusted = adjusted[e];
            detail.asymptotic_raw = asym[e];
            report.subtests.push_back(detail);
        }
        report.pvalue = *std::min_element(adjusted.begin(), adjusted.end());
        return report;
    }

    report.lr = likelihood_ratio_edges(z, y, st.s, cls);
    report.asymptotic_pvalue =
        asymptotic_pvalue(report.lr, static_cast<int>(cls.nondegenerate.size()));
    if (opts.method == PvalueMethod::asymptotic) {
        report.pvalue = report.asymptotic_pvalue;
        return report;
    }

    const auto outcomes =
        run_replicates(x, y, report.sigma2_hat, st.s, st.fit ? &*st.fit : nullptr, dp, 1,
                       [&](const Eigen::MatrixXd& e_star, const Eigen::MatrixXd& z_star,
                           const SuperGraph& s_star) {
                           const auto cls_star = classify_hypothesis(hyp, s_star);
                           return std::vector<double>{
                               dp_star_statistic(e_star, z_star, s_star, cls_star, cls)};
                       });
    fill_replicate_columns(report, outcomes);
    for (const auto& o : outcomes) report.lr_star.push_back(o.stats[0]);
    report.pvalue = dp_pvalue(report.lr_star, report.contained, report.lr);
    return report;
}

DpTestReport dp_pathway_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                             const HypothesisSpec& hyp, const DpConfig& dp, const Tuning& tuning,
                             const TestOptions& opts) {
    hyp.validate(static_cast<int>(y.cols()));
    DpTestReport report;
    report.mode = TestMode::pathway;
    report.used_oracle = opts.oracle.has_value();

    const Structure st = obtain_structure(x, y, tuning, opts, dp.parallelism);
    report.classification = classify_hypothesis(hyp, st.s);
    const auto& cls = report.classification;

    if (cls.nondegenerate.size() < hyp.edges.size()) {
        report.degeneracy_reason =
            "a hypothesized edge is degenerate, so the pathway cannot exist under the estimated "
            "structure";
        report.pvalue = 1.0;
        report.asymptotic_pvalue = 1.0;
        return report;
    }
    if (!cls.is_regular) {
        report.degeneracy_reason =
            "the hypothesis is irregular: the nondegenerate edges plus the ancestral relations "
            "contain a directed cycle";
        report.pvalue = 1.0;
        report.asymptotic_pvalue = 1.0;
        return report;
    }

    const Eigen::MatrixXd z = stack_xy(x, y);
    report.sigma2_hat = sigma_hat(y, x, st.s);
    const std::size_t k = hyp.edges.size();

    // per-sub-hypothesis statistic: constrain only edge nu, everything else
    // in the augmented model stays free
    const auto sub_statistic = [&](const Eigen::MatrixXd& zz, const SuperGraph& s,
                                   const HypothesisClassification& c, std::size_t nu,
                                   const Eigen::VectorXd& v) {
        const auto [k_nu, j_nu] = hyp.edges[nu];
        const NodeTestSets sets = node_test_sets(s, c, j_nu);
        std::vector<int> b_cols = sets.a_cols;
        bool nondegenerate = false;
        if (const auto it = c.per_node_d.find(j_nu); it != c.per_node_d.end())
            nondegenerate = std::find(it->second.begin(), it->second.end(), k_nu) != it->second.end();
        if (nondegenerate) {
            b_cols.erase(std::remove(b_cols.begin(), b_cols.end(), y_column(s.q, k_nu)),
                         b_cols.end());
        }
        return 0.5 * node_statistic(zz, sets.a_cols, b_cols, v);
    };

    report.lr_nu.resize(k);
    double asym = 0.0;
    for (std::size_t nu = 0; nu < k; ++nu) {
        report.lr_nu[nu] = sub_statistic(z, st.s, cls, nu, y.col(hyp.edges[nu].second));
        asym = std::max(asym, asymptotic_pvalue(report.lr_nu[nu], 1));
    }
    report.lr = *std::max_element(report.lr_nu.begin(), report.lr_nu.end());
    report.asymptotic_pvalue = asym;
    if (opts.method == PvalueMethod::asymptotic) {
        report.pvalue = report.asymptotic_pvalue;
        return report;
    }

    const auto outcomes = run_replicates(
        x, y, report.sigma2_hat, st.s, st.fit ? &*st.fit : nullptr, dp, k,
        [&](const Eigen::MatrixXd& e_star, const Eigen::MatrixXd& z_star,
            const SuperGraph& s_star) {
            const auto cls_star = classify_hypothesis(hyp, s_star);
            std::vector<double> vals(k);
            for (std::size_t nu = 0; nu < k; ++nu)
                vals[nu] = sub_statistic(z_star, s_star, cls_star, nu,
                                         e_star.col(hyp.edges[nu].second));
            return vals;
        });
    fill_replicate_columns(report, outcomes);
    report.lr_star_nu.assign(k, {});
    for (const auto& o : outcomes) {
        for (std::size_t nu = 0; nu < k; ++nu) report.lr_star_nu[nu].push_back(o.stats[nu]);
    }
    double pval = 0.0;
    for (std::size_t nu = 0; nu < k; ++nu)
        pval = std::max(pval, dp_pvalue(report.lr_star_nu[nu], report.contained, report.lr_nu[nu]));
    report.pvalue = pval;
    return report;
}

}  // namespace ivdag
