#include "ivdag/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ivdag/errors.hpp"

namespace ivdag {

namespace {

constexpr const char* kSchemaSuperGraph = "ivdag.supergraph.v1";
constexpr const char* kSchemaHypothesis = "ivdag.hypothesis.v1";
constexpr const char* kSchemaEdges = "ivdag.edges.v1";
constexpr const char* kSchemaReport = "ivdag.report.v1";
constexpr const char* kSchemaTruth = "ivdag.truth.v1";
constexpr const char* kSchemaTrace = "ivdag.trace.v1";
constexpr const char* kSchemaDag = "ivdag.dag.v1";
constexpr const char* kSchemaExperiment = "ivdag.experiment-result.v1";

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string strip(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(strip(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

nlohmann::json pairs_to_json_1based(const PairSet& set) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [a, b] : set.sorted()) arr.push_back({a + 1, b + 1});
    return arr;
}

nlohmann::json pairs_to_json_1based(std::vector<std::pair<int, int>> pairs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [a, b] : pairs) arr.push_back({a + 1, b + 1});
    return arr;
}

std::vector<std::pair<int, int>> pairs_from_json_1based(const nlohmann::json& arr) {
    std::vector<std::pair<int, int>> out;
    for (const auto& item : arr) {
        if (!item.is_array() || item.size() != 2)
            throw ParseError("expected [i, j] integer pairs");
        out.emplace_back(item[0].get<int>() - 1, item[1].get<int>() - 1);
    }
    return out;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

void expect_schema(const nlohmann::json& j, const char* schema) {
    if (!j.contains("schema") || j["schema"] != schema)
        throw ParseError(std::string("expected schema '") + schema + "'");
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::string& path, bool header,
                                std::vector<std::string>* names) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header_pending = header;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string trimmed = strip(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto cells = split_csv_line(line);
        if (header_pending) {
            header_pending = false;
            if (names) *names = cells;
            width = cells.size();
            continue;
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(width) + " cells, found " + std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& cell = cells[c];
            if (cell.empty())
                throw MissingValue(path + ":" + std::to_string(lineno) + ": missing value in column " +
                                   std::to_string(c + 1));
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell +
                                 "' in column " + std::to_string(c + 1));
            row[c] = value;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < width; ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
    return m;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>* names) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "# ivdag.matrix.v1\n";
    if (names && !names->empty()) {
        for (std::size_t c = 0; c < names->size(); ++c) {
            if (c) out << ',';
            out << (*names)[c];
        }
        out << '\n';
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

Dataset parse_dataset(const std::string& y_path, const std::string& x_path, bool header) {
    Dataset ds;
    ds.y = read_matrix_csv(y_path, header, &ds.y_names);
    ds.x = read_matrix_csv(x_path, header, &ds.x_names);
    if (ds.x.rows() != ds.y.rows())
        throw RowMismatch("row counts differ: Y has " + std::to_string(ds.y.rows()) + ", X has " +
                          std::to_string(ds.x.rows()));
    return ds;
}

nlohmann::json supergraph_to_json(const SuperGraph& s) {
    nlohmann::json j;
    j["schema"] = kSchemaSuperGraph;
    j["p"] = s.p;
    j["q"] = s.q;
    j["ancestral"] = pairs_to_json_1based(s.ancestral);
    j["interventions"] = pairs_to_json_1based(s.interventions);
    j["heights"] = s.heights;
    return j;
}

SuperGraph supergraph_from_json(const nlohmann::json& j) {
    expect_schema(j, kSchemaSuperGraph);
    SuperGraph s(j.at("p").get<int>(), j.at("q").get<int>());
    for (const auto& [k, jj] : pairs_from_json_1based(j.at("ancestral"))) s.ancestral.insert(k, jj);
    for (const auto& [l, jj] : pairs_from_json_1based(j.at("interventions")))
        s.interventions.insert(l, jj);
    s.heights = j.at("heights").get<std::vector<int>>();
    if (static_cast<int>(s.heights.size()) != s.p)
        throw ParseError("supergraph heights length must equal p");
    return s;
}

nlohmann::json hypothesis_to_json(const HypothesisSpec& h) {
    nlohmann::json j;
    j["schema"] = kSchemaHypothesis;
    j["edges"] = pairs_to_json_1based(h.edges);
    j["mode"] = h.mode == TestMode::edges ? "edges" : "pathway";
    return j;
}

HypothesisSpec hypothesis_from_json(const nlohmann::json& j) {
    if (j.contains("schema")) expect_schema(j, kSchemaHypothesis);
    HypothesisSpec h;
    h.edges = pairs_from_json_1based(j.at("edges"));
    if (j.contains("mode")) {
        const std::string mode = j["mode"].get<std::string>();
        if (mode == "edges") {
            h.mode = TestMode::edges;
        } else if (mode == "pathway") {
            h.mode = TestMode::pathway;
        } else {
            throw ParseError("hypothesis mode must be 'edges' or 'pathway'");
        }
    }
    return h;
}

nlohmann::json edge_list_to_json(int p, const std::vector<std::pair<int, int>>& edges) {
    nlohmann::json j;
    j["schema"] = kSchemaEdges;
    j["p"] = p;
    j["edges"] = pairs_to_json_1based(edges);
    return j;
}

std::pair<int, std::vector<std::pair<int, int>>> edge_list_from_json(const nlohmann::json& j) {
    if (j.contains("schema") && j["schema"] == kSchemaDag) {
        // coefficient edge lists (refit output) are accepted too
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : j.at("edges"))
            edges.emplace_back(e.at("from").get<int>() - 1, e.at("to").get<int>() - 1);
        return {j.at("p").get<int>(), std::move(edges)};
    }
    expect_schema(j, kSchemaEdges);
    return {j.at("p").get<int>(), pairs_from_json_1based(j.at("edges"))};
}

nlohmann::json report_to_json(const DpTestReport& report) {
    nlohmann::json j;
    j["schema"] = kSchemaReport;
    j["mode"] = report.mode == TestMode::edges ? "edges" : "pathway";
    j["pvalue"] = report.pvalue;
    j["asymptotic_pvalue"] = report.asymptotic_pvalue;
    j["lr"] = report.lr;
    if (!report.lr_nu.empty()) j["lr_per_edge"] = report.lr_nu;
    if (!report.lr_star.empty()) j["lr_star"] = report.lr_star;
    if (!report.lr_star_nu.empty()) j["lr_star_per_edge"] = report.lr_star_nu;
    j["contained"] = report.contained;
    j["n_contained"] = report.n_contained;
    j["failed_replicates"] = report.failed_replicates;
    j["replicates"] = report.contained.size();
    j["used_oracle"] = report.used_oracle;
    if (!report.degeneracy_reason.empty()) j["degeneracy_reason"] = report.degeneracy_reason;
    if (report.sigma2_hat.size() > 0) j["sigma2_hat"] = vector_to_json(report.sigma2_hat);

    nlohmann::json cls;
    cls["hypothesis"] = pairs_to_json_1based(report.classification.hypothesis);
    cls["nondegenerate"] = pairs_to_json_1based(report.classification.nondegenerate);
    cls["is_degenerate"] = report.classification.is_degenerate;
    cls["is_regular"] = report.classification.is_regular;
    j["classification"] = std::move(cls);

    if (!report.subtests.empty()) {
        nlohmann::json subs = nlohmann::json::array();
        for (const auto& d : report.subtests) {
            nlohmann::json s;
            s["edge"] = {d.edge.first + 1, d.edge.second + 1};
            s["degenerate"] = d.degenerate;
            s["lr"] = d.lr;
            s["pvalue_raw"] = d.pvalue_raw;
            s["pvalue_adjusted"] = d.pvalue_adjusted;
            s["asymptotic_raw"] = d.asymptotic_raw;
            subs.push_back(std::move(s));
        }
        j["subtests"] = std::move(subs);
    }
    return j;
}

nlohmann::json truth_to_json(const SimulationTruth& truth) {
    nlohmann::json j;
    j["schema"] = kSchemaTruth;
    j["u"] = matrix_to_json(truth.dag.u);
    j["w"] = matrix_to_json(truth.dag.w);
    j["sigma2"] = vector_to_json(truth.dag.sigma2);
    j["v"] = matrix_to_json(truth.v);
    j["supergraph"] = supergraph_to_json(truth.s);
    return j;
}

nlohmann::json trace_to_json(const PeelTrace& trace) {
    nlohmann::json j;
    j["schema"] = kSchemaTrace;
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : trace.rounds) {
        nlohmann::json r;
        r["height"] = round.height;
        r["instrument_leaf_pairs"] = pairs_to_json_1based(round.instrument_leaf_pairs);
        nlohmann::json removed = nlohmann::json::array();
        for (const int jj : round.removed) removed.push_back(jj + 1);
        r["removed"] = std::move(removed);
        r["layer_edges"] = pairs_to_json_1based(round.layer_edges);
        r["skip_relations"] = pairs_to_json_1based(round.skip_relations);
        rounds.push_back(std::move(r));
    }
    j["rounds"] = std::move(rounds);
    return j;
}

nlohmann::json dag_to_json(const WeightedDag& dag) {
    nlohmann::json j;
    j["schema"] = kSchemaDag;
    j["p"] = static_cast<int>(dag.u.rows());
    j["q"] = static_cast<int>(dag.w.rows());
    j["sigma2"] = vector_to_json(dag.sigma2);
    nlohmann::json edges = nlohmann::json::array();
    for (Eigen::Index k = 0; k < dag.u.rows(); ++k) {
        for (Eigen::Index jj = 0; jj < dag.u.cols(); ++jj) {
            if (dag.u(k, jj) != 0.0)
                edges.push_back({{"from", k + 1}, {"to", jj + 1}, {"coefficient", dag.u(k, jj)}});
        }
    }
    j["edges"] = std::move(edges);
    nlohmann::json interventions = nlohmann::json::array();
    for (Eigen::Index l = 0; l < dag.w.rows(); ++l) {
        for (Eigen::Index jj = 0; jj < dag.w.cols(); ++jj) {
            if (dag.w(l, jj) != 0.0)
                interventions.push_back(
                    {{"from", l + 1}, {"to", jj + 1}, {"coefficient", dag.w(l, jj)}});
        }
    }
    j["interventions"] = std::move(interventions);
    return j;
}

nlohmann::json experiment_cells_to_json(const std::vector<ExperimentCell>& cells) {
    nlohmann::json j;
    j["schema"] = kSchemaExperiment;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& cell : cells) {
        nlohmann::json r;
        r["method"] = cell.method == TestMethod::dp_lr ? "dp-lr"
                      : cell.method == TestMethod::lr  ? "lr"
                                                       : "olr";
        r["level"] = cell.level;
        r["reps"] = cell.reps;
        r["rejections"] = cell.rejections;
        r["failures"] = cell.failures;
        r["rejection_rate"] = cell.rejection_rate();
        rows.push_back(std::move(r));
    }
    j["cells"] = std::move(rows);
    return j;
}

std::string experiment_cells_to_csv(const std::vector<ExperimentCell>& cells) {
    std::string out = "method,level,reps,rejections,failures,rejection_rate\n";
    for (const auto& cell : cells) {
        out += cell.method == TestMethod::dp_lr ? "dp-lr" : cell.method == TestMethod::lr ? "lr" : "olr";
        out += ',' + format_double(cell.level);
        out += ',' + std::to_string(cell.reps);
        out += ',' + std::to_string(cell.rejections);
        out += ',' + std::to_string(cell.failures);
        out += ',' + format_double(cell.rejection_rate());
        out += '\n';
    }
    return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ivdag
