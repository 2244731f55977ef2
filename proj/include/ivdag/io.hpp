#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>
#include <vector>

#include "ivdag/graph.hpp"
#include "ivdag/inference.hpp"
#include "ivdag/peeling.hpp"
#include "ivdag/refit.hpp"
#include "ivdag/simulate.hpp"

namespace ivdag {

struct Dataset {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
    std::vector<std::string> x_names;
    std::vector<std::string> y_names;
};

/// Strict numeric CSV reader. Lines starting with '#' are skipped; empty
/// cells are rejected (MissingValue), non-numeric cells raise ParseError
/// naming the row and column, ragged rows raise ParseError.
Eigen::MatrixXd read_matrix_csv(const std::string& path, bool header,
                                std::vector<std::string>* names = nullptr);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>* names = nullptr);

/// Two-file ingestion (responses then interventions); row counts must agree.
Dataset parse_dataset(const std::string& y_path, const std::string& x_path, bool header);

// JSON codecs. Node indices are 1-based on disk, 0-based in memory.
nlohmann::json supergraph_to_json(const SuperGraph& s);
SuperGraph supergraph_from_json(const nlohmann::json& j);

nlohmann::json hypothesis_to_json(const HypothesisSpec& h);
HypothesisSpec hypothesis_from_json(const nlohmann::json& j);

nlohmann::json edge_list_to_json(int p, const std::vector<std::pair<int, int>>& edges);
std::pair<int, std::vector<std::pair<int, int>>> edge_list_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const DpTestReport& report);
nlohmann::json truth_to_json(const SimulationTruth& truth);
nlohmann::json trace_to_json(const PeelTrace& trace);
nlohmann::json dag_to_json(const WeightedDag& dag);
nlohmann::json experiment_cells_to_json(const std::vector<ExperimentCell>& cells);
std::string experiment_cells_to_csv(const std::vector<ExperimentCell>& cells);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace ivdag
