// report.hpp: JSON job configs, deterministic machine-readable reports, and
// report comparison for the command-line front end.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stirap/atom.hpp"
#include "stirap/oracle.hpp"
#include "stirap/passage.hpp"

namespace stirap::cli {

using json = nlohmann::json;

inline constexpr const char* tool_name = "stirap";
inline constexpr const char* tool_version = "1.0.0";

// One fully validated job: a system source plus command and numeric knobs
struct JobConfig {
    std::string command; // decompose | transfer | verify | trajectory | convergence
    json system_spec;    // "system" object as given
    std::optional<Eigen::MatrixXcd> a_basis; // columns override the pair basis
    passage::Direction direction{passage::Direction::a_to_b};
    double rank_tol{linalg::default_rank_tol};
    double rtol{1e-10};
    double atol{1e-10};
    double omega_t{2000.0};
    std::vector<double> omega_t_list{500.0, 1000.0, 2000.0, 4000.0};
    oracle::ProfileShape profile{oracle::ProfileShape::sine_squared};
    std::optional<Eigen::VectorXcd> initial; // meaning depends on the command
    int theta_points{21};
    std::optional<Eigen::VectorXd> theta_grid;
    std::string out_path;
    json echo; // canonical config document the report embeds
};

// Parse and validate a config document; command_from_cli names the subcommand
// and must agree with an optional "command" field in the document
JobConfig parse_config(const json& doc, const std::string& command_from_cli);

// Instantiate the level system named by the config (preset or inline matrices)
atom::LevelSystem build_system(const JobConfig& config);

// Execute the job and assemble the full report document
json run(const JobConfig& config);

// Entrywise numeric diff of two reports of the same command; bookkeeping
// fields (timestamp, version, config echo, hash) are reported but excluded
// from the equality verdict
json compare_reports(const json& r1, const json& r2, double tolerance);

// FNV-1a 64-bit hash of the canonical config serialization
std::string config_hash(const json& echo);

// Round to 12 significant digits; applied to every real number in a report
double round_sig(double x);

// Serialization helpers shared by reports and tests
json complex_matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd complex_matrix_from_json(const json& doc, const std::string& field);
json real_matrix_to_json(const Eigen::MatrixXd& m);
json real_vector_to_json(const Eigen::VectorXd& v);

} // namespace stirap::cli
