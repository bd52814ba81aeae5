#include "stirap/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <map>
#include <set>

#include "stirap/parallel.hpp"

namespace stirap::cli {

namespace {

constexpr double half_pi = 1.57079632679489661923;

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

json complex_to_json(const std::complex<double>& z) {
    return json::array({round_sig(z.real()), round_sig(z.imag())});
}

std::complex<double> complex_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw config_error("complex values must be [re, im] number pairs", field);
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

const json& require(const json& doc, const std::string& key, const std::string& context) {
    auto it = doc.find(key);
    if (it == doc.end()) {
        throw config_error("missing required field '" + key + "'", context + key);
    }
    return *it;
}

double require_number(const json& doc, const std::string& key, const std::string& context) {
    const json& v = require(doc, key, context);
    if (!v.is_number()) {
        throw config_error("field '" + key + "' must be a number", context + key);
    }
    return v.get<double>();
}

void reject_unknown_keys(const json& doc, const std::set<std::string>& allowed,
                         const std::string& context) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw config_error("unknown field '" + it.key() + "'", context + it.key());
        }
    }
}

atom::Polarization parse_polarization(const json& j, const std::string& field) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "x") return atom::Polarization::linear_x();
        if (s == "y") return atom::Polarization::linear_y();
        if (s == "z") return atom::Polarization::pi();
        if (s == "e+1") return atom::Polarization::sigma_plus();
        if (s == "e-1") return atom::Polarization::sigma_minus();
        throw config_error("polarization '" + s + "' not recognized (x, y, z, e+1, e-1)", field);
    }
    if (j.is_array() && j.size() == 3) {
        Eigen::Vector3cd sph;
        for (int i = 0; i < 3; ++i) {
            sph(i) = complex_from_json(j[std::size_t(i)], field);
        }
        try {
            return atom::Polarization(sph);
        } catch (const std::invalid_argument& e) {
            throw config_error(e.what(), field);
        }
    }
    throw config_error("polarization must be a name or 3 spherical components", field);
}

Eigen::VectorXcd parse_complex_vector(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        throw config_error("field must be a nonempty array of [re, im] pairs", field);
    }
    Eigen::VectorXcd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(Eigen::Index(i)) = complex_from_json(j[i], field);
    }
    return v;
}

std::string direction_name(passage::Direction d) {
    return d == passage::Direction::a_to_b ? "ab" : "ba";
}

std::string profile_name(oracle::ProfileShape p) {
    return p == oracle::ProfileShape::sine_squared ? "sine2" : "linear";
}

json labels_to_json(const std::vector<std::string>& labels) {
    return json(labels);
}

json system_section(const atom::LevelSystem& system) {
    json out;
    out["dim_a"] = system.dim_a();
    out["dim_b"] = system.dim_b();
    out["dim_e"] = system.dim_e();
    out["labels_a"] = labels_to_json(system.labels_a);
    out["labels_b"] = labels_to_json(system.labels_b);
    out["labels_e"] = labels_to_json(system.labels_e);
    return out;
}

json decomposition_section(const decomp::Decomposition& d) {
    json dims;
    dims["a"] = {{"lambda", d.a_lambda.dim()}, {"dark", d.a_dark.dim()},
                 {"bright", d.a_bright.dim()}};
    dims["b"] = {{"lambda", d.b_lambda.dim()}, {"dark", d.b_dark.dim()},
                 {"bright", d.b_bright.dim()}};
    dims["e"] = {{"dark", d.e_dark.dim()}, {"coupled", d.e_coupled.dim()}};

    json out;
    out["dims"] = dims;
    out["a_lambda"] = complex_matrix_to_json(d.a_lambda.vectors);
    out["a_dark"] = complex_matrix_to_json(d.a_dark.vectors);
    out["a_bright"] = complex_matrix_to_json(d.a_bright.vectors);
    out["b_lambda"] = complex_matrix_to_json(d.b_lambda.vectors);
    out["b_dark"] = complex_matrix_to_json(d.b_dark.vectors);
    out["b_bright"] = complex_matrix_to_json(d.b_bright.vectors);
    out["e_dark"] = complex_matrix_to_json(d.e_dark.vectors);
    out["e_coupled"] = complex_matrix_to_json(d.e_coupled.vectors);
    out["mapping"] = complex_matrix_to_json(d.M);
    return out;
}

json pairs_section(const decomp::LambdaBasis& basis) {
    json out;
    json lambdas = json::array();
    for (Eigen::Index j = 0; j < basis.n_pairs(); ++j) {
        lambdas.push_back(round_sig(basis.lambdas(j)));
    }
    out["lambdas"] = lambdas;
    out["a_states"] = complex_matrix_to_json(basis.a_states);
    out["b_states"] = complex_matrix_to_json(basis.b_states);
    out["b_gram"] = complex_matrix_to_json(basis.b_gram);
    return out;
}

json transfer_section(const passage::TransferMap& map, const decomp::LambdaBasis& basis) {
    json out;
    out["direction"] = direction_name(map.direction);
    out["c_final"] = complex_matrix_to_json(map.c_final);
    out["u_ortho"] = complex_matrix_to_json(map.u_ortho);
    out["ortho_b_basis"] = complex_matrix_to_json(map.ortho_b_basis);
    out["unitarity_defect"] = round_sig(map.unitarity_defect);

    if (basis.n_pairs() == 2 && map.direction == passage::Direction::a_to_b &&
        std::abs(basis.b_gram(0, 1).imag()) <= 1e-10) {
        try {
            auto closed = passage::analytic_two_level(basis.lambdas(0), basis.lambdas(1),
                                                      basis.b_gram(0, 1).real());
            if (closed) {
                json analytic;
                analytic["alpha"] = round_sig(closed->alpha);
                analytic["beta"] = round_sig(closed->beta);
                analytic["max_deviation"] = round_sig(
                    (map.c_final - closed->c_final).cwiseAbs().maxCoeff());
                out["analytic"] = analytic;
            }
        } catch (const invalid_overlap_error&) {
            // no closed form at |z| >= 1; the integrated map stands alone
        }
    }
    return out;
}

json verification_section(const atom::LevelSystem& system, const decomp::Decomposition& d,
                          const decomp::LambdaBasis& basis, const JobConfig& config) {
    json out;

    decomp::BrightReport bright = decomp::verify_bright(d, system, config.rank_tol);
    json bright_a = json::array();
    for (const auto& w : bright.a_witnesses) {
        json entry;
        entry["overlap"] = round_sig(w.overlap);
        entry["state"] = complex_matrix_to_json(w.state);
        entry["excited_witness"] = complex_matrix_to_json(w.excited_witness);
        bright_a.push_back(entry);
    }
    json bright_b = json::array();
    for (const auto& c : bright.b_certificates) {
        json entry;
        entry["rank_image"] = c.rank_image;
        entry["rank_augmented"] = c.rank_augmented;
        entry["state"] = complex_matrix_to_json(c.state);
        bright_b.push_back(entry);
    }
    out["bright_a"] = bright_a;
    out["bright_b"] = bright_b;

    double residual_max = 0.0;
    for (int g = 0; g < 21; ++g) {
        double theta = half_pi * double(g) / 20.0;
        passage::DarkFrame frame = passage::dark_frame(basis, theta);
        for (Eigen::Index j = 0; j < basis.n_pairs(); ++j) {
            double r = passage::darkness_residual(system, frame,
                                                  passage::dark_state(frame, j), 1.0);
            residual_max = std::max(residual_max, r);
        }
    }
    out["darkness_residual_max"] = round_sig(residual_max);

    passage::TransferMap forward =
        passage::integrate_transfer(basis, passage::Direction::a_to_b, config.rtol, config.atol);
    passage::TransferMap backward =
        passage::integrate_transfer(basis, passage::Direction::b_to_a, config.rtol, config.atol);
    Eigen::MatrixXcd round_trip = backward.c_final * forward.c_final;
    round_trip -= Eigen::MatrixXcd::Identity(basis.n_pairs(), basis.n_pairs());
    out["round_trip_defect"] = round_sig(round_trip.cwiseAbs().maxCoeff());

    const Eigen::Index da = system.dim_a(), n = basis.n_pairs();
    std::vector<json> per_pair(static_cast<std::size_t>(n));
    parallel::parallel_for(int(n), [&](int j) {
        Eigen::VectorXcd initial = Eigen::VectorXcd::Zero(system.dim_total());
        initial.head(da) = basis.a_states.col(j);
        Eigen::VectorXcd predicted = oracle::predict_final(
            system, d, basis, passage::Direction::a_to_b, initial, config.rtol, config.atol);
        oracle::SweepProfile profile{config.profile, config.omega_t,
                                     passage::Direction::a_to_b};
        oracle::SweepResult sweep = oracle::evolve(system, profile, 1.0, initial, {}, &predicted);
        json entry;
        entry["fidelity"] = round_sig(*sweep.fidelity_vs_prediction);
        entry["norm_drift"] = round_sig(sweep.norm_drift);
        entry["max_excited_population"] = round_sig(sweep.max_excited_population);
        per_pair[std::size_t(j)] = entry;
    });

    json oracle_block;
    oracle_block["omega_t"] = round_sig(config.omega_t);
    oracle_block["profile"] = profile_name(config.profile);
    oracle_block["per_pair"] = json(per_pair);
    out["oracle"] = oracle_block;
    return out;
}

json trajectory_section(const passage::Trajectory& traj) {
    json out;
    out["theta"] = real_vector_to_json(traj.thetas);
    out["coefficients"] = complex_matrix_to_json(traj.coefficients);
    out["pop_a"] = real_matrix_to_json(traj.pop_a);
    out["pop_b"] = real_matrix_to_json(traj.pop_b);
    return out;
}

json convergence_section(const oracle::ConvergenceResult& res) {
    json points = json::array();
    for (const auto& p : res.points) {
        points.push_back(json::array({round_sig(p.omega_t), round_sig(p.infidelity)}));
    }
    json out;
    out["points"] = points;
    out["trend_slope"] = round_sig(res.trend_slope);
    return out;
}

} // namespace

double round_sig(double x) {
    if (!std::isfinite(x)) return x;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::strtod(buf, nullptr);
}

std::string config_hash(const json& echo) {
    std::string dump = echo.dump();
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : dump) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

json complex_matrix_to_json(const Eigen::MatrixXcd& m) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            data.push_back(complex_to_json(m(r, c)));
        }
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXcd complex_matrix_from_json(const json& doc, const std::string& field) {
    if (!doc.is_object()) {
        throw config_error("matrix must be an object with rows, cols, data", field);
    }
    reject_unknown_keys(doc, {"rows", "cols", "data"}, field + ".");
    auto rows = Eigen::Index(require_number(doc, "rows", field + "."));
    auto cols = Eigen::Index(require_number(doc, "cols", field + "."));
    const json& data = require(doc, "data", field + ".");
    if (rows <= 0 || cols < 0 || !data.is_array() ||
        data.size() != std::size_t(rows * cols)) {
        throw config_error("matrix shape disagrees with data length", field);
    }
    Eigen::MatrixXcd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = complex_from_json(data[k++], field + ".data");
        }
    }
    return m;
}

json real_matrix_to_json(const Eigen::MatrixXd& m) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            data.push_back(round_sig(m(r, c)));
        }
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

json real_vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(round_sig(v(i)));
    }
    return out;
}

JobConfig parse_config(const json& doc, const std::string& command_from_cli) {
    if (!doc.is_object()) {
        throw config_error("config document must be a JSON object");
    }
    reject_unknown_keys(doc,
                        {"command", "system", "a_basis", "direction", "rank_tol", "rtol",
                         "atol", "omega_t", "omega_t_list", "profile", "initial",
                         "theta_points", "theta_grid", "out"},
                        "");

    JobConfig config;
    config.command = command_from_cli;
    if (doc.contains("command")) {
        if (!doc["command"].is_string() || doc["command"].get<std::string>() != command_from_cli) {
            throw config_error("config names command '" +
                                   doc["command"].dump() + "' but '" + command_from_cli +
                                   "' was invoked",
                               "command");
        }
    }

    static const std::set<std::string> known_commands{"decompose", "transfer", "verify",
                                                      "trajectory", "convergence"};
    if (!known_commands.count(config.command)) {
        throw config_error("unknown command '" + config.command + "'", "command");
    }

    config.system_spec = require(doc, "system", "");
    if (!config.system_spec.is_object()) {
        throw config_error("'system' must be an object", "system");
    }

    if (doc.contains("a_basis")) {
        Eigen::MatrixXcd basis = complex_matrix_from_json(doc["a_basis"], "a_basis");
        if (linalg::orthonormality_defect(basis) > linalg::tau_orth) {
            throw config_error("a_basis columns must be orthonormal", "a_basis");
        }
        config.a_basis = std::move(basis);
    }
    if (doc.contains("direction")) {
        std::string d = doc["direction"].is_string() ? doc["direction"].get<std::string>() : "";
        if (d == "ab") {
            config.direction = passage::Direction::a_to_b;
        } else if (d == "ba") {
            config.direction = passage::Direction::b_to_a;
        } else {
            throw config_error("direction must be 'ab' or 'ba'", "direction");
        }
    }
    if (doc.contains("rank_tol")) {
        config.rank_tol = require_number(doc, "rank_tol", "");
        if (!(config.rank_tol > 0.0 && config.rank_tol < 1.0)) {
            throw config_error("rank_tol must lie in (0, 1)", "rank_tol");
        }
    }
    auto ode_tol = [&](const char* key, double& slot) {
        if (doc.contains(key)) {
            slot = require_number(doc, key, "");
            if (!(slot > 0.0 && slot <= 1e-2)) {
                throw config_error(std::string(key) + " must lie in (0, 1e-2]", key);
            }
        }
    };
    ode_tol("rtol", config.rtol);
    ode_tol("atol", config.atol);
    if (doc.contains("omega_t")) {
        config.omega_t = require_number(doc, "omega_t", "");
        if (!(config.omega_t > 0.0)) {
            throw config_error("omega_t must be positive", "omega_t");
        }
    }
    if (doc.contains("omega_t_list")) {
        const json& list = doc["omega_t_list"];
        if (!list.is_array() || list.empty()) {
            throw config_error("omega_t_list must be a nonempty array", "omega_t_list");
        }
        config.omega_t_list.clear();
        for (const auto& v : list) {
            if (!v.is_number() || !(v.get<double>() > 0.0)) {
                throw config_error("omega_t_list entries must be positive numbers",
                                   "omega_t_list");
            }
            if (!config.omega_t_list.empty() && v.get<double>() <= config.omega_t_list.back()) {
                throw config_error("omega_t_list must increase strictly", "omega_t_list");
            }
            config.omega_t_list.push_back(v.get<double>());
        }
    }
    if (doc.contains("profile")) {
        std::string p = doc["profile"].is_string() ? doc["profile"].get<std::string>() : "";
        if (p == "sine2") {
            config.profile = oracle::ProfileShape::sine_squared;
        } else if (p == "linear") {
            config.profile = oracle::ProfileShape::linear;
        } else {
            throw config_error("profile must be 'sine2' or 'linear'", "profile");
        }
    }
    if (doc.contains("initial")) {
        config.initial = parse_complex_vector(doc["initial"], "initial");
    }
    if (doc.contains("theta_points")) {
        const json& v = doc["theta_points"];
        if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 100000) {
            throw config_error("theta_points must be an integer in [1, 100000]",
                               "theta_points");
        }
        config.theta_points = v.get<int>();
    }
    if (doc.contains("theta_grid")) {
        const json& g = doc["theta_grid"];
        if (!g.is_array() || g.empty()) {
            throw config_error("theta_grid must be a nonempty array", "theta_grid");
        }
        Eigen::VectorXd grid(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g[i].is_number()) {
                throw config_error("theta_grid entries must be numbers", "theta_grid");
            }
            grid(Eigen::Index(i)) = g[i].get<double>();
        }
        config.theta_grid = std::move(grid);
    }
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) {
            throw config_error("out must be a string path", "out");
        }
        config.out_path = doc["out"].get<std::string>();
    }

    config.echo = doc;
    return config;
}

atom::LevelSystem build_system(const JobConfig& config) {
    const json& spec = config.system_spec;
    if (spec.contains("preset")) {
        std::string preset = spec["preset"].is_string() ? spec["preset"].get<std::string>() : "";
        if (preset == "toy") {
            reject_unknown_keys(spec, {"preset"}, "system.");
            return atom::toy_model();
        }
        if (preset == "cesium") {
            reject_unknown_keys(spec, {"preset", "excited_f", "polarization_3", "polarization_4"},
                                "system.");
            double ef = require_number(spec, "excited_f", "system.");
            if (ef != 3.0 && ef != 4.0) {
                throw config_error("excited_f must be 3 or 4", "system.excited_f");
            }
            atom::Polarization p3 =
                parse_polarization(require(spec, "polarization_3", "system."),
                                   "system.polarization_3");
            atom::Polarization p4 =
                parse_polarization(require(spec, "polarization_4", "system."),
                                   "system.polarization_4");
            return atom::cesium_system(int(ef), p3, p4);
        }
        throw config_error("preset must be 'toy' or 'cesium'", "system.preset");
    }

    reject_unknown_keys(spec, {"labels_a", "labels_b", "labels_e", "a_a", "a_b"}, "system.");
    Eigen::MatrixXcd a_a = complex_matrix_from_json(require(spec, "a_a", "system."),
                                                    "system.a_a");
    Eigen::MatrixXcd a_b = complex_matrix_from_json(require(spec, "a_b", "system."),
                                                    "system.a_b");
    auto labels = [&](const char* key, Eigen::Index dim, char prefix) {
        std::vector<std::string> out;
        if (spec.contains(key)) {
            const json& arr = spec[key];
            if (!arr.is_array()) {
                throw config_error(std::string(key) + " must be an array of strings",
                                   std::string("system.") + key);
            }
            for (const auto& v : arr) {
                if (!v.is_string()) {
                    throw config_error(std::string(key) + " entries must be strings",
                                       std::string("system.") + key);
                }
                out.push_back(v.get<std::string>());
            }
        } else {
            for (Eigen::Index i = 0; i < dim; ++i) {
                out.push_back(std::string(1, prefix) + std::to_string(i));
            }
        }
        return out;
    };
    try {
        return atom::LevelSystem(labels("labels_a", a_a.rows(), 'a'),
                                 labels("labels_b", a_b.rows(), 'b'),
                                 labels("labels_e", a_a.cols(), 'e'), std::move(a_a),
                                 std::move(a_b));
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what(), "system");
    }
}

json run(const JobConfig& config) {
    atom::LevelSystem system = build_system(config);

    json report;
    report["tool"] = tool_name;
    report["version"] = tool_version;
    report["command"] = config.command;
    report["timestamp"] = iso_timestamp();
    report["config"] = config.echo;
    report["config_hash"] = config_hash(config.echo);
    report["system"] = system_section(system);

    if (config.a_basis && config.a_basis->rows() != system.dim_a()) {
        throw config_error("a_basis vectors live in the wrong space", "a_basis");
    }

    if (config.command == "decompose") {
        decomp::Decomposition d = decomp::decompose(system, config.rank_tol);
        report["decomposition"] = decomposition_section(d);
        return report;
    }

    if (config.command == "convergence") {
        decomp::Decomposition d = decomp::decompose(system, config.rank_tol);
        decomp::LambdaBasis basis = decomp::lambda_pairs(d, system);
        Eigen::VectorXcd initial = Eigen::VectorXcd::Zero(system.dim_total());
        bool forward = config.direction == passage::Direction::a_to_b;
        Eigen::Index dim = forward ? system.dim_a() : system.dim_b();
        Eigen::Index offset = forward ? 0 : system.dim_a();
        if (config.initial) {
            if (config.initial->size() != dim) {
                throw config_error("initial must hold one amplitude per source state",
                                   "initial");
            }
            initial.segment(offset, dim) = *config.initial;
            initial /= initial.norm();
        } else {
            initial.segment(offset, dim) =
                forward ? basis.a_states.col(0) : basis.b_states.col(0);
        }
        oracle::ConvergenceResult res =
            oracle::convergence_study(system, initial, config.omega_t_list, config.profile,
                                      config.direction, config.rank_tol, config.rtol,
                                      config.atol);
        report["convergence"] = convergence_section(res);
        return report;
    }

    decomp::Decomposition d = decomp::decompose(system, config.rank_tol);
    std::optional<Eigen::MatrixXcd> pair_basis = config.a_basis;
    if (!pair_basis && config.system_spec.contains("preset")) {
        pair_basis = decomp::bare_aligned_basis(d);
    }
    decomp::LambdaBasis basis = decomp::lambda_pairs(d, system, pair_basis);
    report["decomposition"] = decomposition_section(d);
    report["pairs"] = pairs_section(basis);

    if (config.command == "transfer") {
        passage::TransferMap map =
            passage::integrate_transfer(basis, config.direction, config.rtol, config.atol);
        report["transfer"] = transfer_section(map, basis);
    } else if (config.command == "verify") {
        passage::TransferMap map =
            passage::integrate_transfer(basis, config.direction, config.rtol, config.atol);
        report["transfer"] = transfer_section(map, basis);
        report["verification"] = verification_section(system, d, basis, config);
    } else if (config.command == "trajectory") {
        Eigen::VectorXcd initial_c;
        if (config.initial) {
            if (config.initial->size() != basis.n_pairs()) {
                throw config_error("initial must hold one coefficient per pair", "initial");
            }
            initial_c = *config.initial;
        } else {
            initial_c = Eigen::VectorXcd::Zero(basis.n_pairs());
            initial_c(0) = 1.0;
        }
        Eigen::VectorXd grid;
        if (config.theta_grid) {
            grid = *config.theta_grid;
        } else {
            grid = Eigen::VectorXd::LinSpaced(config.theta_points, 0.0, half_pi);
        }
        passage::Trajectory traj =
            passage::trajectory(basis, initial_c, grid, config.rtol, config.atol);
        report["trajectory"] = trajectory_section(traj);
    }
    return report;
}

namespace {

struct DiffAccumulator {
    double tolerance{0.0};
    json differences = json::array();
    std::map<std::string, std::pair<double, long>> sections; // max delta, count
    bool payload_equal{true};

    static bool excluded_section(const std::string& s) {
        return s == "timestamp" || s == "version" || s == "tool" || s == "config" ||
               s == "config_hash" || s == "command";
    }

    void record(const std::string& path, const std::string& section, const json& left,
                const json& right, std::optional<double> delta) {
        bool counted = !excluded_section(section);
        if (delta) {
            auto& slot = sections[section];
            slot.first = std::max(slot.first, *delta);
            if (*delta <= tolerance) return; // within tolerance: track max only
            slot.second += 1;
        }
        if (counted) payload_equal = false;
        if (differences.size() < 200) {
            json entry;
            entry["path"] = path;
            entry["left"] = left;
            entry["right"] = right;
            if (delta) entry["delta"] = round_sig(*delta);
            differences.push_back(entry);
        }
    }
};

void diff_walk(const std::string& path, const std::string& section, const json& a,
               const json& b, DiffAccumulator& acc) {
    // Echoed inputs may legitimately differ in shape; only results are diffed
    if (section == "timestamp" || section == "config" || section == "config_hash") return;

    if (a.is_object() && b.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) {
                throw config_error("reports disagree in structure at " + path + "/" + it.key());
            }
        }
        for (auto it = b.begin(); it != b.end(); ++it) {
            if (!a.contains(it.key())) {
                throw config_error("reports disagree in structure at " + path + "/" + it.key());
            }
        }
        for (auto it = a.begin(); it != a.end(); ++it) {
            std::string child = path + "/" + it.key();
            diff_walk(child, section.empty() ? it.key() : section, it.value(),
                      b[it.key()], acc);
        }
        return;
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) {
            throw config_error("report shapes disagree at " + path);
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            diff_walk(path + "/" + std::to_string(i), section, a[i], b[i], acc);
        }
        return;
    }
    if (a.is_number() && b.is_number()) {
        double delta = std::abs(a.get<double>() - b.get<double>());
        acc.record(path, section, a, b, delta);
        return;
    }
    if (a.type() != b.type()) {
        throw config_error("report value types disagree at " + path);
    }
    if (a != b) {
        acc.record(path, section, a, b, std::nullopt);
    }
}

} // namespace

json compare_reports(const json& r1, const json& r2, double tolerance) {
    if (!r1.is_object() || !r2.is_object()) {
        throw config_error("reports must be JSON objects");
    }
    if (!r1.contains("command") || !r2.contains("command") ||
        r1["command"] != r2["command"]) {
        throw config_error("reports were produced by different commands", "command");
    }
    if (!(tolerance >= 0.0)) {
        throw config_error("comparison tolerance must be non-negative");
    }

    DiffAccumulator acc;
    acc.tolerance = tolerance;
    diff_walk("", "", r1, r2, acc);

    json sections;
    for (const auto& [name, stat] : acc.sections) {
        sections[name] = {{"max_delta", round_sig(stat.first)},
                          {"differences", stat.second}};
    }
    json out;
    out["tool"] = tool_name;
    out["version"] = tool_version;
    out["command"] = "compare";
    out["compared_command"] = r1["command"];
    out["tolerance"] = tolerance;
    out["sections"] = sections;
    out["differences"] = acc.differences;
    out["equal_within_tolerance"] = acc.payload_equal;
    return out;
}

} // namespace stirap::cli
