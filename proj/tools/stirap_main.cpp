// stirap_main.cpp: Command-line front end: parse a JSON job config, run the
// requested command, and emit a deterministic report. Exit codes: 0 success,
// 2 config error, 3 numeric error (compare adds 1 for differing reports).

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stirap/errors.hpp"
#include "stirap/parallel.hpp"
#include "stirap/report.hpp"

namespace {

using stirap::cli::json;

json error_object(const std::string& kind, const std::string& type,
                  const std::string& message, const std::string& field = "") {
    json err;
    err["kind"] = kind;
    err["type"] = type;
    err["message"] = message;
    if (!field.empty()) err["field"] = field;
    return json{{"error", err}};
}

// 2 for config problems, 3 for numeric/computation problems
int classify(const std::exception& e, json& out) {
    using namespace stirap;
    if (auto* c = dynamic_cast<const cli::config_error*>(&e)) {
        out = error_object("config", "config_error", c->what(), c->field);
        return 2;
    }
    if (auto* c = dynamic_cast<const json::parse_error*>(&e)) {
        out = error_object("config", "parse_error", c->what());
        return 2;
    }
    if (auto* c = dynamic_cast<const conditioning_error*>(&e)) {
        out = error_object("compute", "conditioning_error", c->what());
        out["error"]["eigenvalue_ratio"] = c->eigenvalue_ratio;
        return 3;
    }
    if (dynamic_cast<const degenerate_pair_error*>(&e)) {
        out = error_object("compute", "degenerate_pair_error", e.what());
        return 3;
    }
    if (dynamic_cast<const integration_error*>(&e)) {
        out = error_object("compute", "integration_error", e.what());
        return 3;
    }
    if (dynamic_cast<const propagation_error*>(&e)) {
        out = error_object("compute", "propagation_error", e.what());
        return 3;
    }
    if (dynamic_cast<const consistency_error*>(&e)) {
        out = error_object("compute", "consistency_error", e.what());
        return 3;
    }
    if (dynamic_cast<const unsupported_transition_error*>(&e)) {
        out = error_object("config", "unsupported_transition_error", e.what());
        return 2;
    }
    if (dynamic_cast<const invalid_overlap_error*>(&e)) {
        out = error_object("config", "invalid_overlap_error", e.what());
        return 2;
    }
    if (dynamic_cast<const invalid_input_error*>(&e)) {
        out = error_object("config", "invalid_input_error", e.what());
        return 2;
    }
    out = error_object("compute", "error", e.what());
    return 3;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw stirap::cli::config_error("cannot open '" + path + "'");
    }
    return json::parse(in);
}

void write_report(const json& report, const std::string& out_path) {
    std::string text = report.dump(2);
    text.push_back('\n');
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            throw stirap::cli::config_error("cannot write '" + out_path + "'", "out");
        }
        out << text;
    }
    std::cout << text;
}

struct CliOverrides {
    std::string out_path;
    std::optional<double> rank_tol, rtol, atol, omega_t;
    std::string profile;

    // Fold the flags into the document so the echoed config reflects what ran
    void apply(json& doc) const {
        if (!out_path.empty()) doc["out"] = out_path;
        if (rank_tol) doc["rank_tol"] = *rank_tol;
        if (rtol) doc["rtol"] = *rtol;
        if (atol) doc["atol"] = *atol;
        if (omega_t) doc["omega_t"] = *omega_t;
        if (!profile.empty()) doc["profile"] = profile;
    }
};

int run_job(const std::string& command, const std::string& config_path,
            const CliOverrides& overrides) {
    json doc = load_json(config_path);
    overrides.apply(doc);
    stirap::cli::JobConfig config = stirap::cli::parse_config(doc, command);
    json report = stirap::cli::run(config);
    write_report(report, config.out_path);
    return 0;
}

int run_batch(const std::string& config_path, const CliOverrides& overrides) {
    json doc = load_json(config_path);
    if (!doc.is_object() || !doc.contains("jobs") || !doc["jobs"].is_array() ||
        doc["jobs"].empty()) {
        throw stirap::cli::config_error("batch config needs a nonempty 'jobs' array", "jobs");
    }

    // Validate every job up front so a typo in job 7 fails before job 0 runs
    std::vector<stirap::cli::JobConfig> configs;
    for (std::size_t i = 0; i < doc["jobs"].size(); ++i) {
        json job = doc["jobs"][i];
        const std::string context = "jobs[" + std::to_string(i) + "]";
        if (!job.is_object() || !job.contains("command") || !job["command"].is_string()) {
            throw stirap::cli::config_error("each job needs a 'command'", context);
        }
        overrides.apply(job);
        try {
            stirap::cli::JobConfig config =
                stirap::cli::parse_config(job, job["command"].get<std::string>());
            if (config.out_path.empty()) {
                throw stirap::cli::config_error("batch jobs must name an 'out' path",
                                                context + ".out");
            }
            configs.push_back(std::move(config));
        } catch (const stirap::cli::config_error& e) {
            throw stirap::cli::config_error(std::string(e.what()) + " in " + context,
                                            e.field.empty() ? context : e.field);
        }
    }

    std::vector<json> summaries(configs.size());
    std::vector<int> codes(configs.size(), 0);
    stirap::parallel::parallel_for(int(configs.size()), [&](int i) {
        json entry;
        entry["out"] = configs[std::size_t(i)].out_path;
        entry["command"] = configs[std::size_t(i)].command;
        try {
            json report = stirap::cli::run(configs[std::size_t(i)]);
            std::string text = report.dump(2);
            text.push_back('\n');
            std::ofstream out(configs[std::size_t(i)].out_path);
            if (!out) {
                throw stirap::cli::config_error(
                    "cannot write '" + configs[std::size_t(i)].out_path + "'", "out");
            }
            out << text;
            entry["status"] = "ok";
        } catch (const std::exception& e) {
            json err;
            codes[std::size_t(i)] = classify(e, err);
            entry["status"] = "error";
            entry["error"] = err["error"];
        }
        summaries[std::size_t(i)] = std::move(entry);
    });

    int exit_code = 0;
    for (int c : codes) {
        if (c == 2) exit_code = 2;
        if (c == 3 && exit_code == 0) exit_code = 3;
    }
    json summary;
    summary["tool"] = stirap::cli::tool_name;
    summary["version"] = stirap::cli::tool_version;
    summary["command"] = "batch";
    summary["jobs"] = json(summaries);
    summary["all_ok"] = exit_code == 0;
    std::cout << summary.dump(2) << "\n";
    return exit_code;
}

int run_compare(const std::string& left_path, const std::string& right_path,
                double tolerance, const std::string& out_path) {
    json left = load_json(left_path);
    json right = load_json(right_path);
    json diff = stirap::cli::compare_reports(left, right, tolerance);
    write_report(diff, out_path);
    return diff["equal_within_tolerance"].get<bool>() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adiabatic-passage decomposition, transfer maps, and full "
                 "Schrödinger-equation verification for multi-level systems"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides overrides;
    const std::vector<std::string> job_commands = {"decompose", "transfer", "verify",
                                                   "trajectory", "convergence"};
    for (const std::string& name : job_commands) {
        CLI::App* sub = app.add_subcommand(name, name + " job from a JSON config");
        sub->add_option("--config", config_path, "JSON job config path")->required();
        sub->add_option("--out", overrides.out_path, "report output path");
        sub->add_option("--rank-tol", overrides.rank_tol, "relative rank cutoff");
        sub->add_option("--rtol", overrides.rtol, "ODE relative tolerance");
        sub->add_option("--atol", overrides.atol, "ODE absolute tolerance");
        sub->add_option("--omega-t", overrides.omega_t, "sweep length Omega*T");
        sub->add_option("--profile", overrides.profile, "sweep profile: sine2 | linear");
    }

    CLI::App* batch = app.add_subcommand("batch", "run many jobs concurrently");
    batch->add_option("--config", config_path, "JSON batch config with a 'jobs' array")
        ->required();

    std::string compare_left, compare_right;
    double compare_tolerance = 0.0;
    CLI::App* compare = app.add_subcommand("compare", "diff two report files");
    compare->add_option("left", compare_left, "first report path")->required();
    compare->add_option("right", compare_right, "second report path")->required();
    compare->add_option("--tolerance", compare_tolerance, "numeric equality tolerance");
    compare->add_option("--out", overrides.out_path, "diff output path");

    CLI11_PARSE(app, argc, argv);

    try {
        for (const std::string& name : job_commands) {
            if (app.got_subcommand(name)) {
                return run_job(name, config_path, overrides);
            }
        }
        if (app.got_subcommand("batch")) {
            return run_batch(config_path, overrides);
        }
        return run_compare(compare_left, compare_right, compare_tolerance,
                           overrides.out_path);
    } catch (const std::exception& e) {
        json err;
        int code = classify(e, err);
        std::cout << err.dump(2) << "\n";
        return code;
    }
}
