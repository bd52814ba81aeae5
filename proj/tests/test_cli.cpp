#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

#include <json.hpp>

using json = nlohmann::json;

namespace {

struct RunResult {
    int exit_code{-1};
    std::string output;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(STIRAP_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {};
    std::string out;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) {
        out.append(buf, got);
    }
    int status = pclose(pipe);
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = std::move(out);
    return r;
}

std::string scratch_dir() {
    static std::string dir = [] {
        std::string base = "/tmp/stirap_cli_test_XXXXXX";
        std::string owned(base);
        char* made = mkdtemp(owned.data());
        return std::string(made ? made : "/tmp");
    }();
    return dir;
}

std::string write_config(const std::string& name, const json& doc) {
    std::string path = scratch_dir() + "/" + name;
    std::ofstream f(path);
    f << doc.dump(2) << "\n";
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json toy_config(const std::string& command) {
    json doc;
    doc["command"] = command;
    doc["system"] = {{"preset", "toy"}};
    return doc;
}

json cesium_config(const std::string& command, int excited_f, const std::string& pol3,
                   const std::string& pol4) {
    json doc;
    doc["command"] = command;
    doc["system"] = {{"preset", "cesium"},
                     {"excited_f", excited_f},
                     {"polarization_3", pol3},
                     {"polarization_4", pol4}};
    return doc;
}

} // namespace

TEST_CASE("decompose reports the demo subspace dimensions") {
    auto path = write_config("toy_decompose.json", toy_config("decompose"));
    auto r = run_cli("decompose --config " + path);
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);
    CHECK(report["tool"] == "stirap");
    CHECK(report["command"] == "decompose");
    CHECK(report["system"]["dim_a"] == 3);
    auto dims = report["decomposition"]["dims"];
    CHECK(dims["a"]["lambda"] == 2);
    CHECK(dims["a"]["dark"] == 1);
    CHECK(dims["a"]["bright"] == 0);
    CHECK(dims["b"]["lambda"] == 2);
    CHECK(dims["b"]["dark"] == 0);
    CHECK(dims["b"]["bright"] == 1);
    CHECK(report.contains("config_hash"));
    CHECK_FALSE(report.contains("pairs"));
}

TEST_CASE("transfer reports the closed-form coefficients for the demo system") {
    auto path = write_config("toy_transfer.json", toy_config("transfer"));
    auto r = run_cli("transfer --config " + path);
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);
    auto transfer = report["transfer"];
    CHECK(transfer["direction"] == "ab");
    CHECK(transfer["unitarity_defect"].get<double>() <= 1e-8);
    REQUIRE(transfer.contains("analytic"));
    CHECK(std::abs(transfer["analytic"]["alpha"].get<double>() - 1.1153550716) <= 1e-8);
    CHECK(std::abs(transfer["analytic"]["beta"].get<double>() + 0.2988584907) <= 1e-8);
    CHECK(transfer["analytic"]["max_deviation"].get<double>() <= 1e-6);

    auto lambdas = report["pairs"]["lambdas"];
    REQUIRE(lambdas.size() == 2);
    for (const auto& l : lambdas) {
        CHECK(std::abs(l.get<double>() - std::sqrt(2.0)) <= 1e-9);
    }
}

TEST_CASE("cesium dimension tables for all five standard configurations") {
    struct Case {
        int excited_f;
        const char* pol3;
        const char* pol4;
        int a[3]; // lambda, dark, bright
        int b[3];
    };
    const Case cases[] = {
        {3, "z", "z", {6, 1, 0}, {6, 2, 1}},
        {3, "z", "x", {6, 1, 0}, {6, 2, 1}},
        {4, "z", "z", {6, 0, 1}, {6, 1, 2}},
        {4, "x", "z", {6, 0, 1}, {6, 1, 2}},
        {4, "e+1", "e+1", {7, 0, 0}, {7, 1, 1}},
    };
    for (const auto& c : cases) {
        auto doc = cesium_config("decompose", c.excited_f, c.pol3, c.pol4);
        auto path = write_config("cesium_dims.json", doc);
        auto r = run_cli("decompose --config " + path);
        REQUIRE(r.exit_code == 0);
        json report = json::parse(r.output);
        auto dims = report["decomposition"]["dims"];
        CHECK(dims["a"]["lambda"] == c.a[0]);
        CHECK(dims["a"]["dark"] == c.a[1]);
        CHECK(dims["a"]["bright"] == c.a[2]);
        CHECK(dims["b"]["lambda"] == c.b[0]);
        CHECK(dims["b"]["dark"] == c.b[1]);
        CHECK(dims["b"]["bright"] == c.b[2]);
    }
}

TEST_CASE("transfer accepts an explicit a-side basis and reports its couplings") {
    // crossed linear light, excited F' = 4: published pair order
    //   |3,3>, |3,-3>, |3,2>, |3,-2>, |3,0>, (|3,1>+|3,-1>)/sqrt(2)
    auto doc = cesium_config("transfer", 4, "x", "z");
    double rt2 = 1.0 / std::sqrt(2.0);
    auto column = [](std::initializer_list<std::pair<int, double>> entries) {
        std::vector<std::array<double, 2>> col(7, std::array<double, 2>{0.0, 0.0});
        for (auto [m, w] : entries) col[std::size_t(m + 3)] = {w, 0.0};
        return col;
    };
    std::vector<std::vector<std::array<double, 2>>> cols = {
        column({{3, 1.0}}),  column({{-3, 1.0}}), column({{2, 1.0}}),
        column({{-2, 1.0}}), column({{0, 1.0}}),  column({{1, rt2}, {-1, rt2}}),
    };
    json data = json::array();
    for (int row = 0; row < 7; ++row) {
        for (int c = 0; c < 6; ++c) {
            data.push_back(json::array({cols[std::size_t(c)][std::size_t(row)][0],
                                        cols[std::size_t(c)][std::size_t(row)][1]}));
        }
    }
    doc["a_basis"] = {{"rows", 7}, {"cols", 6}, {"data", data}};

    auto path = write_config("vb2_transfer.json", doc);
    auto r = run_cli("transfer --config " + path);
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);

    const double expected[] = {5.0 / 7.0,
                               5.0 / 7.0,
                               std::sqrt(200.0 / 147.0),
                               std::sqrt(200.0 / 147.0),
                               std::sqrt(250.0 / 49.0),
                               std::sqrt(375.0 / 392.0)};
    auto lambdas = report["pairs"]["lambdas"];
    REQUIRE(lambdas.size() == 6);
    for (int j = 0; j < 6; ++j) {
        CHECK(std::abs(lambdas[std::size_t(j)].get<double>() - expected[j]) <= 1e-9);
    }
    CHECK(report["transfer"]["unitarity_defect"].get<double>() <= 1e-8);
}

TEST_CASE("cesium presets report quoted couplings without an explicit basis") {
    auto doc = cesium_config("transfer", 4, "x", "z");
    auto path = write_config("vb2_default.json", doc);
    auto r = run_cli("transfer --config " + path);
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);

    auto lambdas = report["pairs"]["lambdas"];
    REQUIRE(lambdas.size() == 6);
    std::vector<double> got;
    for (const auto& v : lambdas) got.push_back(v.get<double>());
    std::sort(got.begin(), got.end());
    std::vector<double> expected = {5.0 / 7.0,
                                    5.0 / 7.0,
                                    std::sqrt(375.0 / 392.0),
                                    std::sqrt(200.0 / 147.0),
                                    std::sqrt(200.0 / 147.0),
                                    std::sqrt(250.0 / 49.0)};
    std::sort(expected.begin(), expected.end());
    for (int j = 0; j < 6; ++j) {
        CHECK(std::abs(got[std::size_t(j)] - expected[std::size_t(j)]) <= 1e-9);
    }
}

TEST_CASE("config errors name the offending field and exit with code 2") {
    json doc;
    doc["command"] = "decompose";
    doc["system"] = {{"preset", "cesium"}, {"excited_f", 3}, {"polarization_3", "z"}};
    auto path = write_config("missing_pol.json", doc);
    auto r = run_cli("decompose --config " + path);
    CHECK(r.exit_code == 2);
    json err = json::parse(r.output);
    CHECK(err["error"]["kind"] == "config");
    CHECK(err["error"]["field"].get<std::string>().find("polarization_4") != std::string::npos);
}

TEST_CASE("unknown keys, malformed JSON, and missing files exit with code 2") {
    auto doc = toy_config("decompose");
    doc["surprise"] = 1;
    auto path = write_config("unknown_key.json", doc);
    auto r = run_cli("decompose --config " + path);
    CHECK(r.exit_code == 2);
    json err = json::parse(r.output);
    CHECK(err["error"]["field"].get<std::string>().find("surprise") != std::string::npos);

    std::string garbled = scratch_dir() + "/garbled.json";
    std::ofstream(garbled) << "{ not json";
    CHECK(run_cli("decompose --config " + garbled).exit_code == 2);

    CHECK(run_cli("decompose --config " + scratch_dir() + "/nope.json").exit_code == 2);

    // command embedded in the config must match the subcommand
    auto mismatched = write_config("mismatch.json", toy_config("transfer"));
    CHECK(run_cli("decompose --config " + mismatched).exit_code == 2);
}

TEST_CASE("reports are reproducible and compare clean") {
    auto path = write_config("repro.json", toy_config("verify"));
    auto run1 = run_cli("verify --config " + path);
    auto run2 = run_cli("verify --config " + path);
    REQUIRE(run1.exit_code == 0);
    REQUIRE(run2.exit_code == 0);

    json r1 = json::parse(run1.output);
    json r2 = json::parse(run2.output);
    r1.erase("timestamp");
    r2.erase("timestamp");
    CHECK(r1 == r2);

    std::string out1 = scratch_dir() + "/repro1.json";
    std::string out2 = scratch_dir() + "/repro2.json";
    std::ofstream(out1) << run1.output;
    std::ofstream(out2) << run2.output;
    auto cmp = run_cli("compare " + out1 + " " + out2);
    CHECK(cmp.exit_code == 0);
    json diff = json::parse(cmp.output);
    CHECK(diff["equal_within_tolerance"] == true);
    CHECK(diff["differences"].empty());
}

TEST_CASE("compare rejects reports of different commands and flags real differences") {
    auto dpath = write_config("cmp_d.json", toy_config("decompose"));
    auto tpath = write_config("cmp_t.json", toy_config("transfer"));
    std::string outd = scratch_dir() + "/cmp_d_out.json";
    std::string outt = scratch_dir() + "/cmp_t_out.json";
    REQUIRE(run_cli("decompose --config " + dpath + " --out " + outd).exit_code == 0);
    REQUIRE(run_cli("transfer --config " + tpath + " --out " + outt).exit_code == 0);
    CHECK(run_cli("compare " + outd + " " + outt).exit_code == 2);

    // different omega_t: verify oracle fidelities differ beyond a tight tolerance
    auto vpath = write_config("cmp_v.json", toy_config("verify"));
    std::string outv1 = scratch_dir() + "/cmp_v1.json";
    std::string outv2 = scratch_dir() + "/cmp_v2.json";
    REQUIRE(run_cli("verify --config " + vpath + " --out " + outv1).exit_code == 0);
    REQUIRE(run_cli("verify --config " + vpath + " --omega-t 500 --out " + outv2).exit_code ==
            0);
    auto cmp = run_cli("compare " + outv1 + " " + outv2 + " --tolerance 1e-12");
    CHECK(cmp.exit_code == 1);
    json diff = json::parse(cmp.output);
    CHECK(diff["equal_within_tolerance"] == false);
    CHECK(!diff["differences"].empty());
}

TEST_CASE("verification section carries residuals, round trip, and sweep fidelities") {
    auto path = write_config("verify_toy.json", toy_config("verify"));
    auto r = run_cli("verify --config " + path);
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);
    auto v = report["verification"];
    CHECK(v["darkness_residual_max"].get<double>() <= 1e-9);
    CHECK(v["round_trip_defect"].get<double>() <= 1e-6);
    CHECK(v["bright_a"].empty());
    REQUIRE(v["bright_b"].size() == 1);
    auto per_pair = v["oracle"]["per_pair"];
    REQUIRE(per_pair.size() == 2);
    for (const auto& entry : per_pair) {
        CHECK(entry["fidelity"].get<double>() >= 0.999);
        CHECK(entry["norm_drift"].get<double>() <= 1e-8);
    }
}

TEST_CASE("trajectory honors an explicit angle grid") {
    auto doc = toy_config("trajectory");
    double theta_star = std::atan(std::tan(std::atan(1.0)) / std::sqrt(2.0));
    doc["theta_grid"] = {0.0, theta_star, 1.5707963267948966};
    auto path = write_config("traj.json", doc);
    auto r = run_cli("trajectory --config " + path);
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);
    auto traj = report["trajectory"];
    REQUIRE(traj["theta"].size() == 3);
    // bare-state population of the far pair at the mid angle
    auto pop_a = traj["pop_a"];
    REQUIRE(pop_a["rows"] == 3);
    REQUIRE(pop_a["cols"] == 3);
    // row-major layout: entry (row, col) = data[row * cols + col]; row 2 is |a->
    double far = pop_a["data"][2 * 3 + 1].get<double>();
    CHECK(std::abs(far - 0.008468) <= 1e-6);
}

TEST_CASE("convergence study reports decreasing points through the CLI") {
    auto doc = toy_config("convergence");
    doc["omega_t_list"] = {200.0, 400.0, 800.0};
    auto path = write_config("conv.json", doc);
    auto r = run_cli("convergence --config " + path);
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);
    auto points = report["convergence"]["points"];
    REQUIRE(points.size() == 3);
    double prev = 1.0;
    for (const auto& p : points) {
        double infid = p[1].get<double>();
        CHECK(infid < prev);
        prev = infid;
    }
    CHECK(report["convergence"]["trend_slope"].get<double>() < -1.0);
}

TEST_CASE("batch runs several jobs and summarizes them") {
    std::string out_a = scratch_dir() + "/batch_a.json";
    std::string out_b = scratch_dir() + "/batch_b.json";
    json jobs;
    json job_a = toy_config("decompose");
    job_a["out"] = out_a;
    json job_b = cesium_config("decompose", 3, "z", "z");
    job_b["out"] = out_b;
    jobs["jobs"] = json::array({job_a, job_b});
    auto path = write_config("batch.json", jobs);

    auto r = run_cli("batch --config " + path);
    REQUIRE(r.exit_code == 0);
    json summary = json::parse(r.output);
    CHECK(summary["command"] == "batch");
    CHECK(summary["all_ok"] == true);
    REQUIRE(summary["jobs"].size() == 2);
    for (const auto& j : summary["jobs"]) {
        CHECK(j["status"] == "ok");
    }
    CHECK(json::parse(read_file(out_a))["command"] == "decompose");
    CHECK(json::parse(read_file(out_b))["system"]["dim_a"] == 7);
}

TEST_CASE("batch rejects a job with a config mistake before running anything") {
    json jobs;
    json bad = toy_config("decompose");
    bad["rank_tol"] = 2.0; // outside (0, 1)
    bad["out"] = scratch_dir() + "/never.json";
    jobs["jobs"] = json::array({bad});
    auto path = write_config("batch_bad.json", jobs);
    auto r = run_cli("batch --config " + path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("the out flag mirrors stdout exactly") {
    auto path = write_config("mirror.json", toy_config("decompose"));
    std::string out = scratch_dir() + "/mirror_out.json";
    auto r = run_cli("decompose --config " + path + " --out " + out);
    REQUIRE(r.exit_code == 0);
    CHECK(read_file(out) == r.output);
}

TEST_CASE("flag overrides land in the echoed config") {
    auto path = write_config("override.json", toy_config("decompose"));
    auto r = run_cli("decompose --config " + path + " --rank-tol 1e-8");
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);
    CHECK(report["config"]["rank_tol"].get<double>() == 1e-8);
}
