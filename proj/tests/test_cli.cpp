#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    json summary;
    fs::path out_dir;
};

fs::path scratch_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() /
                     ("hvolt_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return root;
}

CliResult run_cli(const std::string& command, const json& config,
                  const std::string& extra_flags = "", const std::string& tag = "run") {
    static int counter = 0;
    const fs::path dir = scratch_root() / (tag + "_" + std::to_string(counter++));
    fs::create_directories(dir);
    const fs::path config_path = dir / "config.json";
    {
        std::ofstream out(config_path);
        out << config.dump(2);
    }
    const fs::path out_dir = dir / "out";
    const std::string cmd = std::string(HVOLT_CLI_PATH) + " " + command + " --config " +
                            config_path.string() + " --out " + out_dir.string() + " " +
                            extra_flags + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());

    CliResult result;
    result.out_dir = out_dir;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream summary(out_dir / "summary.json");
    if (summary) {
        summary >> result.summary;
    }
    return result;
}

json desk_config() {
    return json{
        {"space", {{"type", "finite"}, {"weights", {0.5, 0.5}}}},
        {"kernel", {{"type", "matrix"}, {"generator", {{1.0, -1.0}, {-1.0, 1.0}}}}},
        {"nonlinearity", {{"type", "power"}, {"alpha", 0.5}}},
        {"weight", {{"type", "mixture"}, {"rate", 1.0}, {"ratio", 0.5}, {"lambda0", 0.5}}},
        {"source", {{"type", "constant"}, {"value", 0.25}}},
        {"time", {{"T", 5.0}, {"nt", 200}, {"T0", 5.0}}},
        {"solver", {{"tol", 1e-12}, {"max_iter", 400}, {"start", "upper"}}},
        {"certificate", {{"enabled", true}}}};
}

json substochastic_config() {
    return json{
        {"space", {{"type", "finite"}, {"weights", {1.0}}}},
        {"kernel", {{"type", "matrix"}, {"generator", {{0.0}}}, {"damping", 1.0}}},
        {"nonlinearity", {{"type", "power"}, {"alpha", 0.5}}},
        {"weight", {{"type", "constant"}, {"value", 1.0}}},
        {"source", {{"type", "constant"}, {"value", 1.0}}},
        {"time", {{"T", 2.0}, {"nt", 200}}},
        {"solver", {{"tol", 1e-12}, {"max_iter", 400}}},
        {"oracle", {{"dt", 1e-3}, {"tol", 1e-3}}}};
}

bool entry_fails(const json& summary, const std::string& name) {
    for (const auto& e : summary["assumptions"]["entries"]) {
        if (e["name"] == name) {
            return !e["pass"].get<bool>();
        }
    }
    return false;
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++n;
    }
    return n;
}

} // namespace

TEST_CASE("check passes the all-pass desk config") {
    CliResult r = run_cli("check", desk_config(), "", "check_pass");
    CHECK(r.exit_code == 0);
    REQUIRE(r.summary.contains("assumptions"));
    CHECK(r.summary["assumptions"]["pass"] == true);
    for (const auto& e : r.summary["assumptions"]["entries"]) {
        CHECK(e["pass"] == true);
    }
    CHECK(r.summary["regime"] == "stochastic");
}

TEST_CASE("check rejects the c = 0 envelope config") {
    json cfg = desk_config();
    cfg["weight"]["ratio"] = 0.0;
    CliResult r = run_cli("check", cfg, "", "check_c0");
    CHECK(r.exit_code == 1);
    CHECK(entry_fails(r.summary, "h.limit_ratio_positive"));
}

TEST_CASE("check rejects the unnormalized p2 config") {
    json cfg = desk_config();
    cfg["weight"]["rate"] = 0.5;
    cfg["weight"]["scale"] = 1.0; // p2 = e^{-t/2}, integral 2
    CliResult r = run_cli("check", cfg, "", "check_unnorm");
    CHECK(r.exit_code == 1);
    CHECK(entry_fails(r.summary, "h.p2_normalized"));
}

TEST_CASE("check rejects a positive off-diagonal generator") {
    json cfg = desk_config();
    cfg["kernel"]["generator"] = {{1.0, 0.5}, {-1.0, 1.0}};
    CliResult r = run_cli("check", cfg, "", "check_gen");
    CHECK(r.exit_code == 1);
    CHECK(entry_fails(r.summary, "kernel.generator"));
}

TEST_CASE("solve on the zero-source config returns the zero solution") {
    json cfg = desk_config();
    cfg["source"]["value"] = 0.0;
    cfg["solver"]["start"] = "lower";
    cfg.erase("certificate"); // no rate certificate for beta0 = 0
    CliResult r = run_cli("solve", cfg, "", "solve_zero");
    CHECK(r.exit_code == 0);
    CHECK(r.summary["solve"]["converged"] == true);
    CHECK(r.summary["solve"]["residual"].get<double>() == 0.0);

    // solution.csv: header + 2 points x 201 nodes
    CHECK(count_lines(r.out_dir / "solution.csv") == 1 + 2 * 201);
}

TEST_CASE("solve emits artifacts on the desk config") {
    CliResult r = run_cli("solve", desk_config(), "", "solve_desk");
    CHECK(r.exit_code == 0);
    CHECK(r.summary["solve"]["converged"] == true);
    CHECK(r.summary["solve"]["monotonicity_violation"].get<double>() <= 1e-12);
    CHECK(fs::exists(r.out_dir / "solution.csv"));
    CHECK(r.summary["exit_status"] == 0);
}

TEST_CASE("certify emits the certificate and the convergence table") {
    CliResult r = run_cli("certify", desk_config(), "", "certify_desk");
    CHECK(r.exit_code == 0);
    REQUIRE(r.summary.contains("certificate"));
    const auto& cert = r.summary["certificate"];
    CHECK(cert["sigma_star"].get<double>() > 0.0);
    CHECK(cert["sigma_star"].get<double>() < 1.0);
    CHECK(cert["k"].get<double>() > 0.0);
    CHECK(cert["k"].get<double>() < 1.0);
    CHECK(cert["bound_dominates"] == true);

    REQUIRE(fs::exists(r.out_dir / "convergence.csv"));
    std::ifstream conv(r.out_dir / "convergence.csv");
    std::string header;
    std::getline(conv, header);
    CHECK(header == "m,measured_gap,bound");
    std::string line;
    while (std::getline(conv, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double measured = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        const double bound = std::stod(line.substr(c2 + 1));
        CHECK(measured <= bound + 1e-12);
    }
    CHECK(fs::exists(r.out_dir / "lfunction.csv"));
    CHECK(count_lines(r.out_dir / "lfunction.csv") > 100);
}

TEST_CASE("probe passes on the desk config") {
    CliResult r = run_cli("probe", desk_config(), "", "probe_desk");
    CHECK(r.exit_code == 0);
    CHECK(r.summary["probe"]["pass"] == true);
    CHECK(r.summary["probe"]["sup_gap"].get<double>() <= 1e-8);
}

TEST_CASE("compare-oracle on the substochastic config") {
    CliResult r = run_cli("compare-oracle", substochastic_config(), "", "oracle_sub");
    CHECK(r.exit_code == 0);
    CHECK(r.summary["oracle"]["method"] == "ode_reference");
    CHECK(r.summary["oracle"]["gap"].get<double>() < 1e-3);
    CHECK(r.summary["regime"] == "substochastic");
}

TEST_CASE("malformed configs exit with status 3") {
    json missing = desk_config();
    missing.erase("nonlinearity");
    CliResult r1 = run_cli("check", missing, "", "bad_missing");
    CHECK(r1.exit_code == 3);

    json bad_value = desk_config();
    bad_value["nonlinearity"]["alpha"] = 1.7;
    CliResult r2 = run_cli("check", bad_value, "", "bad_alpha");
    CHECK(r2.exit_code == 3);
}

TEST_CASE("starved iteration budget exits with status 2") {
    json cfg = desk_config();
    cfg["solver"]["max_iter"] = 1;
    CliResult r = run_cli("solve", cfg, "", "starved");
    CHECK(r.exit_code == 2);
    CHECK(r.summary["solve"]["converged"] == false);
}

TEST_CASE("tabulated sources and box spaces flow through the CLI") {
    // 1-d Neumann box with a tabulated source; solution.csv carries x_coord.
    json cfg{
        {"space", {{"type", "box"}, {"dim", 1}, {"points", 9}, {"length", 1.0}}},
        {"kernel", {{"type", "neumann_box"}, {"diffusivity", 1.0}, {"cutoff", 32}}},
        {"nonlinearity", {{"type", "power"}, {"alpha", 0.5}}},
        {"weight", {{"type", "mixture"}, {"rate", 1.0}, {"ratio", 0.5}, {"lambda0", 0.5}}},
        {"time", {{"T", 1.0}, {"nt", 50}}},
        {"solver", {{"tol", 1e-10}, {"max_iter", 200}}}};
    json rows = json::array();
    for (int x = 0; x < 9; ++x) {
        json row = json::array();
        for (int j = 0; j <= 50; ++j) {
            row.push_back(0.25 + 0.01 * x);
        }
        rows.push_back(row);
    }
    cfg["source"] = {{"type", "tabulated"}, {"array", rows}};

    CliResult r = run_cli("solve", cfg, "", "box_tabulated");
    CHECK(r.exit_code == 0);
    CHECK(r.summary["solve"]["converged"] == true);
    std::ifstream csv(r.out_dir / "solution.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "point_index,x_coord,t,u");
}

TEST_CASE("duhamel sources feed both solve and compare-oracle") {
    json cfg = substochastic_config();
    cfg["source"] = {{"type", "duhamel"}, {"u0", {1.0}}, {"f", 1.0}};
    // g = e^{-t} + (1 - e^{-t}) = 1 for the damped 1-state kernel, so this
    // matches the constant-source instance.
    CliResult r = run_cli("compare-oracle", cfg, "", "duhamel_oracle");
    CHECK(r.exit_code == 0);
    CHECK(r.summary["oracle"]["gap"].get<double>() < 1e-3);
}

TEST_CASE("solve attaches the certificate when requested") {
    CliResult r = run_cli("solve", desk_config(), "", "solve_with_cert");
    CHECK(r.exit_code == 0);
    REQUIRE(r.summary.contains("certificate"));
    CHECK(r.summary["certificate"]["k"].get<double>() < 1.0);
}

TEST_CASE("an unattainable certificate request fails the run") {
    json cfg = desk_config();
    cfg["source"]["value"] = 0.0; // beta0 = 0: no rate certificate exists
    cfg["solver"]["start"] = "lower";
    CliResult r = run_cli("solve", cfg, "", "cert_unattainable");
    CHECK(r.exit_code == 1);
    CHECK(r.summary["solve"]["converged"] == true); // the solve itself is fine
}

TEST_CASE("generators parse from flat row-major arrays too") {
    json cfg = desk_config();
    cfg["kernel"]["generator"] = {1.0, -1.0, -1.0, 1.0};
    CliResult r = run_cli("check", cfg, "", "flat_generator");
    CHECK(r.exit_code == 0);
}

TEST_CASE("the seed flag reaches the checker without changing the verdict") {
    CliResult a = run_cli("check", desk_config(), "--seed 1", "seed1");
    CliResult b = run_cli("check", desk_config(), "--seed 99991", "seed2");
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
}

TEST_CASE("--force overrides a failed gate and is recorded") {
    json cfg = desk_config();
    cfg["weight"]["rate"] = 0.5;
    cfg["weight"]["scale"] = 1.0; // unnormalized p2: existence-grade failure

    CliResult blocked = run_cli("solve", cfg, "", "force_blocked");
    CHECK(blocked.exit_code == 1);

    CliResult forced = run_cli("solve", cfg, "--force", "force_allowed");
    CHECK(forced.exit_code == 0);
    CHECK(forced.summary["solve"]["converged"] == true);
    CHECK(forced.summary["solve"]["forced"] == true);
}
