#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "forch/config.hpp"
#include "forch/io.hpp"

using namespace forch;
namespace fs = std::filesystem;

#ifndef FORCHSIM_BIN
#define FORCHSIM_BIN "forchsim"
#endif

namespace {

const char* kDemoConfig = R"(# smoke run
[law]
exponents = 0 1 2
coefficients = 1 1 1

[problem]
lambda = 0.5
t_end = 0.2
u0 = sinsq 1.0
phi = sinusoidal 0.2 0.1 1.0 0.0
source = none

[grid]
dim = 1
lengths = 1.0
cells = 32

[solver]
dt_initial = 1e-3
dt_max = 5e-3

[output]
snapshot_times = 0 0.1 0.2
)";

fs::path temp_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("forch_io_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    return std::system((std::string(FORCHSIM_BIN) + " " + args).c_str());
}

std::string slurp(const fs::path& p) { return read_file(p); }

} // namespace

TEST_CASE("config parsing") {
    const auto rc = parse_run_config(kDemoConfig);
    CHECK(rc.lambda == 0.5);
    CHECK(rc.t_end == 0.2);
    CHECK(rc.dim == 1);
    CHECK(rc.cells[0] == 32);
    CHECK(rc.law == ForchheimerLaw::three_term(1.0, 1.0, 1.0));
    CHECK(rc.phi.value(0.0) == Catch::Approx(0.2).margin(1e-15));
    CHECK(rc.phi.value(0.25) == Catch::Approx(0.3).margin(1e-12)); // sin peak
    CHECK(rc.phi.derivative(0.0) == Catch::Approx(0.1 * 2.0 * M_PI).epsilon(1e-12));
    CHECK(rc.solver.snapshot_times.size() == 3);

    CHECK_THROWS_AS(parse_run_config("[law]\nexponents = 0\n"), parameter_error);
    CHECK_THROWS_AS(parse_run_config("nonsense without equals\n"), parameter_error);

    // piecewise preset: value holds left-continuously, derivative flat
    const auto rp = parse_run_config(
        "[law]\nexponents = 0 1\ncoefficients = 1 1\n[problem]\nlambda = 1\nt_end = 1\n"
        "u0 = constant 1\nphi = piecewise 0 0.5 0.4 -0.25\n[grid]\ndim = 1\nlengths = 1\n"
        "cells = 16\n");
    CHECK(rp.phi.value(0.1) == 0.5);
    CHECK(rp.phi.value(0.7) == -0.25);
    CHECK(rp.phi.derivative(0.7) == 0.0);
    CHECK_FALSE(rp.phi.has_smooth_derivative());
}

TEST_CASE("snapshot round-trip at 17 significant digits") {
    const auto dir = temp_dir("snap");
    auto grid = std::make_shared<Grid>(Grid::rectangle(1.0, 2.0, 6, 4));
    DiscreteField f(grid, 0.3333333333333333);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ud(1e-7, 1e7);
    for (auto& v : f.values()) v = ud(rng);

    write_snapshot(dir / "snap.csv", f);
    const auto back = read_snapshot(dir / "snap.csv");
    CHECK(back.grid() == f.grid());
    CHECK(back.time() == f.time());
    for (int c = 0; c < grid->cell_count(); ++c) CHECK(back[c] == f[c]); // bitwise via %.17g
}

TEST_CASE("manifest validation") {
    const auto dir = temp_dir("manifest");
    std::ofstream(dir / "config.ini") << kDemoConfig;
    RunManifest m;
    m.tool_version = "test";
    m.created_utc = "2026-01-01T00:00:00Z";
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a(kDemoConfig)));
    m.config_hash_hex = hex;
    m.files = {"config.ini"};
    write_manifest(dir, m);
    std::string why;
    CHECK(validate_manifest(dir, &why));

    m.files.push_back("missing.csv");
    write_manifest(dir, m);
    CHECK_FALSE(validate_manifest(dir, &why));
    CHECK(why == "missing file: missing.csv");
}

TEST_CASE("fresh run directories never overwrite") {
    const auto dir = temp_dir("fresh");
    const auto base = dir / "run";
    CHECK(fresh_run_dir(base) == base);
    fs::create_directories(base);
    CHECK(fresh_run_dir(base) == fs::path(base.string() + "-001"));
    fs::create_directories(base.string() + "-001");
    CHECK(fresh_run_dir(base) == fs::path(base.string() + "-002"));
}

TEST_CASE("simulate produces a valid, deterministic run directory") {
    const auto dir = temp_dir("cli");
    std::ofstream(dir / "demo.ini") << kDemoConfig;

    const auto out1 = dir / "out-a";
    const auto out2 = dir / "out-b";
    REQUIRE(run_cli("simulate " + (dir / "demo.ini").string() + " --out " + out1.string() +
                    " > /dev/null") == 0);
    REQUIRE(run_cli("simulate " + (dir / "demo.ini").string() + " --out " + out2.string() +
                    " > /dev/null") == 0);

    std::string why;
    CHECK(validate_manifest(out1, &why));

    // determinism: identical config gives byte-identical CSVs (manifest differs
    // only by timestamp)
    CHECK(slurp(out1 / "diagnostics.csv") == slurp(out2 / "diagnostics.csv"));
    for (int k = 0; k < 3; ++k) {
        char name[64];
        std::snprintf(name, sizeof(name), "snapshots/snap_%03d.csv", k);
        CHECK(slurp(out1 / name) == slurp(out2 / name));
    }

    // requesting the same directory again suffixes instead of overwriting
    REQUIRE(run_cli("simulate " + (dir / "demo.ini").string() + " --out " + out1.string() +
                    " > /dev/null") == 0);
    CHECK(fs::exists(out1.string() + "-001"));

    // bounds runs cleanly on the produced directory
    CHECK(run_cli("bounds " + out1.string() + " > /dev/null") == 0);
    CHECK(fs::exists(out1 / "bounds_report.csv"));

    // a critical-line run (a = delta) is refused by the bound formulas
    std::ofstream(dir / "critical.ini") << R"([law]
exponents = 0 1
coefficients = 1 1
[problem]
lambda = 0.5
t_end = 0.1
u0 = constant 1.0
phi = constant 0.0
[grid]
dim = 1
lengths = 1.0
cells = 16
[output]
snapshot_times = 0 0.05 0.1
)";
    REQUIRE(run_cli("simulate " + (dir / "critical.ini").string() + " --out " +
                    (dir / "critical-out").string() + " > /dev/null") == 0);
    const int refused = run_cli("bounds " + (dir / "critical-out").string() +
                                " > /dev/null 2> /dev/null");
    CHECK(WEXITSTATUS(refused) == 1);

    // diagnostics header matches the documented schema
    const auto diag = slurp(out1 / "diagnostics.csv");
    CHECK(diag.rfind("step,t,dt,picard_iters,mass,flux\n", 0) == 0);

    // decay run: the sup-norm check comes out "pass" in the report
    const auto report = slurp(out1 / "bounds_report.csv");
    CHECK(report.find("Lalpha_local") != std::string::npos);
    CHECK(report.find(",pass,") != std::string::npos);
}

TEST_CASE("exponents subcommand prints the derived table") {
    const auto dir = temp_dir("expcli");
    std::ofstream(dir / "ref.ini") << R"([law]
exponents = 0 1
coefficients = 1 1
[problem]
lambda = 1.0
t_end = 1.0
u0 = constant 1.0
phi = constant 0.0
[grid]
dim = 2
lengths = 1.0 1.0
cells = 8 8
)";
    const auto csv_path = dir / "exp.csv";
    REQUIRE(run_cli("exponents " + (dir / "ref.ini").string() + " > " + csv_path.string()) == 0);
    const auto csv = slurp(csv_path);
    CHECK(csv.rfind("name,value,precondition_status\n", 0) == 0);
    CHECK(csv.find("alpha_star,0.66666666666666663,ok") != std::string::npos);
    CHECK(csv.find("mu0,1,ok") != std::string::npos);
    CHECK(csv.find("schedule.kappa_bar_star,") != std::string::npos);
}

TEST_CASE("moser-check subcommand dominates across 1000 seeded specs") {
    const auto dir = temp_dir("mosercli");
    const auto csv_path = dir / "moser.csv";
    REQUIRE(run_cli("moser-check --count 1000 --seed 7 > " + csv_path.string()) == 0);
    const auto csv = slurp(csv_path);
    CHECK(csv.rfind("spec_id,j_max,max_ratio,pass\n", 0) == 0);
    CHECK(csv.find(",0\n") == std::string::npos); // no failing rows
}

TEST_CASE("CLI exit codes") {
    const auto dir = temp_dir("exit");

    // malformed config -> 1
    std::ofstream(dir / "bad.ini") << "[law]\nexponents = garbage config\n";
    CHECK(run_cli("simulate " + (dir / "bad.ini").string() + " 2> /dev/null") != 0);

    // unreachable tolerance -> 2
    std::ofstream(dir / "stuck.ini") << R"([law]
exponents = 0 1
coefficients = 1 1
[problem]
lambda = 0.5
t_end = 0.1
u0 = sinsq 1.0
phi = constant 0.5
[grid]
dim = 1
lengths = 1.0
cells = 16
[solver]
dt_initial = 1e-2
dt_min = 1e-3
picard_tol = 1e-300
picard_max_iters = 4
)";
    const int rc = run_cli("simulate " + (dir / "stuck.ini").string() + " 2> /dev/null");
    CHECK(WEXITSTATUS(rc) == 2);

    // steady-state config: exit 0 and snapshots identical to u0
    std::ofstream(dir / "steady.ini") << R"([law]
exponents = 0 1
coefficients = 1 1
[problem]
lambda = 1.0
t_end = 0.1
u0 = constant 2.0
phi = constant 0.0
[grid]
dim = 1
lengths = 1.0
cells = 16
[output]
snapshot_times = 0 0.1
)";
    REQUIRE(run_cli("simulate " + (dir / "steady.ini").string() + " --out " +
                    (dir / "steady-out").string() + " > /dev/null") == 0);
    const auto last = read_snapshot(dir / "steady-out" / "snapshots" / "snap_001.csv");
    for (double v : last.values()) CHECK(v == Catch::Approx(2.0).epsilon(1e-13));
}
