// forchsim: simulate generalized Forchheimer pseudo-pressure flows and audit
// the associated a-priori estimates against measured norms.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "forch/bounds.hpp"
#include "forch/config.hpp"
#include "forch/exponents.hpp"
#include "forch/io.hpp"
#include "forch/moser.hpp"
#include "forch/solver.hpp"
#include "forch/trace_checks.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return buf;
}

std::string hash_hex(const std::string& bytes) {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(forch::fnv1a(bytes)));
    return hex;
}

int run_simulate(const std::string& config_path, std::string out_dir) {
    std::string text;
    forch::RunConfig rc;
    try {
        text = forch::read_file(config_path);
        rc = forch::parse_run_config(text);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    forch::RunRecord rec;
    try {
        rec = forch::run(rc.make_setup(), rc.solver);
    } catch (const forch::solver_error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (out_dir.empty())
            out_dir = fs::path(config_path).stem().string() + "-run";
        const fs::path dir = forch::fresh_run_dir(out_dir);
        fs::create_directories(dir / "snapshots");

        std::ofstream(dir / "config.ini") << text;
        forch::RunManifest manifest;
        manifest.tool_version = kToolVersion;
        manifest.config_hash_hex = hash_hex(text);
        manifest.created_utc = utc_now();
        manifest.files.push_back("config.ini");
        for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
            char name[64];
            std::snprintf(name, sizeof(name), "snapshots/snap_%03zu.csv", k);
            forch::write_snapshot(dir / name, rec.snapshots[k]);
            manifest.files.push_back(name);
        }
        forch::write_diagnostics(dir / "diagnostics.csv", rec.diagnostics);
        manifest.files.push_back("diagnostics.csv");
        forch::write_manifest(dir, manifest);

        std::cout << dir.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return 1;
    }
}

int run_exponents(const std::string& config_path, std::vector<double> alphas, double alpha0,
                  double tail_tol) {
    forch::RunConfig rc;
    try {
        rc = forch::parse_run_config(forch::read_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        const auto t = forch::build_table(rc.lambda, rc.law, rc.dim);
        std::cout << "name,value,precondition_status\n";
        auto row = [](const std::string& name, double value, const std::string& status) {
            std::cout << name << "," << forch::format_full(value) << "," << status << "\n";
        };
        const std::string base = t.super_critical ? "ok" : "a<=delta";
        row("lambda", t.lambda, "ok");
        row("delta", t.delta, "ok");
        row("a", t.a, "ok");
        row("alpha_star", t.alpha_star, base);
        row("mu0", t.mu0, base);
        row("x_star", t.super_critical ? forch::x_star_of(t) : 0.0, base);

        if (alphas.empty()) alphas = {4.0};
        for (double alpha : alphas) {
            char prefix[64];
            std::snprintf(prefix, sizeof(prefix), "alpha=%g.", alpha);
            try {
                const auto d = forch::derive_alpha(t, alpha);
                row(std::string(prefix) + "theta", d.theta, "ok");
                row(std::string(prefix) + "mu1", d.mu1, "ok");
                row(std::string(prefix) + "mu2", d.mu2, "ok");
                if (d.mu3) row(std::string(prefix) + "mu3", *d.mu3, "ok");
                else row(std::string(prefix) + "mu3", 0.0, "alpha<=lambda+1+mu0");
                row(std::string(prefix) + "mu4", d.mu4, "ok");
                row(std::string(prefix) + "kappa", d.kappa, "ok");
                row(std::string(prefix) + "theta_tilde", d.theta_tilde, "ok");
                row(std::string(prefix) + "kappa_bar", d.kappa_bar, "ok");
                row(std::string(prefix) + "D3", d.D3, "ok");
                row(std::string(prefix) + "D4", d.D4, "ok");
            } catch (const forch::precondition_error& e) {
                std::cout << prefix << "*,," << e.what() << "\n";
            }
        }

        if (alpha0 <= 0.0 && t.super_critical) {
            const double threshold =
                std::max(2.0 - t.delta, (1.0 + forch::x_star_of(t)) * t.alpha_star);
            alpha0 = 1.25 * threshold;
        }
        if (alpha0 > 0.0) {
            try {
                const int jmax = forch::schedule_steps_for_tolerance(t, alpha0, tail_tol);
                const auto s = forch::build_schedule(t, alpha0, jmax, tail_tol);
                row("schedule.alpha0", s.alpha0, "ok");
                row("schedule.beta0", s.beta0, "ok");
                row("schedule.kappa_star", s.kappa_star, "ok");
                row("schedule.kappa_bar_star", s.kappa_bar_star, "ok");
                row("schedule.kappa_hat_star", s.kappa_hat_star, "ok");
                row("schedule.mu_tilde", s.mu_tilde.value, "ok");
                row("schedule.nu_tilde", s.nu_tilde.value, "ok");
                row("schedule.omega", s.omega, "ok");
                row("schedule.interior.mu", s.interior.mu.value, "ok");
                row("schedule.interior.nu", s.interior.nu.value, "ok");
                row("schedule.interior.omega", s.interior.omega, "ok");
                for (std::size_t j = 0; j < std::min<std::size_t>(9, s.alphas.size()); ++j) {
                    char name[48];
                    std::snprintf(name, sizeof(name), "schedule.alpha_%zu", j);
                    row(name, s.alphas[j], "ok");
                }
            } catch (const std::exception& e) {
                std::cout << "schedule.*,," << e.what() << "\n";
            }
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

json constants_to_json(const forch::BoundReport& rep) {
    json j = json::object();
    for (const auto& [name, value] : rep.constants_used) j[name] = value;
    return j;
}

int run_bounds(const std::string& run_dir, std::vector<double> alphas,
               std::vector<std::string> checks, double alpha0, double ball_R, double sigma,
               double eps, const std::string& out_file) {
    try {
        const fs::path dir(run_dir);
        std::string why;
        if (!forch::validate_manifest(dir, &why)) {
            std::cerr << "run directory failed validation: " << why << "\n";
            return 1;
        }
        const auto rc = forch::parse_run_config(forch::read_file(dir / "config.ini"));
        const auto manifest = forch::read_manifest(dir);

        forch::SpaceTimeTrace snaps;
        for (const auto& f : manifest.files)
            if (f.rfind("snapshots/", 0) == 0) snaps.push(forch::read_snapshot(dir / f));
        if (snaps.size() < 2) {
            std::cerr << "run directory has fewer than 2 snapshots\n";
            return 1;
        }

        const auto table = forch::build_table(rc.lambda, rc.law, rc.dim);
        const double T = snaps.t_end();
        const auto phi_trace =
            forch::PhiMinusTrace::sample([&](double t) { return rc.phi.value(t); }, T);

        if (alphas.empty()) alphas = {4.0};
        if (checks.empty()) checks = {"lalpha", "grad", "linf_interior", "linf_global"};
        auto wanted = [&](const std::string& name) {
            for (const auto& c : checks)
                if (c == name) return true;
            return false;
        };

        std::vector<forch::BoundReport> reports;
        for (double alpha : alphas) {
            if (wanted("lalpha")) {
                const auto d = forch::derive_alpha(table, alpha);
                for (auto& r : forch::check_lalpha(snaps, d, phi_trace)) reports.push_back(r);
            }
            if (wanted("grad")) {
                const auto d = forch::derive_alpha(table, alpha);
                forch::PhiForGradient pinfo;
                pinfo.phi_plus_at_0 = std::max(0.0, rc.phi.value(0.0));
                if (rc.phi.has_smooth_derivative())
                    pinfo.phi_time_derivative = [&rc](double t) { return rc.phi.derivative(t); };
                for (auto& r : forch::check_gradient(snaps, d, phi_trace, pinfo))
                    reports.push_back(r);
            }
        }
        if (wanted("linf_interior")) {
            const double R =
                ball_R > 0.0 ? ball_R
                             : 0.25 * (rc.dim == 1 ? rc.lengths[0]
                                                   : std::min(rc.lengths[0], rc.lengths[1]));
            const double a0 = alpha0 > 0.0 ? alpha0 : 4.0;
            const auto sched = forch::build_interior_schedule(table, a0);
            for (auto& r : forch::check_linf_interior(snaps, table, sched, R, sigma))
                reports.push_back(r);
        }
        if (wanted("linf_global")) {
            double a0 = alpha0;
            if (a0 <= 0.0) {
                const double threshold = std::max(
                    2.0 - table.delta, (1.0 + forch::x_star_of(table)) * table.alpha_star);
                a0 = std::max(4.0, 1.25 * threshold);
            }
            const int jmax = forch::schedule_steps_for_tolerance(table, a0, 1e-10);
            const auto sched = forch::build_schedule(table, a0, jmax);
            const double e = eps > 0.0 ? eps : 0.25 * std::min(1.0, T);
            for (auto& r : forch::check_linf_global(snaps, table, sched, e, phi_trace))
                reports.push_back(r);
        }

        std::ostringstream csv;
        csv << "bound_id,alpha,measured,bound,ratio,verdict,constants_json\n";
        for (const auto& rep : reports) {
            csv << rep.bound_id << "," << forch::format_full(rep.alpha) << ","
                << forch::format_full(rep.measured) << ","
                << forch::format_full(rep.bound_value) << "," << forch::format_full(rep.ratio)
                << "," << forch::to_string(rep.verdict) << ",\""
                << constants_to_json(rep).dump() << "\"\n";
        }
        const std::string text = csv.str();
        std::cout << text;
        const fs::path out = out_file.empty() ? dir / "bounds_report.csv" : fs::path(out_file);
        std::ofstream(out) << text;
        return 0;
    } catch (const forch::precondition_error& e) {
        std::cerr << "precondition error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_moser_check(std::uint64_t seed, int count, int steps, const std::string& out_file) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> Ad(1.0, 10.0), qd(1.0 + 1e-6, 2.0), k0d(1.0, 4.0),
        wd(1.0, 2.0), frac(0.05, 1.0), y0d(0.0, 3.0);
    std::ostringstream csv;
    csv << "spec_id,j_max,max_ratio,pass\n";
    bool all_pass = true;
    for (int id = 0; id < count; ++id) {
        forch::IterationSpec spec;
        spec.A = Ad(rng);
        spec.y0 = y0d(rng);
        const double q = qd(rng), k0 = k0d(rng);
        for (int j = 0; j < steps; ++j) {
            const double k = k0 * std::pow(q, j);
            spec.kappa.push_back(k);
            spec.omega.push_back(wd(rng));
            const double sj = frac(rng) * k * 1.5;
            spec.s.push_back(sj);
            spec.r.push_back(frac(rng) * sj);
        }
        const auto rep = forch::verify_dominance(spec);
        all_pass = all_pass && rep.pass;
        csv << id << "," << rep.steps << "," << forch::format_full(rep.max_ratio) << ","
            << (rep.pass ? "1" : "0") << "\n";
    }
    const std::string text = csv.str();
    std::cout << text;
    if (!out_file.empty()) std::ofstream(out_file) << text;
    return all_pass ? 0 : 1;
}

int run_trace_check(std::uint64_t seed, int grid_n, int field_count) {
    try {
        auto grid =
            std::make_shared<forch::Grid>(forch::Grid::rectangle(1.0, 1.0, grid_n, grid_n));
        const auto table =
            forch::build_table(1.0, forch::ForchheimerLaw::two_term(1.0, 1.0), 2);
        const std::vector<double> probes{0.1, 1.0, 10.0};
        bool all_pass = true;

        { // general trace with derived constants
            const auto corpus = forch::polynomial_corpus(grid, field_count, seed);
            const auto c = forch::derived_trace_constants(*grid);
            double worst = 0.0;
            for (const auto& f : corpus)
                for (double eps : probes)
                    worst = std::max(
                        worst, forch::check_trace_general(f, 3.0, 1.0, 2.0, eps, c).ratio);
            const bool pass = worst <= 1.0;
            all_pass = all_pass && pass;
            std::cout << "trace_general,c1=" << c.c1 << ",c2=" << c.c2
                      << ",max_ratio=" << forch::format_full(worst) << ","
                      << (pass ? "pass" : "FAIL") << "\n";
        }
        { // specialized trace, fit on corpus A, verify on corpus B
            const auto corpus_a = forch::polynomial_corpus(grid, field_count, seed + 1);
            const auto corpus_b = forch::polynomial_corpus(grid, field_count, seed + 2);
            const double c_star = forch::fit_trace_constant(table, 4.0, grid->domain_measure(),
                                                            corpus_a, probes);
            const auto d = forch::derive_alpha(table, 4.0, c_star, grid->domain_measure());
            double worst = 0.0;
            for (const auto& f : corpus_b)
                for (double eps : probes)
                    worst = std::max(worst, forch::check_trace_specialized(f, d, eps).ratio);
            const bool pass = worst <= 1.0;
            all_pass = all_pass && pass;
            std::cout << "trace_specialized,c_star=" << forch::format_full(c_star)
                      << ",max_ratio=" << forch::format_full(worst) << ","
                      << (pass ? "pass" : "FAIL") << "\n";
        }
        { // parabolic Sobolev, fit-then-verify
            std::mt19937_64 rng_a(seed + 3), rng_b(seed + 4);
            std::vector<forch::SpaceTimeTrace> corpus_a, corpus_b;
            const int traces = std::max(4, field_count / 4);
            for (int k = 0; k < traces; ++k)
                corpus_a.push_back(forch::random_polynomial_trace(grid, 9, 1.0, rng_a));
            for (int k = 0; k < traces; ++k)
                corpus_b.push_back(forch::random_polynomial_trace(grid, 9, 1.0, rng_b));
            const auto d = forch::derive_alpha(table, 4.0);
            const double c5 = forch::fit_sobolev_constant(d, corpus_a);
            double worst = 0.0;
            for (const auto& tr : corpus_b)
                worst = std::max(worst, forch::check_parabolic_sobolev(tr, d, c5).ratio);
            const bool pass = worst <= 1.0;
            all_pass = all_pass && pass;
            std::cout << "parabolic_sobolev,c5=" << forch::format_full(c5)
                      << ",max_ratio=" << forch::format_full(worst) << ","
                      << (pass ? "pass" : "FAIL") << "\n";
        }
        return all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Forchheimer flow simulator and estimate auditor"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::uint64_t seed = 0;
    std::string out;
    int threads = 1;
    app.add_option("--seed", seed, "random seed for corpus-style subcommands");
    app.add_option("--out", out, "output directory or file");
    app.add_option("--threads", threads,
                   "reserved; runs are single-threaded and deterministic");

    auto* simulate = app.add_subcommand("simulate", "integrate a problem from a config file");
    std::string sim_config;
    simulate->add_option("config", sim_config, "run config path")->required();

    auto* exponents = app.add_subcommand("exponents", "print the derived exponent table as CSV");
    std::string exp_config;
    std::vector<double> exp_alphas;
    double exp_alpha0 = 0.0, exp_tail = 1e-10;
    exponents->add_option("config", exp_config, "run config path")->required();
    exponents->add_option("--alpha", exp_alphas, "alphas for the derived rows");
    exponents->add_option("--alpha0", exp_alpha0, "schedule base exponent (auto if omitted)");
    exponents->add_option("--tail-tol", exp_tail, "certified tail tolerance");

    auto* bounds = app.add_subcommand("bounds", "evaluate bound formulas against a run");
    std::string bounds_dir;
    std::vector<double> bounds_alphas;
    std::vector<std::string> bounds_checks;
    double bounds_alpha0 = 0.0, bounds_R = 0.0, bounds_sigma = 0.5, bounds_eps = 0.0;
    bounds->add_option("run_dir", bounds_dir, "run directory")->required();
    bounds->add_option("--alpha", bounds_alphas, "alphas for the L^alpha/gradient checks");
    bounds->add_option("--checks", bounds_checks,
                       "subset of {lalpha, grad, linf_interior, linf_global}");
    bounds->add_option("--alpha0", bounds_alpha0, "iteration base exponent");
    bounds->add_option("--ball-radius", bounds_R, "interior ball radius");
    bounds->add_option("--sigma", bounds_sigma, "interior time fraction");
    bounds->add_option("--eps", bounds_eps, "global time offset");

    auto* moser =
        app.add_subcommand("moser-check", "random dominance audit of the iteration bound");
    int moser_count = 1000, moser_steps = 24;
    moser->add_option("--count", moser_count, "number of random specs");
    moser->add_option("--steps", moser_steps, "steps per spec");

    auto* trace = app.add_subcommand("trace-check", "trace/Sobolev inequality corpus audit");
    int trace_grid = 48, trace_fields = 200;
    trace->add_option("--grid", trace_grid, "cells per axis");
    trace->add_option("--fields", trace_fields, "corpus size");

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) return run_simulate(sim_config, out);
    if (exponents->parsed()) return run_exponents(exp_config, exp_alphas, exp_alpha0, exp_tail);
    if (bounds->parsed())
        return run_bounds(bounds_dir, bounds_alphas, bounds_checks, bounds_alpha0, bounds_R,
                          bounds_sigma, bounds_eps, out);
    if (moser->parsed()) return run_moser_check(seed, moser_count, moser_steps, out);
    if (trace->parsed()) return run_trace_check(seed, trace_grid, trace_fields);
    return 1;
}
