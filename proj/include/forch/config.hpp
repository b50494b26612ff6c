#ifndef FORCH_CONFIG_HPP
#define FORCH_CONFIG_HPP

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "forch/constitutive.hpp"
#include "forch/errors.hpp"
#include "forch/solver.hpp"

namespace forch {

/// Boundary-flux preset: spatially uniform phi(t) with an analytic time
/// derivative where the preset has one.
struct PhiPreset {
    enum class Kind { constant, sinusoidal, piecewise };
    Kind kind = Kind::constant;
    double constant = 0.0;
    double mean = 0.0, amp = 0.0, freq = 0.0, phase = 0.0; // sinusoidal
    std::vector<double> knot_times, knot_values;           // piecewise-constant

    double value(double t) const {
        switch (kind) {
            case Kind::constant: return constant;
            case Kind::sinusoidal:
                return mean + amp * std::sin(2.0 * M_PI * freq * t + phase);
            case Kind::piecewise: {
                double v = knot_values.front();
                for (std::size_t k = 0; k < knot_times.size(); ++k)
                    if (t >= knot_times[k]) v = knot_values[k];
                return v;
            }
        }
        return 0.0;
    }

    /// d/dt of the preset; piecewise-constant presets are flat between
    /// knots (jumps carry no density).
    double derivative(double t) const {
        if (kind == Kind::sinusoidal)
            return amp * 2.0 * M_PI * freq * std::cos(2.0 * M_PI * freq * t + phase);
        return 0.0;
    }

    bool has_smooth_derivative() const { return kind != Kind::piecewise; }
};

struct U0Preset {
    enum class Kind { constant, sinsq, cospi, linear };
    Kind kind = Kind::constant;
    double a = 1.0, b = 0.0;

    double value(double x, double y, const Grid& g) const {
        const double xs = x / g.lx();
        const double ys = g.dim() == 2 ? y / g.ly() : 0.0;
        switch (kind) {
            case Kind::constant: return a;
            case Kind::sinsq: {
                double v = 1.0 + a * std::sin(M_PI * xs) * std::sin(M_PI * xs);
                if (g.dim() == 2) v *= 1.0 + a * std::sin(M_PI * ys) * std::sin(M_PI * ys);
                return v;
            }
            case Kind::cospi: return a * std::cos(M_PI * xs) + b;
            case Kind::linear: return a + b * xs;
        }
        return a;
    }
};

/// Everything a run needs, parsed from the sectioned config text.
struct RunConfig {
    ForchheimerLaw law = ForchheimerLaw::two_term(1.0, 1.0);
    double lambda = 1.0;
    double t_end = 1.0;
    PhiPreset phi;
    U0Preset u0;
    bool mms_source = false; // linear-mode manufactured source
    int dim = 1;
    std::vector<double> lengths{1.0};
    std::vector<int> cells{64};
    SolverConfig solver;

    std::shared_ptr<const Grid> make_grid() const {
        if (dim == 1) return std::make_shared<Grid>(Grid::interval(lengths[0], cells[0]));
        return std::make_shared<Grid>(
            Grid::rectangle(lengths[0], lengths[1], cells[0], cells[1]));
    }

    ProblemSetup make_setup() const {
        auto grid = make_grid();
        ProblemSetup s{law, lambda, grid,
                       DiscreteField::sample(grid,
                                             [&](double x, double y) {
                                                 return u0.value(x, y, *grid);
                                             }),
                       [phi = phi](const BoundaryFace&, double t) { return phi.value(t); },
                       std::nullopt, t_end};
        if (mms_source)
            s.source = [](double x, double, double t) {
                return (M_PI * M_PI - 1.0) * std::exp(-t) * std::cos(M_PI * x);
            };
        return s;
    }
};

namespace detail {
inline std::vector<double> parse_doubles(const std::string& text) {
    std::istringstream in(text);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
} // namespace detail

/// Sectioned key = value text: [law], [problem], [grid], [solver], [output].
/// Returns the parsed key map as well so callers can read extra keys.
inline std::map<std::string, std::string> parse_config_map(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parameter_error("config: expected key = value, got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        kv[section + "." + key] = detail::trim(line.substr(eq + 1));
    }
    return kv;
}

inline RunConfig parse_run_config(const std::string& text) {
    const auto kv = parse_config_map(text);
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    auto require = [&](const std::string& key) {
        auto v = get(key);
        if (!v) throw parameter_error("config: missing required key '" + key + "'");
        return *v;
    };

    RunConfig rc;

    const auto exps = detail::parse_doubles(require("law.exponents"));
    const auto coefs = detail::parse_doubles(require("law.coefficients"));
    rc.law = ForchheimerLaw(exps, coefs);

    rc.lambda = std::stod(require("problem.lambda"));
    rc.t_end = std::stod(require("problem.t_end"));

    {
        std::istringstream u0(require("problem.u0"));
        std::string kind;
        u0 >> kind;
        if (kind == "constant") { rc.u0.kind = U0Preset::Kind::constant; u0 >> rc.u0.a; }
        else if (kind == "sinsq") { rc.u0.kind = U0Preset::Kind::sinsq; u0 >> rc.u0.a; }
        else if (kind == "cospi") { rc.u0.kind = U0Preset::Kind::cospi; u0 >> rc.u0.a >> rc.u0.b; }
        else if (kind == "linear") { rc.u0.kind = U0Preset::Kind::linear; u0 >> rc.u0.a >> rc.u0.b; }
        else throw parameter_error("config: unknown u0 preset '" + kind + "'");
    }
    {
        std::istringstream phi(require("problem.phi"));
        std::string kind;
        phi >> kind;
        if (kind == "constant") {
            rc.phi.kind = PhiPreset::Kind::constant;
            phi >> rc.phi.constant;
        } else if (kind == "sinusoidal") {
            rc.phi.kind = PhiPreset::Kind::sinusoidal;
            phi >> rc.phi.mean >> rc.phi.amp >> rc.phi.freq >> rc.phi.phase;
        } else if (kind == "piecewise") {
            rc.phi.kind = PhiPreset::Kind::piecewise;
            double t, v;
            while (phi >> t >> v) {
                rc.phi.knot_times.push_back(t);
                rc.phi.knot_values.push_back(v);
            }
            if (rc.phi.knot_times.empty())
                throw parameter_error("config: piecewise phi needs (t, value) pairs");
        } else {
            throw parameter_error("config: unknown phi preset '" + kind + "'");
        }
    }
    if (auto src = get("problem.source")) {
        if (*src == "mms_linear") rc.mms_source = true;
        else if (*src != "none")
            throw parameter_error("config: unknown source preset '" + *src + "'");
    }

    rc.dim = std::stoi(require("grid.dim"));
    rc.lengths = detail::parse_doubles(require("grid.lengths"));
    const auto cell_vals = detail::parse_doubles(require("grid.cells"));
    rc.cells.clear();
    for (double c : cell_vals) rc.cells.push_back(static_cast<int>(c));
    if (rc.dim < 1 || rc.dim > 2 || static_cast<int>(rc.lengths.size()) < rc.dim ||
        static_cast<int>(rc.cells.size()) < rc.dim)
        throw parameter_error("config: grid section needs dim-many lengths and cells");

    if (auto v = get("solver.dt_initial")) rc.solver.dt_initial = std::stod(*v);
    if (auto v = get("solver.dt_min")) rc.solver.dt_min = std::stod(*v);
    if (auto v = get("solver.dt_max")) rc.solver.dt_max = std::stod(*v);
    if (auto v = get("solver.picard_tol")) rc.solver.picard_tol = std::stod(*v);
    if (auto v = get("solver.picard_max_iters")) rc.solver.picard_max_iters = std::stoi(*v);
    if (auto v = get("solver.eps_floor")) rc.solver.eps_floor = std::stod(*v);

    if (auto v = get("output.snapshot_times")) {
        rc.solver.snapshot_times = detail::parse_doubles(*v);
    } else if (auto n = get("output.snapshot_count")) {
        const int count = std::stoi(*n);
        if (count < 2) throw parameter_error("config: snapshot_count must be >= 2");
        for (int k = 0; k < count; ++k)
            rc.solver.snapshot_times.push_back(rc.t_end * k / (count - 1.0));
    } else {
        for (int k = 0; k < 9; ++k) rc.solver.snapshot_times.push_back(rc.t_end * k / 8.0);
    }

    rc.solver.validate();
    return rc;
}

} // namespace forch

#endif
