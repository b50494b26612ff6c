#ifndef FORCH_IO_HPP
#define FORCH_IO_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "forch/errors.hpp"
#include "forch/grid.hpp"
#include "forch/solver.hpp"

namespace forch {

/// 17 significant digits: enough for exact double round-trips.
inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Snapshot file: key,value header lines (dim, lengths, cells, time), then
/// a "values" marker and one cell value per line, row-major (x fastest).
inline void write_snapshot(const std::filesystem::path& path, const DiscreteField& f) {
    std::ofstream out(path);
    if (!out) throw parameter_error("write_snapshot: cannot open " + path.string());
    const Grid& g = f.grid();
    out << "dim," << g.dim() << "\n";
    out << "lengths," << format_full(g.lx());
    if (g.dim() == 2) out << "," << format_full(g.ly());
    out << "\ncells," << g.nx();
    if (g.dim() == 2) out << "," << g.ny();
    out << "\ntime," << format_full(f.time()) << "\nvalues\n";
    for (double v : f.values()) out << format_full(v) << "\n";
}

inline DiscreteField read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parameter_error("read_snapshot: cannot open " + path.string());
    int dim = 0, nx = 0, ny = 1;
    double lx = 0.0, ly = 1.0, time = 0.0;
    std::string line;
    while (std::getline(in, line)) {
        if (line == "values") break;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        std::string key;
        row >> key;
        if (key == "dim") row >> dim;
        else if (key == "lengths") { row >> lx; if (!(row >> ly)) ly = 1.0; }
        else if (key == "cells") { row >> nx; if (!(row >> ny)) ny = 1; }
        else if (key == "time") row >> time;
    }
    if (dim != 1 && dim != 2) throw parameter_error("read_snapshot: bad header in " + path.string());
    auto grid = std::make_shared<Grid>(dim == 1 ? Grid::interval(lx, nx)
                                                : Grid::rectangle(lx, ly, nx, ny));
    std::vector<double> values;
    values.reserve(grid->cell_count());
    double v;
    while (in >> v) values.push_back(v);
    return DiscreteField(grid, std::move(values), time);
}

inline void write_diagnostics(const std::filesystem::path& path,
                              const std::vector<StepDiagnostics>& diags) {
    std::ofstream out(path);
    if (!out) throw parameter_error("write_diagnostics: cannot open " + path.string());
    out << "step,t,dt,picard_iters,mass,flux\n";
    for (const auto& d : diags)
        out << d.step << "," << format_full(d.t) << "," << format_full(d.dt) << ","
            << d.picard_iters << "," << format_full(d.mass) << ","
            << format_full(d.boundary_flux) << "\n";
}

/// FNV-1a over raw bytes; stable fingerprint for config files.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parameter_error("read_file: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunManifest {
    std::string tool_version;
    std::string config_hash_hex;
    std::string created_utc;
    std::vector<std::string> files; // relative to the run directory
};

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw parameter_error("write_manifest: cannot open manifest in " + dir.string());
    out << "tool_version," << m.tool_version << "\n";
    out << "config_hash," << m.config_hash_hex << "\n";
    out << "created_utc," << m.created_utc << "\n";
    for (const auto& f : m.files) out << "file," << f << "\n";
}

inline RunManifest read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw parameter_error("read_manifest: no manifest in " + dir.string());
    RunManifest m;
    std::string line;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        const std::string key = line.substr(0, comma), val = line.substr(comma + 1);
        if (key == "tool_version") m.tool_version = val;
        else if (key == "config_hash") m.config_hash_hex = val;
        else if (key == "created_utc") m.created_utc = val;
        else if (key == "file") m.files.push_back(val);
    }
    return m;
}

/// Every referenced file must exist and the stored config hash must
/// recompute identically from the copied config.
inline bool validate_manifest(const std::filesystem::path& dir, std::string* why = nullptr) {
    const auto m = read_manifest(dir);
    for (const auto& f : m.files)
        if (!std::filesystem::exists(dir / f)) {
            if (why) *why = "missing file: " + f;
            return false;
        }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a(read_file(dir / "config.ini"))));
    if (m.config_hash_hex != hex) {
        if (why) *why = "config hash mismatch";
        return false;
    }
    return true;
}

/// First free variant of the requested directory: dir, dir-001, dir-002...
inline std::filesystem::path fresh_run_dir(const std::filesystem::path& requested) {
    if (!std::filesystem::exists(requested)) return requested;
    for (int k = 1; k < 1000; ++k) {
        char suffix[8];
        std::snprintf(suffix, sizeof(suffix), "-%03d", k);
        const auto candidate = requested.string() + suffix;
        if (!std::filesystem::exists(candidate)) return candidate;
    }
    throw parameter_error("fresh_run_dir: too many existing run directories for " +
                          requested.string());
}

} // namespace forch

#endif
