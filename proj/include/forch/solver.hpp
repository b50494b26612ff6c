#ifndef FORCH_SOLVER_HPP
#define FORCH_SOLVER_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "forch/constitutive.hpp"
#include "forch/errors.hpp"
#include "forch/grid.hpp"
#include "forch/norms.hpp"

namespace forch {

/// One face of the domain boundary: owning cell, its inward neighbor, and
/// the face footprint.
struct BoundaryFace {
    int cell = 0;
    int neighbor = 0; // next cell inward, for face-value extrapolation
    double area = 1.0;
    double x = 0.0, y = 0.0; // face center
    int side = 0;            // 0 x-, 1 x+, 2 y-, 3 y+
};

inline std::vector<BoundaryFace> boundary_faces(const Grid& g) {
    std::vector<BoundaryFace> faces;
    if (g.dim() == 1) {
        faces.push_back({g.index(0), g.index(1), 1.0, 0.0, 0.0, 0});
        faces.push_back({g.index(g.nx() - 1), g.index(g.nx() - 2), 1.0, g.lx(), 0.0, 1});
        return faces;
    }
    for (int j = 0; j < g.ny(); ++j) {
        faces.push_back({g.index(0, j), g.index(1, j), g.hy(), 0.0, g.center_y(j), 0});
        faces.push_back({g.index(g.nx() - 1, j), g.index(g.nx() - 2, j), g.hy(), g.lx(),
                         g.center_y(j), 1});
    }
    for (int i = 0; i < g.nx(); ++i) {
        faces.push_back({g.index(i, 0), g.index(i, 1), g.hx(), g.center_x(i), 0.0, 2});
        faces.push_back({g.index(i, g.ny() - 1), g.index(i, g.ny() - 2), g.hx(), g.center_x(i),
                         g.ly(), 3});
    }
    return faces;
}

using BoundaryFlux = std::function<double(const BoundaryFace&, double)>; // phi(face, t)
using SourceField = std::function<double(double, double, double)>;       // f(x, y, t)

struct ProblemSetup {
    ForchheimerLaw law = ForchheimerLaw::two_term(1.0, 1.0);
    double lambda = 1.0;
    std::shared_ptr<const Grid> grid;
    DiscreteField u0;
    BoundaryFlux phi;
    std::optional<SourceField> source;
    double t_end = 1.0;

    void validate() const {
        if (!(lambda > 0.0 && lambda <= 1.0))
            throw parameter_error("ProblemSetup: lambda must lie in (0,1]");
        if (!grid) throw parameter_error("ProblemSetup: missing grid");
        if (!u0.nonnegative()) throw parameter_error("ProblemSetup: u0 must be nonnegative");
        if (!phi) throw parameter_error("ProblemSetup: missing boundary flux");
        if (!(t_end > 0.0)) throw parameter_error("ProblemSetup: t_end must be positive");
    }
};

struct SolverConfig {
    double dt_initial = 1e-3;
    double dt_min = 1e-9;
    double dt_max = 0.1;
    double picard_tol = 1e-12;
    int picard_max_iters = 60;
    double eps_floor = 1e-12;
    std::vector<double> snapshot_times;
    bool record_every_step = false; // snapshot every accepted step (test instrumentation)

    void validate() const {
        if (!(dt_min > 0.0 && dt_min <= dt_initial && dt_initial <= dt_max))
            throw parameter_error("SolverConfig: need 0 < dt_min <= dt_initial <= dt_max");
        if (!(picard_tol > 0.0)) throw parameter_error("SolverConfig: picard_tol must be positive");
        if (picard_max_iters < 1) throw parameter_error("SolverConfig: picard_max_iters >= 1");
    }
};

struct StepDiagnostics {
    int step = 0;
    double t = 0.0;  // time at end of step
    double dt = 0.0;
    int picard_iters = 0;
    double mass = 0.0;          // int u^lambda
    double boundary_flux = 0.0; // oint phi u_f^lambda
    double source_mass = 0.0;   // int f
    double balance_residual = 0.0;
};

struct RunRecord {
    SpaceTimeTrace snapshots;
    std::vector<StepDiagnostics> diagnostics;
    bool floored = false;
    int rejected_steps = 0;
};

namespace detail {

inline double face_gradient_mag_1d(const DiscreteField& u, int i_right, double hx) {
    return std::abs(u[i_right] - u[i_right - 1]) / hx;
}

/// |grad u| at the x-face between (i-1,j) and (i,j): normal difference plus
/// tangential average.
inline double face_gradient_mag_x(const DiscreteField& u, int i, int j) {
    const Grid& g = u.grid();
    const double gn = (u.at(i, j) - u.at(i - 1, j)) / g.hx();
    const double gt = 0.5 * (cell_dy(u, i, j) + cell_dy(u, i - 1, j));
    return std::hypot(gn, gt);
}

inline double face_gradient_mag_y(const DiscreteField& u, int i, int j) {
    const Grid& g = u.grid();
    const double gn = (u.at(i, j) - u.at(i, j - 1)) / g.hy();
    const double gt = 0.5 * (cell_dx(u, i, j) + cell_dx(u, i, j - 1));
    return std::hypot(gn, gt);
}

struct InteriorFace {
    int left = 0, right = 0;
    double coeff = 0.0; // K_f * area / h, refreshed each Picard pass
    double area_over_h = 0.0;
    bool x_dir = true;
    int i = 0, j = 0;
};

inline std::vector<InteriorFace> interior_faces(const Grid& g) {
    std::vector<InteriorFace> faces;
    if (g.dim() == 1) {
        for (int i = 1; i < g.nx(); ++i)
            faces.push_back({g.index(i - 1), g.index(i), 0.0, 1.0 / g.hx(), true, i, 0});
        return faces;
    }
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i)
            faces.push_back(
                {g.index(i - 1, j), g.index(i, j), 0.0, g.hy() / g.hx(), true, i, j});
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            faces.push_back(
                {g.index(i, j - 1), g.index(i, j), 0.0, g.hx() / g.hy(), false, i, j});
    return faces;
}

} // namespace detail

/// Implicit time integrator for (u^lambda)_t = div(K(|grad u|) grad u) + f
/// with Robin flux K du/dnu + phi u^lambda = 0.
///
/// Each backward-Euler step freezes K at the current iterate (Picard) and
/// Newton-linearizes the cellwise u^lambda term, so every inner solve is a
/// symmetric positive definite sparse system.
class Solver {
public:
    Solver(ProblemSetup setup, SolverConfig config)
        : setup_(std::move(setup)), config_(std::move(config)),
          ifaces_(detail::interior_faces(*setup_.grid)),
          bfaces_(boundary_faces(*setup_.grid)) {
        setup_.validate();
        config_.validate();
    }

    const ProblemSetup& setup() const { return setup_; }
    const SolverConfig& config() const { return config_; }

    /// One accepted backward-Euler step; throws solver_error on Picard
    /// failure (caller handles rejection).
    DiscreteField step(const DiscreteField& u_n, double t, double dt, int* iters_out = nullptr,
                       double* boundary_flux_out = nullptr, double* source_mass_out = nullptr) {
        const Grid& g = *setup_.grid;
        const int ncells = g.cell_count();
        const double vol = g.cell_volume();
        const double lambda = setup_.lambda;
        const double t_new = t + dt;

        DiscreteField u = u_n;
        clamp_floor(u);

        Eigen::SparseMatrix<double> A(ncells, ncells);
        Eigen::VectorXd b(ncells);
        std::vector<Eigen::Triplet<double>> trip;

        int iters = 0;
        bool converged = false;
        for (int k = 0; k < config_.picard_max_iters; ++k) {
            refresh_face_diffusivity(u);

            trip.clear();
            b.setZero();
            for (int c = 0; c < ncells; ++c) {
                const double uc = std::max(u[c], config_.eps_floor);
                const double dpow = lambda * std::pow(uc, lambda - 1.0);
                const double diag_t = vol / dt * dpow;
                trip.emplace_back(c, c, diag_t);
                // Newton residual pieces of (u^lambda - u_n^lambda) vol/dt
                b[c] += vol / dt * (dpow * uc - std::pow(uc, lambda) +
                                    std::pow(std::max(u_n[c], config_.eps_floor), lambda));
                if (setup_.source) {
                    const int i = c % g.nx(), j = c / g.nx();
                    b[c] += vol * (*setup_.source)(g.center_x(i),
                                                   g.dim() == 2 ? g.center_y(j) : 0.0, t_new);
                }
            }
            for (const auto& f : ifaces_) {
                trip.emplace_back(f.left, f.left, f.coeff);
                trip.emplace_back(f.right, f.right, f.coeff);
                trip.emplace_back(f.left, f.right, -f.coeff);
                trip.emplace_back(f.right, f.left, -f.coeff);
            }
            for (const auto& bf : bfaces_) {
                const double phi = setup_.phi(bf, t_new);
                if (phi == 0.0) continue;
                const double uf =
                    std::max(extrapolated(u[bf.cell], u[bf.neighbor]), 0.0);
                if (phi > 0.0) {
                    // outflow: implicit in the owning cell, lagged neighbor part
                    const double ufq = std::max(uf, config_.eps_floor);
                    const double dflux = phi * bf.area * lambda * std::pow(ufq, lambda - 1.0) * 1.5;
                    trip.emplace_back(bf.cell, bf.cell, dflux);
                    b[bf.cell] += -phi * bf.area * std::pow(uf, lambda) + dflux * u[bf.cell];
                } else {
                    // inflow: explicit within the Picard loop (keeps SPD)
                    b[bf.cell] += -phi * bf.area * std::pow(uf, lambda);
                }
            }

            A.setFromTriplets(trip.begin(), trip.end());
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
            if (ldlt.info() != Eigen::Success)
                throw solver_error("step: LDLT factorization failed");
            Eigen::VectorXd x = ldlt.solve(b);

            double max_rel = 0.0;
            for (int c = 0; c < ncells; ++c) {
                if (x[c] < config_.eps_floor) floored_ = true;
                const double nv = std::max(x[c], config_.eps_floor);
                max_rel = std::max(max_rel, std::abs(nv - u[c]) / std::max(std::abs(u[c]), 1.0));
                u[c] = nv;
            }
            ++iters;
            if (max_rel < config_.picard_tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            std::ostringstream msg;
            msg << "step: Picard failed to converge (t=" << t << ", dt=" << dt << ", iters="
                << iters << ")";
            throw solver_error(msg.str());
        }

        if (iters_out) *iters_out = iters;
        if (boundary_flux_out) {
            double total = 0.0;
            for (const auto& bf : bfaces_) {
                const double uf = std::max(extrapolated(u[bf.cell], u[bf.neighbor]), 0.0);
                total += setup_.phi(bf, t_new) * std::pow(uf, lambda) * bf.area;
            }
            *boundary_flux_out = total;
        }
        if (source_mass_out) {
            double total = 0.0;
            if (setup_.source)
                for (int c = 0; c < ncells; ++c) {
                    const int i = c % g.nx(), j = c / g.nx();
                    total += vol * (*setup_.source)(g.center_x(i),
                                                    g.dim() == 2 ? g.center_y(j) : 0.0, t_new);
                }
            *source_mass_out = total;
        }
        u.set_time(t_new);
        return u;
    }

    /// Integrates to t_end with halve-on-reject / grow-after-easy-accepts
    /// time adaptivity; snapshots are linear-in-time interpolants.
    RunRecord run() {
        RunRecord rec;
        const double lambda = setup_.lambda;
        const double vol = setup_.grid->cell_volume();

        DiscreteField u = setup_.u0;
        u.set_time(0.0);
        clamp_floor(u);

        std::vector<double> snap_times = config_.snapshot_times;
        std::sort(snap_times.begin(), snap_times.end());
        std::size_t next_snap = 0;
        while (next_snap < snap_times.size() && snap_times[next_snap] <= 0.0) {
            DiscreteField s = u;
            s.set_time(snap_times[next_snap]);
            if (snap_times[next_snap] == 0.0) rec.snapshots.push(std::move(s));
            ++next_snap;
        }
        if (config_.record_every_step && rec.snapshots.empty()) rec.snapshots.push(u);

        double t = 0.0;
        double dt = config_.dt_initial;
        int easy_accepts = 0;
        int step_no = 0;
        double mass_prev = mass_of(u, lambda, vol);

        while (t < setup_.t_end - 1e-14 * setup_.t_end) {
            const double dt_eff = std::min(dt, setup_.t_end - t);
            int iters = 0;
            double bflux = 0.0, smass = 0.0;
            DiscreteField u_new(setup_.grid);
            try {
                u_new = step(u, t, dt_eff, &iters, &bflux, &smass);
            } catch (const solver_error&) {
                ++rec.rejected_steps;
                dt *= 0.5;
                easy_accepts = 0;
                if (dt < config_.dt_min) {
                    std::ostringstream msg;
                    msg << "run: dt underflow at t=" << t << " after " << rec.rejected_steps
                        << " rejections (dt=" << dt << " < dt_min=" << config_.dt_min << ")";
                    throw solver_error(msg.str());
                }
                continue;
            }

            const double t_new = t + dt_eff;
            const double mass_new = mass_of(u_new, lambda, vol);

            StepDiagnostics d;
            d.step = ++step_no;
            d.t = t_new;
            d.dt = dt_eff;
            d.picard_iters = iters;
            d.mass = mass_new;
            d.boundary_flux = bflux;
            d.source_mass = smass;
            d.balance_residual = (mass_new - mass_prev) / dt_eff + bflux - smass;
            rec.diagnostics.push_back(d);

            while (next_snap < snap_times.size() && snap_times[next_snap] <= t_new + 1e-14) {
                const double ts = snap_times[next_snap];
                const double w = (ts - t) / dt_eff;
                DiscreteField s(setup_.grid, ts);
                for (int c = 0; c < u.grid().cell_count(); ++c)
                    s[c] = (1.0 - w) * u[c] + w * u_new[c];
                rec.snapshots.push(std::move(s));
                ++next_snap;
            }
            if (config_.record_every_step) rec.snapshots.push(u_new);

            u = std::move(u_new);
            t = t_new;
            mass_prev = mass_new;

            if (iters <= std::max(4, config_.picard_max_iters / 4)) {
                if (++easy_accepts >= 3) {
                    dt = std::min(dt * 1.2, config_.dt_max);
                    easy_accepts = 0;
                }
            } else {
                easy_accepts = 0;
            }
        }
        rec.floored = floored_;
        return rec;
    }

private:
    static double mass_of(const DiscreteField& u, double lambda, double vol) {
        double m = 0.0;
        for (double v : u.values()) m += std::pow(v, lambda) * vol;
        return m;
    }

    void clamp_floor(DiscreteField& u) {
        for (double& v : u.values())
            if (v < config_.eps_floor) {
                v = config_.eps_floor;
                floored_ = true;
            }
    }

    void refresh_face_diffusivity(const DiscreteField& u) {
        const Grid& g = u.grid();
        for (auto& f : ifaces_) {
            double mag;
            if (g.dim() == 1)
                mag = detail::face_gradient_mag_1d(u, f.right, g.hx());
            else
                mag = f.x_dir ? detail::face_gradient_mag_x(u, f.i, f.j)
                              : detail::face_gradient_mag_y(u, f.i, f.j);
            f.coeff = setup_.law.eval_K(mag) * f.area_over_h;
        }
    }

    ProblemSetup setup_;
    SolverConfig config_;
    std::vector<detail::InteriorFace> ifaces_;
    std::vector<BoundaryFace> bfaces_;
    bool floored_ = false;
};

inline RunRecord run(ProblemSetup setup, SolverConfig config) {
    Solver solver(std::move(setup), std::move(config));
    return solver.run();
}

} // namespace forch

#endif
