#ifndef FORCH_NORMS_HPP
#define FORCH_NORMS_HPP

#include <cmath>
#include <vector>

#include "forch/errors.hpp"
#include "forch/grid.hpp"

namespace forch {

constexpr double kEpsFloor = 1e-12; // positivity floor shared with the solver

/// Midpoint-rule integral of |u|^alpha; exact for cellwise-constant fields.
/// Returns the integral itself, or its alpha-th root when take_root is set.
inline double lp_norm(const DiscreteField& f, double alpha, bool take_root = false) {
    if (!(alpha > 0.0)) throw parameter_error("lp_norm: alpha must be positive");
    const double vol = f.grid().cell_volume();
    double acc = 0.0;
    for (double v : f.values()) acc += std::pow(std::abs(v), alpha) * vol;
    return take_root ? std::pow(acc, 1.0 / alpha) : acc;
}

/// Boundary face value by one-sided linear extrapolation from the two
/// nearest cell centers: (3 u1 - u2)/2.
inline double extrapolated(double u1, double u2) { return 1.5 * u1 - 0.5 * u2; }

/// int_Gamma |u|^alpha dsigma with extrapolated face values.  In 1D the
/// boundary is the two endpoints (unit weight each).
inline double boundary_integral(const DiscreteField& f, double alpha) {
    if (!(alpha > 0.0)) throw parameter_error("boundary_integral: alpha must be positive");
    const Grid& g = f.grid();
    auto term = [alpha](double v) { return std::pow(std::abs(v), alpha); };
    double acc = 0.0;
    if (g.dim() == 1) {
        acc += term(extrapolated(f.at(0), f.at(1)));
        acc += term(extrapolated(f.at(g.nx() - 1), f.at(g.nx() - 2)));
        return acc;
    }
    for (int j = 0; j < g.ny(); ++j) {
        acc += term(extrapolated(f.at(0, j), f.at(1, j))) * g.hy();
        acc += term(extrapolated(f.at(g.nx() - 1, j), f.at(g.nx() - 2, j))) * g.hy();
    }
    for (int i = 0; i < g.nx(); ++i) {
        acc += term(extrapolated(f.at(i, 0), f.at(i, 1))) * g.hx();
        acc += term(extrapolated(f.at(i, g.ny() - 1), f.at(i, g.ny() - 2))) * g.hx();
    }
    return acc;
}

namespace detail {
/// Central-difference d/dx at a cell center, one-sided at the ends.
inline double cell_dx(const DiscreteField& f, int i, int j) {
    const Grid& g = f.grid();
    if (i == 0) return (f.at(1, j) - f.at(0, j)) / g.hx();
    if (i == g.nx() - 1) return (f.at(i, j) - f.at(i - 1, j)) / g.hx();
    return (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.hx());
}
inline double cell_dy(const DiscreteField& f, int i, int j) {
    const Grid& g = f.grid();
    if (j == 0) return (f.at(i, 1) - f.at(i, 0)) / g.hy();
    if (j == g.ny() - 1) return (f.at(i, j) - f.at(i, j - 1)) / g.hy();
    return (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * g.hy());
}
} // namespace detail

/// int_U |grad u|^p u^w dx by face quadrature: two-point normal differences
/// (one-sided at the boundary), tangential averages in 2D, face-averaged
/// weight values.  The per-direction face sums each tile U, so the result
/// averages the dim directional estimates.  With w = 0 this is the plain
/// W^{1,p} seminorm raised to p.
///
/// Negative w with zero cells falls back to the positivity floor; *floored
/// reports whether that happened.
inline double grad_norm(const DiscreteField& f, double p, double weight_exponent,
                        bool* floored = nullptr) {
    if (!(p > 0.0)) throw parameter_error("grad_norm: p must be positive");
    const Grid& g = f.grid();
    const double w = weight_exponent;
    bool hit_floor = false;
    auto weight = [&](double ubar) {
        if (w == 0.0) return 1.0;
        if (ubar < kEpsFloor && w < 0.0) {
            hit_floor = true;
            ubar = kEpsFloor;
        }
        return std::pow(std::abs(ubar), w);
    };

    double acc = 0.0;
    if (g.dim() == 1) {
        const double h = g.hx();
        // interior faces
        for (int i = 1; i < g.nx(); ++i) {
            const double grad = (f.at(i) - f.at(i - 1)) / h;
            acc += std::pow(std::abs(grad), p) * weight(0.5 * (f.at(i) + f.at(i - 1))) * h;
        }
        // boundary faces: one-sided slope, extrapolated weight, half weight
        const int n = g.nx();
        acc += std::pow(std::abs((f.at(1) - f.at(0)) / h), p) *
               weight(extrapolated(f.at(0), f.at(1))) * 0.5 * h;
        acc += std::pow(std::abs((f.at(n - 1) - f.at(n - 2)) / h), p) *
               weight(extrapolated(f.at(n - 1), f.at(n - 2))) * 0.5 * h;
        if (floored) *floored = hit_floor;
        return acc;
    }

    const double hx = g.hx(), hy = g.hy(), cellA = hx * hy;
    double acc_x = 0.0;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 1; i < g.nx(); ++i) {
            const double gn = (f.at(i, j) - f.at(i - 1, j)) / hx;
            const double gt = 0.5 * (detail::cell_dy(f, i, j) + detail::cell_dy(f, i - 1, j));
            acc_x += std::pow(std::hypot(gn, gt), p) *
                     weight(0.5 * (f.at(i, j) + f.at(i - 1, j))) * cellA;
        }
        const int n = g.nx();
        const double gl = (f.at(1, j) - f.at(0, j)) / hx;
        acc_x += std::pow(std::hypot(gl, detail::cell_dy(f, 0, j)), p) *
                 weight(extrapolated(f.at(0, j), f.at(1, j))) * 0.5 * cellA;
        const double gr = (f.at(n - 1, j) - f.at(n - 2, j)) / hx;
        acc_x += std::pow(std::hypot(gr, detail::cell_dy(f, n - 1, j)), p) *
                 weight(extrapolated(f.at(n - 1, j), f.at(n - 2, j))) * 0.5 * cellA;
    }
    double acc_y = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
        for (int j = 1; j < g.ny(); ++j) {
            const double gn = (f.at(i, j) - f.at(i, j - 1)) / hy;
            const double gt = 0.5 * (detail::cell_dx(f, i, j) + detail::cell_dx(f, i, j - 1));
            acc_y += std::pow(std::hypot(gn, gt), p) *
                     weight(0.5 * (f.at(i, j) + f.at(i, j - 1))) * cellA;
        }
        const int n = g.ny();
        const double gb = (f.at(i, 1) - f.at(i, 0)) / hy;
        acc_y += std::pow(std::hypot(gb, detail::cell_dx(f, i, 0)), p) *
                 weight(extrapolated(f.at(i, 0), f.at(i, 1))) * 0.5 * cellA;
        const double gt = (f.at(i, n - 1) - f.at(i, n - 2)) / hy;
        acc_y += std::pow(std::hypot(gt, detail::cell_dx(f, i, n - 1)), p) *
                 weight(extrapolated(f.at(i, n - 1), f.at(i, n - 2))) * 0.5 * cellA;
    }
    if (floored) *floored = hit_floor;
    return 0.5 * (acc_x + acc_y);
}

/// Cells whose centers lie in the Euclidean ball B_R(center); the discrete
/// realization of interior balls on rectangles.
inline std::vector<int> ball_cells(const Grid& g, double cx, double cy, double R) {
    std::vector<int> cells;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double dx = g.center_x(i) - cx;
            const double dy = g.dim() == 2 ? g.center_y(j) - cy : 0.0;
            if (dx * dx + dy * dy <= R * R) cells.push_back(g.index(i, j));
        }
    if (cells.empty()) throw parameter_error("ball_cells: ball contains no cell centers");
    return cells;
}

inline double ball_lp_integral(const DiscreteField& f, const std::vector<int>& cells,
                               double alpha) {
    const double vol = f.grid().cell_volume();
    double acc = 0.0;
    for (int c : cells) acc += std::pow(std::abs(f[c]), alpha) * vol;
    return acc;
}

inline double ball_max(const DiscreteField& f, const std::vector<int>& cells) {
    double m = -std::numeric_limits<double>::infinity();
    for (int c : cells) m = std::max(m, f[c]);
    return m;
}

/// Analytic measure of B_R in dimension n (1: segment, 2: disk).
inline double ball_measure(int n, double R) {
    if (n == 1) return 2.0 * R;
    if (n == 2) return M_PI * R * R;
    throw parameter_error("ball_measure: only n = 1, 2 realized");
}

} // namespace forch

#endif
