#ifndef FORCH_BOUNDS_HPP
#define FORCH_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forch/errors.hpp"
#include "forch/exponents.hpp"
#include "forch/grid.hpp"
#include "forch/norms.hpp"

namespace forch {

/// Comparison constants the underlying analysis proves to exist but never
/// pins down; defaults of 1 keep ratio reporting meaningful and every
/// report records the values used.
struct UniversalConstants {
    double C = 1.0;   // generic comparison constant in ratio-only checks
    double C2 = 1.0;  // differential-inequality constant (C3 = C2 mu1/alpha)
    double c9 = 1.0;
    double c10 = 1.0;
    double c11 = 1.0;
    double c12 = 1.0;
};

struct BoundReport {
    enum class Verdict { pass, ratio_only, precondition_failed };

    std::string bound_id;
    double alpha = 0.0;
    double measured = 0.0;
    double bound_value = std::numeric_limits<double>::infinity();
    std::string bound_reason; // set when the bound is infinite/unavailable
    double ratio = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<std::string, double>> constants_used;
    std::vector<std::pair<std::string, bool>> preconditions;
    Verdict verdict = Verdict::ratio_only;

    bool preconditions_ok() const {
        for (const auto& [name, ok] : preconditions)
            if (!ok) return false;
        return true;
    }

    void finalize(bool pass_grade) {
        if (std::isfinite(bound_value) && bound_value > 0.0) ratio = measured / bound_value;
        if (!preconditions_ok())
            verdict = Verdict::precondition_failed;
        else if (pass_grade && std::isfinite(bound_value) && ratio <= 1.0)
            verdict = Verdict::pass;
        else
            verdict = Verdict::ratio_only;
    }
};

inline const char* to_string(BoundReport::Verdict v) {
    switch (v) {
        case BoundReport::Verdict::pass: return "pass";
        case BoundReport::Verdict::ratio_only: return "ratio-only";
        default: return "precondition-failed";
    }
}

/// Sampled ||phi^-(t)||_{L^inf(Gamma)} with linear interpolation between
/// samples, plus the analytic time derivative of phi when the preset has
/// one (zero a.e. for piecewise-constant presets).
struct PhiMinusTrace {
    std::vector<double> times;
    std::vector<double> values;

    double horizon() const { return times.back(); }

    double at(double t) const {
        if (times.empty()) throw parameter_error("PhiMinusTrace: empty");
        if (t <= times.front()) return values.front();
        if (t >= times.back()) return values.back();
        auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t k = it - times.begin();
        const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
        return (1.0 - w) * values[k - 1] + w * values[k];
    }

    double sup(double T) const {
        double m = 0.0;
        for (std::size_t k = 0; k < times.size() && times[k] <= T + 1e-14; ++k)
            m = std::max(m, values[k]);
        return std::max(m, at(std::min(T, horizon())));
    }

    static PhiMinusTrace sample(const std::function<double(double)>& phi_value, double T,
                                int points = 2048) {
        PhiMinusTrace tr;
        tr.times.resize(points + 1);
        tr.values.resize(points + 1);
        for (int k = 0; k <= points; ++k) {
            tr.times[k] = T * k / points;
            tr.values[k] = std::max(0.0, -phi_value(tr.times[k]));
        }
        return tr;
    }
};

namespace detail {
/// int_0^t (1 + phim(tau)^mu4) dtau with the integrand interpolated
/// linearly between trace samples.
inline double damage_integral(const PhiMinusTrace& tr, double mu4, double t) {
    double acc = 0.0;
    auto integrand = [&](std::size_t k) { return 1.0 + std::pow(tr.values[k], mu4); };
    for (std::size_t k = 1; k < tr.times.size() && tr.times[k - 1] < t; ++k) {
        const double t0 = tr.times[k - 1];
        const double t1 = std::min(tr.times[k], t);
        const double i0 = integrand(k - 1);
        double i1;
        if (t1 == tr.times[k]) {
            i1 = integrand(k);
        } else {
            const double w = (t1 - t0) / (tr.times[k] - t0);
            i1 = (1.0 - w) * i0 + w * integrand(k);
        }
        acc += 0.5 * (i0 + i1) * (t1 - t0);
    }
    if (t > tr.horizon()) acc += (t - tr.horizon()) * (1.0 + std::pow(tr.values.back(), mu4));
    return acc;
}
} // namespace detail

struct AdmissibleHorizon {
    double T_star = 0.0;
    double T_half = 0.0;
    bool star_within_horizon = false; // crossing found inside the trace horizon
    bool half_within_horizon = false;
};

/// Largest horizons on which the L^alpha machinery applies:
///   T_star: damage integral stays below (1/C3)(1+int u0^alpha)^{-mu1/alpha},
///   T_half: same with the extra factor (1 - 2^{-mu1/alpha}).
/// Monotone bisection on the cumulative integral.
inline AdmissibleHorizon admissible_T(const AlphaDerived& d, double u0_alpha_integral,
                                      const PhiMinusTrace& phi_trace, double C2 = 1.0) {
    if (!(u0_alpha_integral >= 0.0))
        throw parameter_error("admissible_T: u0 integral must be nonnegative");
    const double C3 = C2 * d.mu1 / d.alpha;
    const double base = std::pow(1.0 + u0_alpha_integral, -d.mu1 / d.alpha);
    AdmissibleHorizon out;
    auto solve = [&](double threshold, bool* within) {
        if (!(threshold > 0.0)) { *within = true; return 0.0; }
        const double H = phi_trace.horizon();
        auto cum = [&](double t) { return detail::damage_integral(phi_trace, d.mu4, t); };
        // extend past the horizon with the final sample held constant
        double hi = std::max(H, 1.0);
        while (cum(hi) < threshold && hi < 1e18) hi *= 2.0;
        if (cum(hi) < threshold) { *within = false; return hi; }
        double lo = 0.0;
        for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (cum(mid) < threshold) lo = mid; else hi = mid;
        }
        const double T = 0.5 * (lo + hi);
        *within = T <= H + 1e-12;
        return T;
    };
    out.T_star = solve(base / C3, &out.star_within_horizon);
    out.T_half = solve((1.0 - std::pow(2.0, -d.mu1 / d.alpha)) * base / C3,
                       &out.half_within_horizon);
    return out;
}

/// The local-in-time L^alpha envelope
///   U_alpha(t) = [ (1+int u0^alpha)^{-mu1/alpha} - C3 int_0^t (1+phim^mu4) ]^{-alpha/mu1},
/// infinite at and beyond T_star.
inline double lalpha_bound(const AlphaDerived& d, double u0_alpha_integral,
                           const PhiMinusTrace& phi_trace, double t, double C2 = 1.0) {
    const double C3 = C2 * d.mu1 / d.alpha;
    const double base = std::pow(1.0 + u0_alpha_integral, -d.mu1 / d.alpha);
    const double rem = base - C3 * detail::damage_integral(phi_trace, d.mu4, t);
    if (!(rem > 0.0)) return std::numeric_limits<double>::infinity();
    return std::pow(rem, -d.alpha / d.mu1);
}

/// sup-norm and gradient-weighted space-time comparisons of the local
/// L^alpha estimate.  The first is pass-grade (constant-free up to the
/// factor 2), the second ratio-only (unknown comparison constant).
inline std::vector<BoundReport> check_lalpha(const SpaceTimeTrace& snaps, const AlphaDerived& d,
                                             const PhiMinusTrace& phi_trace,
                                             const UniversalConstants& uc = {}) {
    snaps.require_time_span();
    const double alpha = d.alpha;
    const double T_run = snaps.t_end();
    const double u0a = lp_norm(snaps.front(), alpha);
    const auto horizon = admissible_T(d, u0a, phi_trace, uc.C2);
    const bool within_half = T_run <= horizon.T_half * (1.0 + 1e-12);

    BoundReport sup;
    sup.bound_id = "Lalpha_local";
    sup.alpha = alpha;
    sup.measured =
        snaps.sup_over_time([&](const DiscreteField& f) { return lp_norm(f, alpha); });
    sup.bound_value = 2.0 * (1.0 + u0a);
    sup.constants_used = {{"C2", uc.C2}, {"T_half", horizon.T_half}};
    sup.preconditions = {{"run horizon <= T_half", within_half}};
    sup.finalize(true);

    BoundReport mixed;
    mixed.bound_id = "Lalpha_mixed";
    mixed.alpha = alpha;
    mixed.measured = snaps.time_integral([&](const DiscreteField& f) {
        return grad_norm(f, 2.0 - d.table.a, alpha + d.table.delta - 2.0);
    });
    mixed.bound_value = uc.C * (1.0 + u0a);
    mixed.constants_used = {{"C", uc.C}, {"C2", uc.C2}, {"T_half", horizon.T_half}};
    mixed.preconditions = {{"run horizon <= T_half", within_half}};
    mixed.finalize(false);

    return {sup, mixed};
}

/// Data needed by the gradient estimate beyond the snapshots: the uniform
/// boundary preset's positive part at t = 0 and the analytic time
/// derivative of phi.
struct PhiForGradient {
    double phi_plus_at_0 = 0.0;
    std::function<double(double)> phi_time_derivative; // may be zero a.e.
};

/// Energy + damage comparison for the W^{1,2-a} estimate at t = t_end.
inline std::vector<BoundReport> check_gradient(const SpaceTimeTrace& snaps,
                                               const AlphaDerived& d,
                                               const PhiMinusTrace& phi_trace,
                                               const PhiForGradient& phi_info,
                                               const UniversalConstants& uc = {}) {
    snaps.require_time_span();
    const ExponentTable& t = d.table;
    const double alpha = d.alpha;
    if (!(alpha > std::max(t.n * t.mu0, t.lambda + 1.0 + t.mu0)))
        throw precondition_error(
            "check_gradient: requires alpha > max{n mu0, lambda + 1 + mu0}");
    if (!d.mu3.has_value())
        throw precondition_error("check_gradient: mu3 undefined at this alpha");

    const double a = t.a, lambda = t.lambda;
    const double T = snaps.t_end();

    // measured: II u^{1-lambda} |(u^lambda)_t|^2 + int |grad u(T)|^{2-a},
    // time derivative of u^lambda by central differences of the snapshots
    const std::size_t m = snaps.size();
    std::vector<double> energy(m, 0.0);
    const double vol = snaps.front().grid().cell_volume();
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t ka = k == 0 ? 0 : k - 1;
        const std::size_t kb = k + 1 == m ? k : k + 1;
        const double dt = snaps[kb].time() - snaps[ka].time();
        double acc = 0.0;
        for (int c = 0; c < snaps[k].grid().cell_count(); ++c) {
            const double dl =
                (std::pow(snaps[kb][c], lambda) - std::pow(snaps[ka][c], lambda)) / dt;
            acc += std::pow(std::max(snaps[k][c], kEpsFloor), 1.0 - lambda) * dl * dl * vol;
        }
        energy[k] = acc;
    }
    double time_term = 0.0;
    for (std::size_t k = 1; k < m; ++k)
        time_term += 0.5 * (energy[k - 1] + energy[k]) * (snaps[k].time() - snaps[k - 1].time());
    const double grad_term = grad_norm(snaps.back(), 2.0 - a, 0.0);

    // E0 and K(T) from initial and boundary data
    const auto& u0 = snaps.front();
    const double E0 = lp_norm(u0, alpha) + grad_norm(u0, 2.0 - a, 0.0) +
                      phi_info.phi_plus_at_0 * boundary_integral(u0, lambda + 1.0);
    const double q = alpha / (alpha - lambda - 1.0);
    double phit_integral = 0.0;
    if (phi_info.phi_time_derivative) {
        const int steps = 4096;
        double prev = std::pow(std::abs(phi_info.phi_time_derivative(0.0)), q);
        for (int k = 1; k <= steps; ++k) {
            const double tk = T * k / steps;
            const double cur = std::pow(std::abs(phi_info.phi_time_derivative(tk)), q);
            phit_integral += 0.5 * (prev + cur) * (T / steps);
            prev = cur;
        }
        phit_integral *= u0.grid().boundary_measure();
    }
    const double Kt = 1.0 + std::pow(phi_trace.at(T), *d.mu3) + phit_integral;

    BoundReport rep;
    rep.bound_id = "grad";
    rep.alpha = alpha;
    rep.measured = time_term + grad_term;
    rep.bound_value = uc.C * (E0 + Kt);
    rep.constants_used = {{"C", uc.C}, {"E0", E0}, {"K(T)", Kt}, {"mu3", *d.mu3}};
    rep.preconditions = {{"alpha > max{n mu0, lambda+1+mu0}", true}};
    rep.finalize(false);
    return {rep};
}

/// Interior quasi-homogeneous L^inf comparison on B_{R/2} x (sigma T, T)
/// against the L^{alpha0} norm over B_R x (0, T).  The amplitude follows
/// the proof's (2 A_{R,T,sigma})^omega form with |Q0| = |B_R| T, which
/// coincides with the stated display.
inline std::vector<BoundReport> check_linf_interior(const SpaceTimeTrace& snaps,
                                                    const ExponentTable& t,
                                                    const InteriorSchedule& sched, double R,
                                                    double sigma,
                                                    const UniversalConstants& uc = {}) {
    snaps.require_time_span();
    const Grid& g = snaps.front().grid();
    if (!(sigma > 0.0 && sigma < 1.0))
        throw parameter_error("check_linf_interior: sigma must lie in (0,1)");
    const double cx = 0.5 * g.lx(), cy = g.dim() == 2 ? 0.5 * g.ly() : 0.0;
    const double half_min = g.dim() == 2 ? 0.5 * std::min(g.lx(), g.ly()) : 0.5 * g.lx();
    if (!(R > 0.0 && R < half_min))
        throw parameter_error("check_linf_interior: ball B_R must sit inside the domain");

    const double T = snaps.t_end();
    const double a = t.a;
    const double alpha0 = sched.alpha0;
    const auto inner_cells = ball_cells(g, cx, cy, R / 2.0);
    const auto outer_cells = ball_cells(g, cx, cy, R);

    double measured = 0.0;
    for (std::size_t k = 0; k < snaps.size(); ++k)
        if (snaps[k].time() >= sigma * T - 1e-14)
            measured = std::max(measured, ball_max(snaps[k], inner_cells));

    const double Y0 = std::pow(snaps.time_integral([&](const DiscreteField& f) {
                                   return ball_lp_integral(f, outer_cells, alpha0);
                               }),
                               1.0 / alpha0);

    const double BRT = ball_measure(g.dim(), R) * T;
    const double amplitude = std::pow(2.0, 11) * uc.c10 * std::pow(alpha0, 6.0 - a) *
                             std::pow(1.0 + 1.0 / R, 2.0) * std::pow(1.0 + BRT, 3.0) *
                             std::pow(1.0 + 1.0 / (sigma * T) + std::pow(R, a - 2.0), 2.0);
    const double Chat = std::pow(amplitude, sched.omega);

    BoundReport rep;
    rep.bound_id = "Linf_interior";
    rep.alpha = alpha0;
    rep.measured = measured;
    rep.bound_value =
        Chat * std::max(std::pow(Y0, sched.mu.value), std::pow(Y0, sched.nu.value));
    rep.constants_used = {{"c10", uc.c10},        {"omega", sched.omega},
                          {"mu", sched.mu.value}, {"nu", sched.nu.value},
                          {"Chat", Chat},         {"Y0", Y0}};
    rep.preconditions = {{"sigma in (0,1)", true}, {"B_R interior", true}};
    rep.finalize(false);
    return {rep};
}

/// The three global L^inf displays on U x (eps, T): against the measured
/// L^{beta0} norm, against the integrated envelope U_{beta0}, and against
/// the initial-data norm.
inline std::vector<BoundReport> check_linf_global(const SpaceTimeTrace& snaps,
                                                  const ExponentTable& t,
                                                  const MoserSchedule& sched, double eps,
                                                  const PhiMinusTrace& phi_trace,
                                                  const UniversalConstants& uc = {}) {
    snaps.require_time_span();
    const double T = snaps.t_end();
    if (!(eps > 0.0 && eps < std::min(1.0, T)))
        throw parameter_error("check_linf_global: eps must lie in (0, min{1,T})");

    const double beta0 = sched.beta0;
    const double omega = sched.omega;
    const double mu6 = std::max(2.0, t.mu0 / (1.0 - sched.theta_star));
    const double mu7 = 2.0 * mu4_of(t, sched.alpha0);
    const double omega1 = 2.0 * omega;
    const double omega2 = (1.0 + mu6) * omega;
    const double omega3 = mu7 * omega;
    const double phisup = phi_trace.sup(T);

    double measured = 0.0;
    for (std::size_t k = 0; k < snaps.size(); ++k)
        if (snaps[k].time() >= eps - 1e-14)
            measured = std::max(measured, snaps[k].max_value());

    const double mu_t = sched.mu_tilde.value, nu_t = sched.nu_tilde.value;
    const double common3 = std::pow(1.0 + phisup, omega3);

    std::vector<BoundReport> out;

    { // variant 1: measured L^{beta0} space-time norm
        BoundReport rep;
        rep.bound_id = "Linf_global_norm";
        rep.alpha = beta0;
        rep.measured = measured;
        const double Y0 = std::pow(
            snaps.time_integral([&](const DiscreteField& f) { return lp_norm(f, beta0); }),
            1.0 / beta0);
        rep.bound_value = uc.C * std::pow(1.0 + 1.0 / eps, omega1) * std::pow(1.0 + T, omega2) *
                          common3 * std::max(std::pow(Y0, mu_t), std::pow(Y0, nu_t));
        rep.constants_used = {{"C", uc.C},        {"omega1", omega1}, {"omega2", omega2},
                              {"omega3", omega3}, {"mu_tilde", mu_t}, {"nu_tilde", nu_t},
                              {"Y0", Y0}};
        rep.preconditions = {{"eps in (0, min{1,T})", true}};
        rep.finalize(false);
        out.push_back(std::move(rep));
    }

    const auto d_beta = derive_alpha(t, beta0);
    const double u0_beta = lp_norm(snaps.front(), beta0);
    const auto horizon = admissible_T(d_beta, u0_beta, phi_trace, uc.C2);

    { // variant 2: integrated envelope, needs T < T_star at beta0
        BoundReport rep;
        rep.bound_id = "Linf_global_envelope";
        rep.alpha = beta0;
        rep.measured = measured;
        const bool ok = T < horizon.T_star;
        rep.preconditions = {{"T < T_star(beta0)", ok}};
        if (ok) {
            const int steps = 4096;
            double integral = 0.0;
            double prev = lalpha_bound(d_beta, u0_beta, phi_trace, 0.0, uc.C2);
            for (int k = 1; k <= steps; ++k) {
                const double tk = T * k / steps;
                const double cur = lalpha_bound(d_beta, u0_beta, phi_trace, tk, uc.C2);
                integral += 0.5 * (prev + cur) * (T / steps);
                prev = cur;
            }
            rep.bound_value = uc.C * std::pow(eps, -omega1) * std::pow(1.0 + T, omega2) *
                              common3 *
                              std::max(std::pow(integral, mu_t / beta0),
                                       std::pow(integral, nu_t / beta0));
        } else {
            rep.bound_reason = "T >= T_star(beta0)";
        }
        rep.constants_used = {{"C", uc.C},        {"C2", uc.C2},      {"omega1", omega1},
                              {"omega2", omega2}, {"omega3", omega3}, {"T_star", horizon.T_star}};
        rep.finalize(false);
        out.push_back(std::move(rep));
    }

    { // variant 3: initial-data form, needs T <= T_half at beta0
        BoundReport rep;
        rep.bound_id = "Linf_global_data";
        rep.alpha = beta0;
        rep.measured = measured;
        const bool ok = T <= horizon.T_half * (1.0 + 1e-12);
        rep.preconditions = {{"T <= T_half(beta0)", ok}};
        if (ok) {
            const double u0_norm = std::pow(u0_beta, 1.0 / beta0);
            rep.bound_value = uc.C * std::pow(eps, -omega1) *
                              std::pow(1.0 + T, omega2 + nu_t / beta0) *
                              std::pow(1.0 + u0_norm, nu_t) * common3;
        } else {
            rep.bound_reason = "T > T_half(beta0)";
        }
        rep.constants_used = {{"C", uc.C},        {"C2", uc.C2},      {"omega1", omega1},
                              {"omega2", omega2}, {"omega3", omega3}, {"T_half", horizon.T_half}};
        rep.finalize(false);
        out.push_back(std::move(rep));
    }
    return out;
}

} // namespace forch

#endif
