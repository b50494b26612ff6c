#ifndef FORCH_TRACE_CHECKS_HPP
#define FORCH_TRACE_CHECKS_HPP

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "forch/errors.hpp"
#include "forch/exponents.hpp"
#include "forch/grid.hpp"
#include "forch/norms.hpp"

namespace forch {

/// Two-sided comparison of one inequality instance.
struct InequalityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0; // lhs / rhs
    bool pass = false;
    std::vector<std::pair<std::string, double>> terms;
};

namespace detail {
inline InequalityReport make_report(double lhs, double rhs,
                                    std::vector<std::pair<std::string, double>> terms) {
    InequalityReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.ratio = rhs > 0.0 ? lhs / rhs : (lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    rep.pass = lhs <= rhs || rep.ratio <= 1.0 + 1e-12;
    rep.terms = std::move(terms);
    return rep;
}

/// int |u|^e dx for any real e (e = 0 gives |U|; negative e uses the
/// positivity floor on zero cells).
inline double power_integral(const DiscreteField& f, double e) {
    const double vol = f.grid().cell_volume();
    if (e == 0.0) return f.grid().domain_measure();
    double acc = 0.0;
    for (double v : f.values()) {
        double base = std::abs(v);
        if (e < 0.0 && base < kEpsFloor) base = kEpsFloor;
        acc += std::pow(base, e) * vol;
    }
    return acc;
}
} // namespace detail

/// Trace constants from the edge-averaging argument: each boundary piece is
/// bounded by a length-weighted interior average plus the corresponding
/// directional-derivative integral.
struct TraceConstants {
    double c1 = 0.0;
    double c2 = 0.0;
};

inline TraceConstants derived_trace_constants(const Grid& g) {
    if (g.dim() == 1) return {2.0 / g.lx(), 2.0};
    return {2.0 * (1.0 / g.lx() + 1.0 / g.ly()), 4.0};
}

/// General trace inequality:
///   int_G |u|^a <= eps int |u|^{a-s}|grad u|^p + c1 int |u|^a
///                + (c2 a)^{p/(p-1)} eps^{-1/(p-1)} int |u|^{a+(s-p)/(p-1)}.
inline InequalityReport check_trace_general(const DiscreteField& f, double alpha, double s,
                                            double p, double eps, TraceConstants c) {
    if (!(alpha >= s && s >= 0.0))
        throw precondition_error("check_trace_general: requires alpha >= s >= 0");
    if (!(alpha >= 1.0)) throw precondition_error("check_trace_general: requires alpha >= 1");
    if (!(p > 1.0)) throw precondition_error("check_trace_general: requires p > 1");
    if (!(eps > 0.0)) throw parameter_error("check_trace_general: eps must be positive");

    const double lhs = boundary_integral(f, alpha);
    const double grad_term = eps * grad_norm(f, p, alpha - s);
    const double bulk_term = c.c1 * lp_norm(f, alpha);
    const double young_term = std::pow(c.c2 * alpha, p / (p - 1.0)) *
                              std::pow(eps, -1.0 / (p - 1.0)) *
                              detail::power_integral(f, alpha + (s - p) / (p - 1.0));
    return detail::make_report(lhs, grad_term + bulk_term + young_term,
                               {{"grad", grad_term}, {"bulk", bulk_term}, {"young", young_term}});
}

/// Specialized trace inequality (p = 2-a, s = 2-delta):
///   int_G |u|^a <= 2 eps int |u|^{a+d-2}|grad u|^{2-a} + c_* ||u||_a^a
///                + D3 eps^{-1/(1-a)} ||u||_a^{a+mu0} + D4 eps^{-mu2} ||u||_a^{a+mu1}.
inline InequalityReport check_trace_specialized(const DiscreteField& f, const AlphaDerived& d,
                                                double eps) {
    if (!(eps > 0.0)) throw parameter_error("check_trace_specialized: eps must be positive");
    const ExponentTable& t = d.table;
    const double a = t.a, alpha = d.alpha;

    const double lhs = boundary_integral(f, alpha);
    const double grad_term = 2.0 * eps * grad_norm(f, 2.0 - a, alpha + t.delta - 2.0);
    const double norm_a = std::pow(lp_norm(f, alpha), 1.0 / alpha);
    const double t2 = d.c_star * std::pow(norm_a, alpha);
    const double t3 = d.D3 * std::pow(eps, -1.0 / (1.0 - a)) * std::pow(norm_a, alpha + t.mu0);
    const double t4 = d.D4 * std::pow(eps, -d.mu2) * std::pow(norm_a, alpha + d.mu1);
    return detail::make_report(lhs, grad_term + t2 + t3 + t4,
                               {{"grad", grad_term}, {"norm", t2}, {"D3", t3}, {"D4", t4}});
}

/// Parabolic multiplicative Sobolev inequality over a space-time trace:
///   (II u^{ka})^{1/(ka)} <= (c alpha^{2-a})^{1/(ka)}
///       * (II u^{a+d-a'} + II u^{a+d-2}|grad u|^{2-a})^{th/(a+d-a')}
///       * sup_t (I u^a)^{(1-th)/a}.
/// ball_radius switches to the B_R form with its (1+1/R)^{2-a} prefactor.
inline InequalityReport check_parabolic_sobolev(const SpaceTimeTrace& tr, const AlphaDerived& d,
                                                double c5,
                                                std::optional<double> ball_radius = std::nullopt) {
    tr.require_time_span();
    const ExponentTable& t = d.table;
    if (!(d.alpha >= 2.0 - t.delta && d.alpha > t.alpha_star))
        throw precondition_error(
            "check_parabolic_sobolev: requires alpha >= 2-delta and alpha > alpha_star");
    const double a = t.a, alpha = d.alpha;
    const double ka = d.kappa * alpha;

    const double lhs =
        std::pow(tr.time_integral([&](const DiscreteField& f) { return lp_norm(f, ka); }),
                 1.0 / ka);
    const double mixed =
        tr.time_integral([&](const DiscreteField& f) {
            return lp_norm(f, alpha + t.delta - a) +
                   grad_norm(f, 2.0 - a, alpha + t.delta - 2.0);
        });
    const double sup_a = tr.sup_over_time([&](const DiscreteField& f) { return lp_norm(f, alpha); });
    double prefactor = c5 * std::pow(alpha, 2.0 - a);
    if (ball_radius)
        prefactor = c5 * std::pow(1.0 + 1.0 / *ball_radius, 2.0 - a) * std::pow(alpha, 2.0 - a);
    const double rhs = std::pow(prefactor, 1.0 / ka) *
                       std::pow(mixed, d.theta_tilde / (alpha + t.delta - a)) *
                       std::pow(sup_a, (1.0 - d.theta_tilde) / alpha);
    return detail::make_report(lhs, rhs, {{"mixed", mixed}, {"sup", sup_a}});
}

// ---------------------------------------------------------------------------
// Calibration corpora and fit-then-verify constant fitting.
// ---------------------------------------------------------------------------

/// Random positive tensor-product polynomial of degree <= 4 per axis; the
/// constant offset dominates the coefficient mass, so u >= 1 on the domain.
inline DiscreteField random_polynomial_field(std::shared_ptr<const Grid> grid,
                                             std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const int deg = 4;
    std::vector<double> cx(deg + 1), cy(deg + 1);
    for (auto& c : cx) c = coef(rng);
    for (auto& c : cy) c = coef(rng);
    double mass = 0.0;
    for (int i = 0; i <= deg; ++i)
        for (int j = 0; j <= deg; ++j) mass += std::abs(cx[i] * cy[j]);
    const double offset = 1.0 + mass;

    const Grid& g = *grid;
    return DiscreteField::sample(grid, [&](double x, double y) {
        const double xs = x / g.lx();
        const double ys = g.dim() == 2 ? y / g.ly() : 0.0;
        double px = 0.0, py = 0.0;
        for (int i = deg; i >= 0; --i) px = px * xs + cx[i];
        if (g.dim() == 2)
            for (int j = deg; j >= 0; --j) py = py * ys + cy[j];
        else
            py = 1.0;
        return offset + px * py;
    });
}

inline std::vector<DiscreteField> polynomial_corpus(std::shared_ptr<const Grid> grid, int count,
                                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<DiscreteField> fields;
    fields.reserve(count);
    for (int k = 0; k < count; ++k) fields.push_back(random_polynomial_field(grid, rng));
    return fields;
}

/// Space-time corpus entry: spatial polynomial modulated by a positive
/// quadratic-in-time factor, sampled at n_snaps times on [0, T].
inline SpaceTimeTrace random_polynomial_trace(std::shared_ptr<const Grid> grid, int n_snaps,
                                              double T, std::mt19937_64& rng) {
    DiscreteField base = random_polynomial_field(grid, rng);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double q1 = coef(rng), q2 = coef(rng);
    const double q0 = 1.0 + std::abs(q1) + std::abs(q2);
    SpaceTimeTrace tr;
    for (int k = 0; k < n_snaps; ++k) {
        const double t = T * k / (n_snaps - 1.0);
        const double ts = t / T;
        const double factor = q0 + q1 * ts + q2 * ts * ts;
        DiscreteField f(base.grid_ptr(), t);
        for (int c = 0; c < base.grid().cell_count(); ++c) f[c] = factor * base[c];
        tr.push(std::move(f));
    }
    return tr;
}

/// Smallest c_* (times a 1.05 safety factor) for which every corpus field
/// passes the specialized trace inequality at every probe eps.  The RHS is
/// strictly increasing in c_*, so log-bisection applies.
inline double fit_trace_constant(const ExponentTable& t, double alpha, double U_measure,
                                 const std::vector<DiscreteField>& corpus,
                                 const std::vector<double>& eps_probes,
                                 double safety = 1.05) {
    struct Stats {
        double lhs, grad, norm_a;
    };
    std::vector<Stats> stats;
    stats.reserve(corpus.size());
    for (const auto& f : corpus) {
        Stats s;
        s.lhs = boundary_integral(f, alpha);
        s.grad = grad_norm(f, 2.0 - t.a, alpha + t.delta - 2.0);
        s.norm_a = std::pow(lp_norm(f, alpha), 1.0 / alpha);
        stats.push_back(s);
    }
    auto all_pass = [&](double c) {
        const AlphaDerived d = derive_alpha(t, alpha, c, U_measure);
        for (const auto& s : stats)
            for (double eps : eps_probes) {
                const double rhs = 2.0 * eps * s.grad + c * std::pow(s.norm_a, alpha) +
                                   d.D3 * std::pow(eps, -1.0 / (1.0 - t.a)) *
                                       std::pow(s.norm_a, alpha + t.mu0) +
                                   d.D4 * std::pow(eps, -d.mu2) *
                                       std::pow(s.norm_a, alpha + d.mu1);
                if (s.lhs > rhs) return false;
            }
        return true;
    };
    double lo = 1e-8, hi = 1.0;
    while (!all_pass(hi)) {
        lo = hi;
        hi *= 4.0;
        if (hi > 1e12) throw configuration_error("fit_trace_constant: no passing constant found");
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (all_pass(mid)) hi = mid; else lo = mid;
    }
    return hi * safety;
}

/// Same protocol for the parabolic Sobolev constant; the RHS scales as
/// c^{1/(kappa alpha)}, so the max corpus ratio converts directly.
inline double fit_sobolev_constant(const AlphaDerived& d,
                                   const std::vector<SpaceTimeTrace>& corpus,
                                   std::optional<double> ball_radius = std::nullopt,
                                   double safety = 1.05) {
    double worst = 0.0;
    for (const auto& tr : corpus) {
        const auto rep = check_parabolic_sobolev(tr, d, 1.0, ball_radius);
        worst = std::max(worst, rep.ratio);
    }
    if (worst <= 0.0) return 1.0;
    return std::pow(safety * worst, d.kappa * d.alpha);
}

} // namespace forch

#endif
