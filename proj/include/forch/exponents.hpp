#ifndef FORCH_EXPONENTS_HPP
#define FORCH_EXPONENTS_HPP

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "forch/constitutive.hpp"
#include "forch/errors.hpp"

namespace forch {

/// Base exponents attached to a (law, lambda, dimension) triple:
///   delta = 1 - lambda,  alpha_star = n(a-delta)/(2-a),  mu0 = (a-delta)/(1-a).
/// The estimate machinery requires the super-critical regime a > delta.
struct ExponentTable {
    double lambda = 1.0;
    double delta = 0.0;
    double a = 0.5;
    double alpha_star = 0.0;
    double mu0 = 0.0;
    int n = 2;
    bool super_critical = false;
    bool dimension_warning = false; // n = 1 is outside the analysis; tolerated for solver tests
};

inline ExponentTable build_table(double lambda, const ForchheimerLaw& law, int n) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw parameter_error("build_table: lambda must lie in (0,1]");
    if (n < 1) throw parameter_error("build_table: n must be >= 1");
    if (law.is_linear_mode())
        throw parameter_error("build_table: constant law has no degeneracy exponent (N >= 1 required)");

    ExponentTable t;
    t.lambda = lambda;
    t.delta = 1.0 - lambda;
    t.a = law.degeneracy_a();
    t.n = n;
    t.alpha_star = n * (t.a - t.delta) / (2.0 - t.a);
    t.mu0 = (t.a - t.delta) / (1.0 - t.a);
    t.super_critical = t.a > t.delta;
    t.dimension_warning = (n == 1);
    return t;
}

inline void require_super_critical(const ExponentTable& t, const char* who) {
    if (!t.super_critical) {
        std::ostringstream msg;
        msg << who << ": requires the super-critical regime a > delta (a=" << t.a
            << ", delta=" << t.delta << ")";
        throw precondition_error(msg.str());
    }
}

/// kappa(alpha) = 1 + (2-a)/n - (a-delta)/alpha.  Defined for any alpha > 0.
inline double kappa_of(const ExponentTable& t, double alpha) {
    return 1.0 + (2.0 - t.a) / t.n - (t.a - t.delta) / alpha;
}

/// theta_tilde(alpha) = 1 / (1 + alpha(2-a) / (n(alpha+delta-a))).
inline double theta_tilde_of(const ExponentTable& t, double alpha) {
    if (!(alpha + t.delta - t.a > 0.0))
        throw precondition_error("theta_tilde: requires alpha + delta - a > 0");
    return 1.0 / (1.0 + alpha * (2.0 - t.a) / (t.n * (alpha + t.delta - t.a)));
}

inline double theta_of(const ExponentTable& t, double alpha) {
    return 1.0 / ((1.0 - t.a) * (alpha / t.alpha_star - 1.0));
}

inline double mu1_of(const ExponentTable& t, double alpha) {
    const double th = theta_of(t, alpha);
    return t.mu0 * (1.0 + th * (1.0 - t.a)) / (1.0 - th);
}

inline double mu4_of(const ExponentTable& t, double alpha) {
    const double th = theta_of(t, alpha);
    return (2.0 - t.a) / ((1.0 - t.a) * (1.0 - th));
}

inline double kappa_bar_of(const ExponentTable& t, double alpha) {
    return kappa_of(t, alpha) * alpha / (alpha + mu1_of(t, alpha));
}

/// Everything the specialized trace lemma and its consumers derive at a
/// fixed exponent alpha.  mu3 exists only when alpha > lambda + 1 + mu0.
struct AlphaDerived {
    ExponentTable table;
    double alpha = 0.0;
    double theta = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::optional<double> mu3;
    double mu4 = 0.0;
    double kappa = 0.0;
    double theta_tilde = 0.0;
    double kappa_bar = 0.0;
    double D3 = 0.0;
    double D4 = 0.0;
    double c_star = 1.0;
    double U_measure = 1.0;
    std::optional<double> d3; // from FittedKBounds; required by the E5 display
};

inline AlphaDerived derive_alpha(const ExponentTable& t, double alpha, double c_star = 1.0,
                                 double U_measure = 1.0,
                                 std::optional<double> d3 = std::nullopt) {
    require_super_critical(t, "derive_alpha");
    if (!(alpha >= 2.0 - t.delta)) {
        std::ostringstream msg;
        msg << "exponent condition violated: alpha >= 2 - delta fails (alpha=" << alpha
            << ", 2-delta=" << 2.0 - t.delta << ")";
        throw precondition_error(msg.str());
    }
    if (!(alpha > t.n * t.mu0)) {
        std::ostringstream msg;
        msg << "exponent condition violated: alpha > n*mu0 fails (alpha=" << alpha
            << ", n*mu0=" << t.n * t.mu0 << ")";
        throw precondition_error(msg.str());
    }
    if (!(c_star > 0.0) || !(U_measure > 0.0))
        throw parameter_error("derive_alpha: c_star and U_measure must be positive");

    AlphaDerived d;
    d.table = t;
    d.alpha = alpha;
    d.theta = theta_of(t, alpha);
    const double a = t.a, th = d.theta;
    d.mu1 = t.mu0 * (1.0 + th * (1.0 - a)) / (1.0 - th);
    d.mu2 = 1.0 / (1.0 - a) + th * (2.0 - a) / ((1.0 - th) * (1.0 - a));
    d.mu4 = d.mu2 + 1.0;
    if (alpha > t.lambda + 1.0 + t.mu0)
        d.mu3 = (2.0 - a) * alpha / ((1.0 - a) * (alpha - (t.lambda + 1.0 + t.mu0)));
    d.kappa = kappa_of(t, alpha);
    d.theta_tilde = theta_tilde_of(t, alpha);
    d.kappa_bar = d.kappa * alpha / (alpha + d.mu1);
    d.c_star = c_star;
    d.U_measure = U_measure;
    d.d3 = d3;

    const double cpow = (2.0 - a) * (1.0 + th * (1.0 - a)) / (1.0 - a);
    d.D3 = std::pow(2.0, th * (alpha + t.delta - a)) * std::pow(c_star, cpow) *
           std::pow(alpha, (2.0 - a) / (1.0 - a)) *
           std::pow(U_measure, (1.0 - a) * (alpha + t.mu0) * th / alpha);
    d.D4 = std::pow(2.0, th * (alpha + t.delta - a) / (1.0 - th)) *
           std::pow(c_star * alpha, cpow / (1.0 - th));
    return d;
}

/// x_* threshold of the exponent-ladder construction.
inline double x_star_of(const ExponentTable& t) {
    return (2.0 + std::sqrt((2.0 - t.a) * (2.0 + 1.0 / t.n) - 1.0)) / (1.0 - t.a);
}

/// A truncated infinite product together with a certified bound on the
/// absolute value of the dropped log-tail.
struct CertifiedProduct {
    double value = 1.0;
    double tail_log_bound = 0.0;
};

/// Controlling data for the interior iteration: exponents alpha0*kappa_*^j.
struct InteriorSchedule {
    double alpha0 = 0.0;
    double kappa_star = 0.0;
    CertifiedProduct mu;  // prod (alpha0 k^j - 2 + delta) / (alpha0 k^j)
    CertifiedProduct nu;  // prod (alpha0 k^j) / (alpha0 k^j + delta - a)
    double G = 1.0;       // sup of contiguous tail products of s_j/alpha_j
    double omega = 0.0;   // G * sum_{j>=1} (j+1)/alpha_j  (geometric closed form)
};

namespace detail {
/// sum_{j>=m} (j+1) x^j for 0 < x < 1.
inline double weighted_geom_tail(double x, int m) {
    return std::pow(x, m) * ((m + 1) * (1.0 - x) + x) / ((1.0 - x) * (1.0 - x));
}
} // namespace detail

inline InteriorSchedule build_interior_schedule(const ExponentTable& t, double alpha0,
                                                int j_max = 64, double tail_tol = 1e-10) {
    require_super_critical(t, "build_interior_schedule");
    if (!(alpha0 >= 2.0 - t.delta && alpha0 > t.alpha_star))
        throw precondition_error(
            "schedule precondition: interior iteration needs alpha0 >= 2-delta and alpha0 > alpha_star");

    InteriorSchedule s;
    s.alpha0 = alpha0;
    s.kappa_star = kappa_of(t, alpha0);
    const double k = s.kappa_star, q = 1.0 / k;
    const double dm2 = t.delta - 2.0, dma = t.delta - t.a;

    double log_mu = 0.0, log_nu = 0.0;
    bool mu_zero = false;
    for (int j = 0; j <= j_max; ++j) {
        const double aj = alpha0 * std::pow(k, j);
        if (aj + dm2 <= 0.0) { mu_zero = true; }
        else log_mu += std::log((aj + dm2) / aj);
        log_nu += std::log(aj / (aj + dma));
    }
    // Term-by-term bounds |ln f_j| <= c / k^j give geometric log-tails.
    const double tail_mu = (alpha0 + dm2 > 0.0)
                               ? (2.0 - t.delta) / (alpha0 + dm2) * std::pow(q, j_max + 1) / (1.0 - q)
                               : 0.0;
    const double tail_nu = (t.a - t.delta) / (alpha0 + dma) * std::pow(q, j_max + 1) / (1.0 - q);
    if (tail_mu > tail_tol || tail_nu > tail_tol)
        throw truncation_error("build_interior_schedule: product tail not certified below tail_tol");

    s.mu = {mu_zero ? 0.0 : std::exp(log_mu), tail_mu};
    s.nu = {std::exp(log_nu), tail_nu};
    // gamma_j = s_j/alpha_j = alpha_j/(alpha_j + delta - a) >= 1, so the sup of
    // contiguous products starting at j = 1 is the full tail product nu/gamma_0.
    const double gamma0 = alpha0 / (alpha0 + dma);
    s.G = s.nu.value / gamma0;
    s.omega = s.G * (1.0 / ((1.0 - q) * (1.0 - q)) - 1.0) / alpha0;
    return s;
}

/// The two controlling sequences of the global iteration plus every scalar
/// the global L-infinity displays need.
struct MoserSchedule {
    double alpha0 = 0.0;
    double x_star = 0.0;
    double theta_star = 0.0;
    double mu_star = 0.0;       // mu1 at alpha0
    double kappa_star = 0.0;    // kappa at alpha0
    double kappa_bar_star = 0.0;
    double kappa_hat_star = 0.0;
    double beta0 = 0.0;
    std::vector<double> alphas;
    std::vector<double> betas;
    CertifiedProduct mu_tilde; // prod (alpha_j + delta - 2)/(alpha_j + mu1(alpha_j))
    CertifiedProduct nu_tilde; // prod (alpha_j + mu1(alpha_j))/(alpha_j + delta - a)
    double G = 1.0;
    double omega = 0.0; // G * sum_{j>=1} (j+1)/alpha_j, truncated
    double omega_tail_bound = 0.0;
    InteriorSchedule interior;
};

namespace detail {
/// Solves x + mu1(x) = target on [lo, hi]; the map is strictly increasing
/// there by construction of the schedule threshold.
inline double invert_alpha_plus_mu1(const ExponentTable& t, double target, double lo, double hi) {
    auto f = [&](double x) { return x + mu1_of(t, x) - target; };
    double flo = f(lo);
    if (std::abs(flo) < 1e-14 * target) return lo;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (std::abs(fx) <= 1e-14 * target) return x;
        if (fx > 0.0) hi = x; else lo = x;
        // derivative of mu1 via theta chain rule; fall back to bisection
        const double h = 1e-7 * std::max(1.0, x);
        const double fp = (f(x + h) - f(x - h)) / (2.0 * h);
        double next = (fp > 0.0) ? x - fx / fp : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}
} // namespace detail

inline MoserSchedule build_schedule(const ExponentTable& t, double alpha0, int j_max = 64,
                                    double tail_tol = 1e-10) {
    require_super_critical(t, "build_schedule");
    const double xs = x_star_of(t);
    const double threshold = std::max(2.0 - t.delta, (1.0 + xs) * t.alpha_star);
    if (!(alpha0 > threshold)) {
        std::ostringstream msg;
        msg << "schedule precondition: alpha0 > max{2-delta, (1+x_*)alpha_*} fails (alpha0="
            << alpha0 << ", threshold=" << threshold << ")";
        throw precondition_error(msg.str());
    }
    if (j_max < 1) throw parameter_error("build_schedule: j_max must be >= 1");

    MoserSchedule s;
    s.alpha0 = alpha0;
    s.x_star = xs;
    s.theta_star = theta_of(t, alpha0);
    s.mu_star = mu1_of(t, alpha0);
    s.kappa_star = kappa_of(t, alpha0);
    s.kappa_bar_star = kappa_bar_of(t, alpha0);
    s.beta0 = alpha0 + s.mu_star;

    const double x_hat = alpha0 / t.alpha_star - 1.0;
    const double eps_hat =
        s.kappa_bar_star - 1.0 - (2.0 - t.a) / (t.n * ((1.0 - t.a) * x_hat - 1.0));
    s.kappa_hat_star = 1.0 + eps_hat;
    if (!(eps_hat > 0.0))
        throw precondition_error("schedule precondition: growth margin kappa_hat <= 1");

    s.alphas.resize(j_max + 1);
    s.betas.resize(j_max + 1);
    s.alphas[0] = alpha0;
    s.betas[0] = s.beta0;
    for (int j = 1; j <= j_max; ++j) {
        s.betas[j] = s.betas[j - 1] * s.kappa_bar_star;
        if (!std::isfinite(s.betas[j]))
            throw truncation_error("build_schedule: sequence overflow before tail certification");
        s.alphas[j] = detail::invert_alpha_plus_mu1(t, s.betas[j], s.alphas[j - 1], s.betas[j]);
    }

    double log_mu = 0.0, log_nu = 0.0;
    const double dm2 = t.delta - 2.0, dma = t.delta - t.a;
    for (int j = 0; j <= j_max; ++j) {
        const double aj = s.alphas[j];
        const double m1 = mu1_of(t, aj);
        log_mu += std::log((aj + dm2) / (aj + m1));
        log_nu += std::log((aj + m1) / (aj + dma));
    }
    const double q = 1.0 / s.kappa_hat_star;
    const double c_mu = (s.mu_star + 2.0 - t.delta) / (alpha0 + dm2);
    const double c_nu = (s.mu_star + t.a - t.delta) / (alpha0 + dma);
    const double geom = std::pow(q, j_max + 1) / (1.0 - q);
    s.mu_tilde = {std::exp(log_mu), c_mu * geom};
    s.nu_tilde = {std::exp(log_nu), c_nu * geom};
    if (s.mu_tilde.tail_log_bound > tail_tol || s.nu_tilde.tail_log_bound > tail_tol)
        throw truncation_error("build_schedule: product tail not certified below tail_tol at j_max");

    const double gamma0 = (alpha0 + s.mu_star) / (alpha0 + dma);
    s.G = s.nu_tilde.value / gamma0;
    double sum = 0.0;
    for (int j = 1; j <= j_max; ++j) sum += (j + 1) / s.alphas[j];
    s.omega_tail_bound = s.G * detail::weighted_geom_tail(q, j_max + 1) / alpha0;
    s.omega = s.G * sum;

    s.interior = build_interior_schedule(t, alpha0, j_max, tail_tol);
    return s;
}

/// How many schedule steps certify the product tails below tol, from the
/// geometric bound with ratio 1/kappa_hat.
inline int schedule_steps_for_tolerance(const ExponentTable& t, double alpha0, double tail_tol,
                                        int at_least = 40) {
    const double mu_star = mu1_of(t, alpha0);
    const double kappa_bar = kappa_bar_of(t, alpha0);
    const double x_hat = alpha0 / t.alpha_star - 1.0;
    const double eps_hat = kappa_bar - 1.0 - (2.0 - t.a) / (t.n * ((1.0 - t.a) * x_hat - 1.0));
    if (!(eps_hat > 0.0)) return at_least;
    const double q = 1.0 / (1.0 + eps_hat);
    const double c = std::max((mu_star + 2.0 - t.delta) / (alpha0 + t.delta - 2.0),
                              (mu_star + t.a - t.delta) / (alpha0 + t.delta - t.a));
    // c q^{J+1}/(1-q) <= tol
    const double J = std::log(c / ((1.0 - q) * tail_tol)) / std::log(1.0 / q);
    return std::max(at_least, static_cast<int>(std::ceil(J)) + 2);
}

/// Interior Caccioppoli / pre-iteration constants on concentric balls.
struct InteriorConstants {
    double C_alpha = 0.0;
    double A_alpha = 0.0;
};

inline InteriorConstants eval_interior_constants(const AlphaDerived& d, double rho, double R,
                                                 double T1, double T2, double T,
                                                 double ball_measure, double c9 = 1.0,
                                                 double c10 = 1.0) {
    if (!(R > rho && rho > 0.0))
        throw parameter_error("eval_interior_constants: need R > rho > 0");
    if (!(T > T2 && T2 > T1 && T1 >= 0.0))
        throw parameter_error("eval_interior_constants: need T > T2 > T1 >= 0");
    const double a = d.table.a, al = d.alpha;
    const double bracket = 1.0 + 1.0 / (T2 - T1) + 1.0 / std::pow(R - rho, 2.0 - a);
    InteriorConstants out;
    out.C_alpha = c9 * al * al * (1.0 + ball_measure * T) * bracket;
    out.A_alpha = c10 * std::pow(1.0 + 1.0 / rho, 2.0 - a) * std::pow(al, 6.0 - a) *
                  (1.0 + ball_measure * T) * (1.0 + ball_measure * T) * bracket * bracket;
    return out;
}

/// Global Caccioppoli constants: the five E-terms, their weighted sum M,
/// and the pre-iteration amplitude A_tilde.
struct GlobalConstants {
    std::array<double, 5> E{};
    double M = 0.0;
    double A_tilde = 0.0;
};

inline GlobalConstants eval_global_constants(const AlphaDerived& d, double T1, double T2,
                                             double T, double U_measure, double phi_minus_sup,
                                             double c11 = 1.0, double c12 = 1.0) {
    if (!(T > T2 && T2 > T1 && T1 >= 0.0))
        throw parameter_error("eval_global_constants: need T > T2 > T1 >= 0");
    if (!d.d3.has_value())
        throw configuration_error(
            "eval_global_constants: AlphaDerived lacks the fitted d3 constant");
    const double a = d.table.a, delta = d.table.delta;
    const double al = d.alpha, m0 = d.table.mu0, m1 = d.mu1, m2 = d.mu2, m4 = d.mu4;
    const double UT = U_measure * T;
    const double phim = phi_minus_sup;

    GlobalConstants out;
    out.E[0] = std::pow(UT, m1 / (al + m1)) / (T2 - T1);
    out.E[1] = std::pow(UT, (m1 - delta + 2.0) / (al + m1));
    out.E[2] = std::pow(UT, m1 / (al + m1)) * phim;
    out.E[3] = d.D3 * std::pow(U_measure, m1 * (al + m0) / (al * (al + m1))) *
               std::pow(T, (m1 - m0) / (al + m1)) * std::pow(phim, (2.0 - a) / (1.0 - a));
    out.E[4] = d.D4 * std::pow(*d.d3 / 4.0, -m2) * std::pow(U_measure, m1 / al) *
               std::pow(phim, m4);
    double sum = 0.0;
    for (double e : out.E) sum += e;
    out.M = c11 * al * al * sum;
    out.A_tilde =
        c12 * std::pow(al, 2.0 - a) *
        (std::pow(T * U_measure, (m1 + a - delta) * al / ((al + m1) * (al + delta - a))) +
         std::pow(out.M, al / (al + m1)) + std::pow(out.M, al / (al + delta - a)));
    return out;
}

} // namespace forch

#endif
