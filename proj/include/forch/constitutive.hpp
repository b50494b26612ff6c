#ifndef FORCH_CONSTITUTIVE_HPP
#define FORCH_CONSTITUTIVE_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "forch/errors.hpp"

namespace forch {

/// Momentum law g(s) = a_0 + a_1 s^{e_1} + ... + a_N s^{e_N} with
/// 0 = e_0 < e_1 < ... < e_N and all coefficients positive.  The top
/// exponent fixes the flux degeneracy a = e_N/(e_N+1).
class ForchheimerLaw {
public:
    ForchheimerLaw(std::vector<double> exponents, std::vector<double> coefficients)
        : exponents_(std::move(exponents)), coefficients_(std::move(coefficients)) {
        validate();
    }

    /// Constant law g = a0 (linear diffusion test mode, N = 0).
    static ForchheimerLaw linear_mode(double a0 = 1.0) {
        return ForchheimerLaw({0.0}, {a0});
    }

    /// g(s) = a + b s.
    static ForchheimerLaw two_term(double a, double b) {
        return ForchheimerLaw({0.0, 1.0}, {a, b});
    }

    /// g(s) = a + b s + c s^2.
    static ForchheimerLaw three_term(double a, double b, double c) {
        return ForchheimerLaw({0.0, 1.0, 2.0}, {a, b, c});
    }

    int num_terms() const { return static_cast<int>(exponents_.size()); }
    /// N in the law's usual indexing (terms are 0..N).
    int top_index() const { return num_terms() - 1; }
    bool is_linear_mode() const { return top_index() == 0; }

    const std::vector<double>& exponents() const { return exponents_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    double a0() const { return coefficients_.front(); }
    double top_exponent() const { return exponents_.back(); }

    /// Degeneracy exponent a = e_N/(e_N+1), in (0,1).  Undefined for the
    /// constant law.
    double degeneracy_a() const {
        if (is_linear_mode())
            throw precondition_error(
                "degeneracy exponent requires N >= 1 (constant law has none)");
        const double eN = top_exponent();
        return eN / (eN + 1.0);
    }

    double eval_g(double s) const {
        if (s < 0.0) throw parameter_error("eval_g: s must be nonnegative");
        double sum = coefficients_[0]; // e_0 = 0 term
        for (std::size_t i = 1; i < exponents_.size(); ++i)
            sum += coefficients_[i] * std::pow(s, exponents_[i]);
        return sum;
    }

    /// d/ds of g.
    double eval_g_prime(double s) const {
        if (s < 0.0) throw parameter_error("eval_g_prime: s must be nonnegative");
        double sum = 0.0;
        for (std::size_t i = 1; i < exponents_.size(); ++i)
            sum += coefficients_[i] * exponents_[i] * std::pow(s, exponents_[i] - 1.0);
        return sum;
    }

    /// Inverts s g(s) = xi.  The map is strictly increasing from 0 to
    /// infinity, so the root is unique; bracketed Newton with bisection
    /// fallback on [0, max(1, xi/a0)] (s g(s) >= a0 s gives the bracket).
    double solve_s(double xi, double rtol = 1e-12, int max_iters = 200) const {
        if (xi < 0.0) throw parameter_error("solve_s: xi must be nonnegative");
        if (xi == 0.0) return 0.0;
        if (is_linear_mode()) return xi / a0();

        double lo = 0.0;
        double hi = std::max(1.0, xi / a0());
        while (hi * eval_g(hi) < xi) hi *= 2.0; // paranoia; bracket holds by construction

        const double target_tol = rtol * std::max(1.0, xi);
        double s = std::min(hi, xi / a0());
        for (int it = 0; it < max_iters; ++it) {
            const double g = eval_g(s);
            const double f = s * g - xi;
            if (std::abs(f) <= target_tol) return s;
            if (f > 0.0) hi = s; else lo = s;
            const double fp = g + s * eval_g_prime(s);
            double next = s - f / fp;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            s = next;
        }
        const double f = s * eval_g(s) - xi;
        if (std::abs(f) <= target_tol) return s;
        std::ostringstream msg;
        msg << "solve_s: no convergence for xi=" << xi << " (bracket [" << lo << "," << hi
            << "], residual " << f << ")";
        throw solver_error(msg.str());
    }

    /// K(xi) = 1/g(s(xi)): strictly decreasing, K(0) = 1/a0.
    double eval_K(double xi) const {
        if (xi < 0.0) throw parameter_error("eval_K: xi must be nonnegative");
        return 1.0 / eval_g(solve_s(xi));
    }

    /// H(xi) = int_0^{xi^2} K(sqrt(w)) dw, in closed form via the
    /// substitution w = (s g(s))^2:
    ///   H = s^2 g(s) + sum_i a_i e_i s^{e_i+2}/(e_i+2)   at s = s(xi).
    double eval_H(double xi) const {
        if (xi < 0.0) throw parameter_error("eval_H: xi must be nonnegative");
        if (xi == 0.0) return 0.0;
        const double s = solve_s(xi);
        double sum = s * s * eval_g(s);
        for (std::size_t i = 1; i < exponents_.size(); ++i) {
            const double e = exponents_[i];
            sum += coefficients_[i] * e * std::pow(s, e + 2.0) / (e + 2.0);
        }
        return sum;
    }

    /// Exact-decimal text form: one "exponent coefficient" pair per line.
    std::string to_text() const {
        std::string out;
        char buf[128];
        for (std::size_t i = 0; i < exponents_.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", exponents_[i], coefficients_[i]);
            out += buf;
        }
        return out;
    }

    static ForchheimerLaw from_text(const std::string& text) {
        std::vector<double> es, cs;
        std::istringstream in(text);
        double e, c;
        while (in >> e >> c) {
            es.push_back(e);
            cs.push_back(c);
        }
        if (es.empty()) throw parameter_error("ForchheimerLaw::from_text: no terms");
        return ForchheimerLaw(std::move(es), std::move(cs));
    }

    bool operator==(const ForchheimerLaw& other) const {
        return exponents_ == other.exponents_ && coefficients_ == other.coefficients_;
    }

private:
    void validate() const {
        if (exponents_.empty() || exponents_.size() != coefficients_.size())
            throw parameter_error("ForchheimerLaw: need matching nonempty exponent/coefficient lists");
        if (exponents_[0] != 0.0)
            throw parameter_error("ForchheimerLaw: first exponent must be exactly 0");
        for (std::size_t i = 1; i < exponents_.size(); ++i)
            if (!(exponents_[i] > exponents_[i - 1]))
                throw parameter_error("ForchheimerLaw: exponents must be strictly increasing");
        for (double c : coefficients_)
            if (!(c > 0.0)) throw parameter_error("ForchheimerLaw: coefficients must be positive");
    }

    std::vector<double> exponents_;
    std::vector<double> coefficients_;
};

/// Empirically fitted comparison constants for
///   d1/(1+xi)^a <= K(xi) <= d2/(1+xi)^a,
///   d3 (xi^{2-a} - 1) <= K(xi) xi^2 <= d2 xi^{2-a}.
/// The underlying analysis only asserts such constants exist; values here
/// come from sampling K on a log grid with small safety margins.
struct FittedKBounds {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
    double fit_grid_max = 0.0;
    int fit_points = 0;
};

namespace detail {
/// Log-spaced grid on [lo, hi] (positive endpoints).
inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> xs(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        xs[i] = std::exp(llo + (lhi - llo) * i / (n - 1.0));
    return xs;
}
} // namespace detail

inline FittedKBounds fit_k_bounds(const ForchheimerLaw& law, double xi_max, int n_points) {
    if (law.is_linear_mode())
        throw parameter_error("fit_k_bounds: requires N >= 1 (degeneracy exponent undefined)");
    if (!(xi_max > 0.0)) throw parameter_error("fit_k_bounds: xi_max must be positive");
    if (n_points < 100) throw parameter_error("fit_k_bounds: need at least 100 points");

    const double a = law.degeneracy_a();
    const auto grid = detail::log_grid(std::min(1e-6, xi_max * 1e-9), xi_max, n_points);

    double ratio_min = std::numeric_limits<double>::infinity();
    double ratio_max = 0.0;
    double d3_min = std::numeric_limits<double>::infinity();
    for (double xi : grid) {
        const double K = law.eval_K(xi);
        const double r = K * std::pow(1.0 + xi, a);
        ratio_min = std::min(ratio_min, r);
        ratio_max = std::max(ratio_max, r);
        const double denom = std::pow(xi, 2.0 - a) - 1.0;
        if (denom > 0.0) d3_min = std::min(d3_min, K * xi * xi / denom);
    }
    // K(0) = 1/a0 also participates in the (1+xi)^a comparison.
    ratio_min = std::min(ratio_min, 1.0 / law.a0());
    ratio_max = std::max(ratio_max, 1.0 / law.a0());

    FittedKBounds out;
    out.d2 = ratio_max * 1.01;
    out.d1 = ratio_min * 0.99;
    out.d3 = std::isfinite(d3_min) ? std::max(d3_min * 0.99, 1e-300)
                                   : 1e-300; // grid never crossed xi^{2-a} > 1
    out.fit_grid_max = xi_max;
    out.fit_points = n_points;
    return out;
}

/// Checks both displayed sandwiches on a grid; returns the number of
/// violations (0 for a sound fit).
inline int verify_k_bounds(const ForchheimerLaw& law, const FittedKBounds& b,
                           const std::vector<double>& grid) {
    const double a = law.degeneracy_a();
    int bad = 0;
    for (double xi : grid) {
        const double K = law.eval_K(xi);
        const double env = std::pow(1.0 + xi, a);
        if (!(b.d1 / env <= K && K <= b.d2 / env)) ++bad;
        const double Kxi2 = K * xi * xi;
        if (!(b.d3 * (std::pow(xi, 2.0 - a) - 1.0) <= Kxi2 &&
              Kxi2 <= b.d2 * std::pow(xi, 2.0 - a)))
            ++bad;
    }
    return bad;
}

} // namespace forch

#endif
