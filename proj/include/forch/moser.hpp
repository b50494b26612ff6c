#ifndef FORCH_MOSER_HPP
#define FORCH_MOSER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "forch/errors.hpp"

namespace forch {

/// One two-power recursion y_{j+1} <= A^{w_j/k_j} (y_j^{r_j} + y_j^{s_j})^{1/k_j}.
struct IterationSpec {
    double A = 1.0;
    std::vector<double> omega;
    std::vector<double> kappa;
    std::vector<double> r;
    std::vector<double> s;
    double y0 = 0.0;

    std::size_t steps() const { return omega.size(); }
    double beta(std::size_t j) const { return r[j] / kappa[j]; }
    double gamma(std::size_t j) const { return s[j] / kappa[j]; }

    void validate() const {
        if (!(A >= 1.0)) throw parameter_error("IterationSpec: A must be >= 1");
        if (!(y0 >= 0.0)) throw parameter_error("IterationSpec: y0 must be nonnegative");
        const std::size_t n = omega.size();
        if (n < 1 || kappa.size() != n || r.size() != n || s.size() != n)
            throw parameter_error("IterationSpec: step lists must be nonempty and equal length");
        for (std::size_t j = 0; j < n; ++j) {
            if (!(omega[j] >= 1.0)) throw parameter_error("IterationSpec: omega_j must be >= 1");
            if (!(kappa[j] > 0.0)) throw parameter_error("IterationSpec: kappa_j must be positive");
            if (!(r[j] > 0.0)) throw parameter_error("IterationSpec: r_j must be positive");
            if (!(s[j] >= r[j])) throw parameter_error("IterationSpec: s_j >= r_j required");
        }
    }
};

namespace detail {
constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(e^x + e^y) without overflow.
inline double log_add_exp(double x, double y) {
    if (x == kLogZero) return y;
    if (y == kLogZero) return x;
    const double m = std::max(x, y);
    return m + std::log1p(std::exp(std::min(x, y) - m));
}
} // namespace detail

/// z_0 = y0, z_{j+1} = A^{w_j/k_j}(z_j^{r_j}+z_j^{s_j})^{1/k_j}, as logs.
/// This recursion dominates every admissible sequence and is the oracle
/// for the closed-form bound.
inline std::vector<double> recursion_trajectory_log(const IterationSpec& spec) {
    spec.validate();
    std::vector<double> lz(spec.steps() + 1);
    lz[0] = spec.y0 > 0.0 ? std::log(spec.y0) : detail::kLogZero;
    const double logA = std::log(spec.A);
    for (std::size_t j = 0; j < spec.steps(); ++j) {
        if (lz[j] == detail::kLogZero) {
            lz[j + 1] = detail::kLogZero; // 0^r = 0 for r > 0
            continue;
        }
        const double inner = detail::log_add_exp(spec.r[j] * lz[j], spec.s[j] * lz[j]);
        lz[j + 1] = spec.omega[j] / spec.kappa[j] * logA + inner / spec.kappa[j];
    }
    return lz;
}

/// Trajectory as plain values; entries that overflow double become +inf.
inline std::vector<double> recursion_trajectory(const IterationSpec& spec) {
    auto lz = recursion_trajectory_log(spec);
    std::vector<double> z(lz.size());
    for (std::size_t j = 0; j < lz.size(); ++j)
        z[j] = lz[j] == detail::kLogZero ? 0.0 : std::exp(lz[j]);
    return z;
}

namespace detail {
/// max over contiguous windows [m,n] within [1, j-1] of sum of logs,
/// clamped below at 0 (the empty product).
inline double max_window_log(const std::vector<double>& logg, std::size_t j) {
    double best = 0.0, run = 0.0;
    for (std::size_t k = 1; k < j; ++k) {
        run = std::max(logg[k], run + logg[k]);
        best = std::max(best, run);
    }
    return best;
}
} // namespace detail

/// log of the two-power closed-form bound at step j >= 1:
///   (2A)^{G_j abar_j} max{ y0^{g_0..g_{j-1}}, y0^{b_0..b_{j-1}} }.
inline double closed_form_bound_log(const IterationSpec& spec, std::size_t j) {
    spec.validate();
    if (j < 1 || j > spec.steps())
        throw parameter_error("closed_form_bound: j must be in [1, steps]");
    double abar = 0.0;
    std::vector<double> logg(j);
    double prod_lg = 0.0, prod_lb = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
        abar += spec.omega[i] / spec.kappa[i];
        logg[i] = std::log(spec.gamma(i));
        prod_lg += logg[i];
        prod_lb += std::log(spec.beta(i));
    }
    const double Gj = std::exp(detail::max_window_log(logg, j));
    const double head = Gj * abar * std::log(2.0 * spec.A);
    if (spec.y0 == 0.0) return detail::kLogZero;
    const double ly0 = std::log(spec.y0);
    const double tail = std::max(std::exp(prod_lg) * ly0, std::exp(prod_lb) * ly0);
    return head + tail;
}

inline double closed_form_bound(const IterationSpec& spec, std::size_t j) {
    const double lb = closed_form_bound_log(spec, j);
    return lb == detail::kLogZero ? 0.0 : std::exp(lb);
}

/// Single-power companion bound: if y_{j+1} <= A^{a_j} y_j^{b_j} then
///   y_j <= A^{B_j sum_{i<j} a_i} y0^{b_0...b_{j-1}},
/// with B_j the sup of contiguous b-products over [1, j-1].
inline double closed_form_bound_single(double A, const std::vector<double>& a_exp,
                                       const std::vector<double>& b_exp, double y0,
                                       std::size_t j) {
    if (!(A >= 1.0)) throw parameter_error("closed_form_bound_single: A must be >= 1");
    if (j < 1 || j > a_exp.size() || b_exp.size() != a_exp.size())
        throw parameter_error("closed_form_bound_single: bad step count");
    double asum = 0.0, prod_lb = 0.0;
    std::vector<double> logb(j);
    for (std::size_t i = 0; i < j; ++i) {
        asum += a_exp[i];
        logb[i] = std::log(b_exp[i]);
        prod_lb += logb[i];
    }
    const double Bj = std::exp(detail::max_window_log(logb, j));
    if (y0 == 0.0) return 0.0;
    return std::exp(Bj * asum * std::log(A) + std::exp(prod_lb) * std::log(y0));
}

/// Cumulative A-exponent sum through step j.
inline double iteration_abar(const IterationSpec& spec, std::size_t j) {
    double abar = 0.0;
    for (std::size_t i = 0; i < j; ++i) abar += spec.omega[i] / spec.kappa[i];
    return abar;
}

/// Sup of contiguous gamma-products over [1, j-1], clamped below at 1.
inline double iteration_G(const IterationSpec& spec, std::size_t j) {
    std::vector<double> logg(j);
    for (std::size_t i = 0; i < j; ++i) logg[i] = std::log(spec.gamma(i));
    return std::exp(detail::max_window_log(logg, j));
}

struct DominanceReport {
    bool pass = true;
    double max_ratio = 0.0;   // sup_j trajectory_j / bound_j
    std::size_t argmax_j = 0;
    std::size_t steps = 0;
};

/// Checks trajectory_j <= bound_j (1 + slack) for every j >= 1.  A failure
/// falsifies the implementation, not the underlying lemma.
inline DominanceReport verify_dominance(const IterationSpec& spec, double slack = 1e-12) {
    const auto lz = recursion_trajectory_log(spec);
    DominanceReport rep;
    rep.steps = spec.steps();
    for (std::size_t j = 1; j <= spec.steps(); ++j) {
        const double lb = closed_form_bound_log(spec, j);
        double ratio;
        if (lz[j] == detail::kLogZero)
            ratio = 0.0; // 0 <= anything nonnegative
        else if (lb == detail::kLogZero)
            ratio = std::numeric_limits<double>::infinity();
        else
            ratio = std::exp(lz[j] - lb);
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.argmax_j = j;
        }
        if (ratio > 1.0 + slack) rep.pass = false;
    }
    return rep;
}

} // namespace forch

#endif
