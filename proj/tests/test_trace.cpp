#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "forch/exponents.hpp"
#include "forch/trace_checks.hpp"

using namespace forch;

namespace {
std::shared_ptr<const Grid> unit_square(int n) {
    return std::make_shared<Grid>(Grid::rectangle(1.0, 1.0, n, n));
}
ExponentTable reference_table() {
    return build_table(1.0, ForchheimerLaw::two_term(1.0, 1.0), 2);
}
} // namespace

TEST_CASE("derived trace constants") {
    CHECK(derived_trace_constants(*unit_square(8)).c1 == 4.0);
    CHECK(derived_trace_constants(*unit_square(8)).c2 == 4.0);
    const auto g = Grid::rectangle(2.0, 0.5, 8, 8);
    CHECK(derived_trace_constants(g).c1 == Catch::Approx(2.0 * (0.5 + 2.0)).margin(0.0));
    const auto iv = Grid::interval(2.0, 8);
    CHECK(derived_trace_constants(iv).c1 == 1.0);
    CHECK(derived_trace_constants(iv).c2 == 2.0);
}

TEST_CASE("general trace inequality on canonical fields") {
    auto sq = unit_square(48);

    // u == 1, alpha=2, s=0, p=2: LHS = 4, RHS = c1 + (2 c2)^2/eps
    DiscreteField one(sq);
    for (auto& v : one.values()) v = 1.0;
    const auto rep = check_trace_general(one, 2.0, 0.0, 2.0, 1.0, {4.0, 4.0});
    CHECK(rep.lhs == Catch::Approx(4.0).epsilon(1e-12));
    CHECK(rep.rhs == Catch::Approx(4.0 + 64.0).epsilon(1e-12));
    CHECK(rep.pass);

    // u == 0 with all exponents positive: 0 <= 0
    DiscreteField zero(sq);
    const auto rep0 = check_trace_general(zero, 2.0, 1.0, 2.0, 1.0, {4.0, 4.0});
    CHECK(rep0.lhs == 0.0);
    CHECK(rep0.rhs == 0.0);
    CHECK(rep0.pass);

    CHECK_THROWS_AS(check_trace_general(one, 2.0, 3.0, 2.0, 1.0, {4.0, 4.0}),
                    precondition_error);
    CHECK_THROWS_AS(check_trace_general(one, 0.5, 0.0, 2.0, 1.0, {4.0, 4.0}),
                    precondition_error);
    CHECK_THROWS_AS(check_trace_general(one, 2.0, 0.0, 1.0, 1.0, {4.0, 4.0}),
                    precondition_error);
}

TEST_CASE("general trace holds on a random polynomial corpus") {
    auto sq = unit_square(48);
    const auto corpus = polynomial_corpus(sq, 50, 424242);
    const TraceConstants c{4.0, 4.0};
    int checked = 0;
    for (const auto& f : corpus)
        for (double eps : {0.1, 1.0, 10.0})
            for (auto [alpha, s, p] :
                 std::vector<std::array<double, 3>>{{2.0, 0.0, 2.0}, {3.0, 1.0, 2.0},
                                                    {2.5, 2.0, 1.5}, {4.0, 2.0, 3.0}}) {
                const auto rep = check_trace_general(f, alpha, s, p, eps, c);
                INFO("alpha=" << alpha << " s=" << s << " p=" << p << " eps=" << eps
                              << " ratio=" << rep.ratio);
                CHECK(rep.pass);
                ++checked;
            }
    CHECK(checked == 50 * 3 * 4);
}

TEST_CASE("specialized trace with fit-then-verify constant") {
    auto sq = unit_square(48);
    const auto t = reference_table();
    const double alpha = 4.0;

    const auto corpus_a = polynomial_corpus(sq, 60, 1001);
    const auto corpus_b = polynomial_corpus(sq, 60, 2002);
    const std::vector<double> probes{0.1, 1.0, 10.0};

    const double c_star = fit_trace_constant(t, alpha, sq->domain_measure(), corpus_a, probes);
    const auto d = derive_alpha(t, alpha, c_star, sq->domain_measure());

    for (const auto& f : corpus_b)
        for (double eps : probes) {
            const auto rep = check_trace_specialized(f, d, eps);
            INFO("eps=" << eps << " ratio=" << rep.ratio);
            CHECK(rep.pass);
        }

    // constant field: gradient term vanishes, norm term dominates
    DiscreteField one(sq);
    for (auto& v : one.values()) v = 1.0;
    const auto rep1 = check_trace_specialized(one, d, 1.0);
    CHECK(rep1.lhs == Catch::Approx(sq->boundary_measure()).epsilon(1e-12));
    CHECK(rep1.terms[0].second == 0.0); // gradient term
    CHECK(rep1.rhs >= d.c_star * 1.0);  // c_* ||1||_alpha^alpha = c_* |U|
    CHECK(rep1.pass);

    // u == 0 trivially passes
    DiscreteField zero(sq);
    const auto rep0 = check_trace_specialized(zero, d, 1.0);
    CHECK(rep0.lhs == 0.0);
    CHECK(rep0.pass);
}

TEST_CASE("parabolic Sobolev with fit-then-verify constant") {
    auto sq = unit_square(32);
    const auto t = reference_table();
    const auto d = derive_alpha(t, 4.0);

    std::mt19937_64 rng_a(5150), rng_b(6160);
    std::vector<SpaceTimeTrace> corpus_a, corpus_b;
    for (int k = 0; k < 20; ++k) corpus_a.push_back(random_polynomial_trace(sq, 9, 1.0, rng_a));
    for (int k = 0; k < 20; ++k) corpus_b.push_back(random_polynomial_trace(sq, 9, 1.0, rng_b));

    const double c5 = fit_sobolev_constant(d, corpus_a);
    for (const auto& tr : corpus_b) {
        const auto rep = check_parabolic_sobolev(tr, d, c5);
        INFO("ratio=" << rep.ratio);
        CHECK(rep.pass);
    }

    // u == 1 on the unit square with T = 1: closed-form sides
    SpaceTimeTrace ones;
    for (double tt : {0.0, 0.5, 1.0}) {
        DiscreteField f(sq, tt);
        for (auto& v : f.values()) v = 1.0;
        ones.push(std::move(f));
    }
    const auto rep1 = check_parabolic_sobolev(ones, d, c5);
    CHECK(rep1.lhs == Catch::Approx(1.0).epsilon(1e-12)); // (II 1)^{1/(ka)} on unit cylinder
    const double expected_rhs = std::pow(c5 * std::pow(4.0, 1.5), 1.0 / (d.kappa * 4.0)) *
                                std::pow(1.0, d.theta_tilde / (4.0 + 0.0 - 0.5)) *
                                std::pow(1.0, (1.0 - d.theta_tilde) / 4.0);
    CHECK(rep1.rhs == Catch::Approx(expected_rhs).epsilon(1e-12));

    // zero trace
    SpaceTimeTrace zeros;
    for (double tt : {0.0, 1.0}) zeros.push(DiscreteField(sq, tt));
    const auto rep0 = check_parabolic_sobolev(zeros, d, c5);
    CHECK(rep0.lhs == 0.0);
    CHECK(rep0.pass);

    // ball form carries the (1 + 1/R)^{2-a} prefactor
    const auto rep_ball = check_parabolic_sobolev(ones, d, c5, 0.5);
    CHECK(rep_ball.rhs ==
          Catch::Approx(rep1.rhs * std::pow(std::pow(3.0, 1.5), 1.0 / (d.kappa * 4.0)))
              .epsilon(1e-12));
}
