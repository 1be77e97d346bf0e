#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "solispec/ground_state.hpp"
#include "support.hpp"

using namespace solispec;
using testing_support::problem;

namespace {

double sup_error(const GroundState& gs, double L, auto&& oracle) {
    double e = 0.0;
    for (std::size_t i = 0; i < gs.grid.size(); ++i) {
        const double x = gs.grid.x(i);
        if (std::abs(x) <= L) e = std::max(e, std::abs(gs.Q[i] - oracle(x)));
    }
    return e;
}

// Saturable oracle, independent of the library: G(s) = (beta s - log(1 + beta s)) / beta^2.
double sat_G(double s, double beta) { return (beta * s - std::log1p(beta * s)) / (beta * beta); }

double sat_peak(double beta, double mu) {
    // mu s = G(s) at s = Q(0)^2; G(s)/s - mu changes sign once on (0, inf).
    double lo = 1e-6, hi = 1.0;
    while (sat_G(hi, beta) / hi < mu) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        (sat_G(m, beta) / m < mu ? lo : hi) = m;
    }
    return std::sqrt(0.5 * (lo + hi));
}

}  // namespace

TEST(GroundState, CubicMatchesSech) {
    const auto& gs = problem("cubic").gs;
    EXPECT_LE(sup_error(gs, 20.0, [](double x) { return testing_support::cubic_Q(x); }), 1e-8);
    EXPECT_NEAR(gs.rate, 1.0, 1e-4);
    EXPECT_NEAR(gs.c0, 2.0 * std::numbers::sqrt2, 1e-3);
    EXPECT_NEAR(gs.shoot_value, std::numbers::sqrt2, 1e-10);
}

TEST(GroundState, PowerTwoMatchesClosedForm) {
    const auto& gs = problem("power2").gs;
    EXPECT_LE(sup_error(gs, 20.0, [](double x) { return testing_support::power_Q(x, 2.0); }), 1e-8);
    EXPECT_NEAR(gs.rate, 1.0, 1e-4);
}

TEST(GroundState, CubicQuinticMatchesClosedForm) {
    const auto& gs = problem("cubic_quintic").gs;
    EXPECT_LE(sup_error(gs, 20.0, [](double x) { return testing_support::cubic_quintic_Q(x, 0.1); }), 1e-8);
}

TEST(GroundState, SaturableMatchesFirstIntegralQuadrature) {
    const double beta = 0.5, mu = 1.0;
    const auto& gs = problem("saturable").gs;
    const double q0 = sat_peak(beta, mu);
    EXPECT_NEAR(gs.shoot_value, q0, 1e-10);
    // x(q) = int_q^{q0} dt / sqrt(H(t)), H(t) = mu t^2 - G(t^2). With t = q0 - u^2
    // the endpoint singularity disappears; near u = 0 use H ~ D u^2.
    auto H = [&](double t) { return mu * t * t - sat_G(t * t, beta); };
    const double s0 = q0 * q0;
    const double D = 2.0 * q0 * (s0 / (1.0 + beta * s0) - mu);
    auto integrand = [&](double u) { return u < 1e-6 ? 2.0 / std::sqrt(D) : 2.0 * u / std::sqrt(H(q0 - u * u)); };
    for (double frac : {0.9, 0.5, 0.1, 1e-3}) {
        const double q = frac * q0;
        const double x =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::sqrt(q0 - q), 15, 1e-14);
        EXPECT_NEAR(gs.evaluate(x).first, q, 1e-9) << "level " << frac;
    }
}

TEST(GroundState, FirstIntegralResidualAllFamilies) {
    for (const char* f : {"cubic", "saturable", "cubic_quintic", "power2"}) {
        const auto& p = problem(f);
        EXPECT_LE(first_integral_residual(p.gs, p.nl), 1e-8) << f;
    }
}

TEST(GroundState, EvenPositiveDecreasing) {
    for (const char* f : {"cubic", "saturable", "cubic_quintic"}) {
        const auto& gs = problem(f).gs;
        for (std::size_t i = 0; i < gs.grid.size(); ++i) {
            ASSERT_EQ(gs.Q[i], gs.Q[gs.grid.mirror(i)]) << f;
            ASSERT_GT(gs.Q[i], 0.0) << f;
        }
        for (std::size_t i = gs.center() + 1; i < gs.grid.size(); ++i) ASSERT_LT(gs.Qp[i], 0.0) << f;
    }
}

TEST(GroundState, InterpolationBetweenNodes) {
    const auto& gs = problem("cubic").gs;
    for (double x : {0.00037, -1.23456, 7.77777, 25.0001, 31.5, -40.0}) {
        const auto [q, dq] = gs.evaluate(x);
        EXPECT_NEAR(q, testing_support::cubic_Q(x), 1e-9 * std::max(1e-3, testing_support::cubic_Q(x))) << x;
        const double exact_dq = -testing_support::cubic_Q(x) * std::tanh(x);
        EXPECT_NEAR(dq, exact_dq, 1e-8 * std::max(1e-3, std::abs(exact_dq))) << x;
    }
}

TEST(GroundState, ScalesWithMu) {
    const auto& gs = problem("cubic", 2.0).gs;
    EXPECT_LE(sup_error(gs, 10.0, [](double x) { return testing_support::cubic_Q(x, 2.0); }), 1e-8);
    EXPECT_NEAR(gs.rate, std::sqrt(2.0), 1e-4 * std::sqrt(2.0));
    EXPECT_NEAR(gs.grid.R(), 30.0 / std::sqrt(2.0), 1e-3);
}

TEST(GroundState, TrustEdgeAndTail) {
    const auto& gs = problem("cubic").gs;
    EXPECT_GT(gs.trust_edge, 20.0);
    EXPECT_LT(gs.trust_edge, gs.grid.R());
    const std::size_t last = gs.grid.size() - 1;
    EXPECT_NEAR(gs.Q[last] / (gs.c0 * std::exp(-gs.rate * gs.grid.R())), 1.0, 1e-10);
    EXPECT_LT(gs.tail_fit_residual, 1e-6);
}

TEST(GroundState, NoGroundStateIsHypothesisViolation) {
    // mu s = s^2/2 - gamma s^3/3 has no positive root for gamma = 1, mu = 1.
    GroundStateOptions o;
    o.h = 1e-2;
    EXPECT_THROW(solve_ground_state(Nonlinearity::cubic_quintic(1.0), 1.0, o), HypothesisViolation);
    // Defocusing table: F < 0, no localized positive solution.
    const auto defocusing = Nonlinearity::tabulated({0.0, 1.0, 1e6}, {0.0, -1.0, -1e6});
    EXPECT_THROW(solve_ground_state(defocusing, 1.0, o), HypothesisViolation);
}

TEST(GroundState, InvalidMu) {
    EXPECT_THROW(solve_ground_state(Nonlinearity::cubic(), -1.0), Error);
    EXPECT_THROW(solve_ground_state(Nonlinearity::cubic(), 0.0), Error);
}

// Property: the three-point residual converges at the stencil's order (ratio 4
// per halving of h) for every family.
TEST(GroundState, ResidualConvergesAtStencilOrder) {
    for (const auto& nl : {Nonlinearity::cubic(), Nonlinearity::saturable(0.5), Nonlinearity::cubic_quintic(0.1)}) {
        GroundStateOptions a, b;
        a.h = 0.02;
        b.h = 0.01;
        a.tol = b.tol = 1e-4;  // the built-in check uses a sixth-order stencil
        const double ra = ode_residual(solve_ground_state(nl, 1.0, a), nl, ResidualStencil::second_difference);
        const double rb = ode_residual(solve_ground_state(nl, 1.0, b), nl, ResidualStencil::second_difference);
        EXPECT_NEAR(ra / rb, 4.0, 0.2) << to_string(nl.family());
    }
}

TEST(FarFieldFit, RecoversExponentialAndRejectsSignChange) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 50; ++i) {
        xs.push_back(10.0 + 0.1 * i);
        ys.push_back(-3.0 * std::exp(-1.5 * xs.back()));
    }
    const auto f = far_field_fit(xs, ys);
    EXPECT_NEAR(f.rate, 1.5, 1e-12);
    EXPECT_NEAR(f.c0, -3.0, 1e-10);
    EXPECT_FALSE(f.warning);
    ys[10] = -ys[10];
    EXPECT_THROW(far_field_fit(xs, ys), DomainError);
}

TEST(FarFieldFit, WarnsNearTheCore) {
    const auto& gs = problem("cubic").gs;
    EXPECT_TRUE(far_field_fit(gs, 0.0, 2.0).warning);
    const auto far = far_field_fit(gs, 10.0, 20.0);
    EXPECT_FALSE(far.warning);
    EXPECT_NEAR(far.rate, 1.0, 1e-6);
}
