#include <cmath>

#include <gtest/gtest.h>

#include "solispec/certificate.hpp"
#include "support.hpp"

using namespace solispec;
using testing_support::problem;

TEST(Certificate, CubicMatchesClosedForm) {
    const auto r = certify_lambda(problem("cubic").potential, 2.0);
    EXPECT_NEAR(r.v0, testing_support::cubic_v0(2.0), 1e-8);
    EXPECT_NEAR(r.v0p, testing_support::cubic_v0p(2.0), 1e-7);
    EXPECT_NEAR(r.u0, testing_support::cubic_u0(2.0), 1e-8);
    EXPECT_NEAR(r.c_grow, testing_support::cubic_c_grow(2.0), 1e-8);
    EXPECT_NEAR(r.c_grow_fit, r.c_grow, 1e-6 * r.c_grow);
    EXPECT_GT(r.v0, 0.0);
    EXPECT_LT(r.v0p, 0.0);
    EXPECT_TRUE(r.u_positive);
    EXPECT_TRUE(r.v_signed);
    EXPECT_EQ(r.verdict, Verdict::no_embedded_eigenvalue);
    EXPECT_TRUE(r.note.empty());
}

TEST(Certificate, NegativeLambdaSigns) {
    const auto r = certify_lambda(problem("cubic").potential, -2.0);
    EXPECT_LT(r.v0, 0.0);
    EXPECT_GT(r.v0p, 0.0);
    EXPECT_TRUE(r.u_positive);
    EXPECT_TRUE(r.v_signed);  // v < 0 on (0, R]
    EXPECT_EQ(r.verdict, Verdict::no_embedded_eigenvalue);
}

TEST(Certificate, ReflectionMatchesDirectComputation) {
    for (const char* f : {"cubic", "saturable", "cubic_quintic"}) {
        const auto& p = problem(f).potential;
        CertificateOptions direct;
        direct.reflect_negative = false;
        for (double lambda : {-1.0, -1.7, -4.0, -9.5}) {
            const auto a = certify_lambda(p, lambda);
            const auto b = certify_lambda(p, lambda, direct);
            EXPECT_NEAR(a.v0, b.v0, 1e-8) << f << lambda;
            EXPECT_NEAR(a.v0p, b.v0p, 1e-8) << f << lambda;
            EXPECT_NEAR(a.normalized_v0, b.normalized_v0, 1e-8) << f << lambda;
            EXPECT_NEAR(a.normalized_v0p, b.normalized_v0p, 1e-8) << f << lambda;
            EXPECT_NEAR(a.mismatch, b.mismatch, 1e-8) << f << lambda;
            EXPECT_EQ(a.u_positive, b.u_positive);
            EXPECT_EQ(a.v_signed, b.v_signed);
            EXPECT_EQ(a.verdict, b.verdict);
        }
    }
}

TEST(Certificate, ZeroPotentialIsNotAnEigenvalue) {
    const auto p = zero_potential(UniformGrid(20.0, 1e-3), 1.0);
    const auto r = certify_lambda(p, 3.0);
    EXPECT_NEAR(r.v0, 1.0, 1e-10);
    EXPECT_NEAR(r.mismatch, 1.0, 1e-10);
    EXPECT_EQ(r.verdict, Verdict::no_embedded_eigenvalue);
}

// Property: normalized quantities do not depend on the amplitude of the solution.
TEST(Certificate, ScaleInvariant) {
    const auto& p = problem("saturable").potential;
    const auto s = decaying_solution(p, 4.0);
    auto t = s;
    for (auto* vec : {&t.f, &t.g, &t.fp, &t.gp}) {
        for (double& x : *vec) x *= -37.5;
    }
    const CertificateOptions o;
    const auto a = detail::certify_solution(s, o);
    const auto b = detail::certify_solution(t, o);
    EXPECT_NEAR(a.normalized_v0, b.normalized_v0, 1e-13);
    EXPECT_NEAR(a.normalized_v0p, b.normalized_v0p, 1e-13);
    EXPECT_NEAR(b.v0, -37.5 * a.v0, 1e-12);
}

TEST(Certificate, VerdictThresholds) {
    CertificateRecord r;
    r.scale = 1.0;
    r.mismatch = 0.5;
    r.normalized_v0 = 0.2;
    r.normalized_v0p = 5e-4;
    CertificateOptions o;
    EXPECT_EQ(detail::decide(r, o), Verdict::inconclusive);
    r.threshold = true;  // relaxed at the band edge
    EXPECT_EQ(detail::decide(r, o), Verdict::no_embedded_eigenvalue);
    r.mismatch = 1e-5;
    EXPECT_EQ(detail::decide(r, o), Verdict::embedded_candidate);
}

TEST(Control, PoschlTellerLevelIsDetected) {
    ControlOptions o;
    o.points = 60;
    const auto res = negative_control(1.0, 6.0, o);
    ASSERT_FALSE(res.crossings.empty());
    EXPECT_NEAR(res.crossings.front(), 3.0, 0.05);
    EXPECT_NEAR(res.crossings.front(), 3.0, 1e-6);  // the oracle is exact; the grid is fine enough
    EXPECT_EQ(res.at_crossing.verdict, Verdict::embedded_candidate);
    EXPECT_LT(res.at_crossing.mismatch, 1e-6);
}

TEST(Control, ShallowWellHasNoCandidate) {
    EXPECT_THROW(negative_control(1.0, 0.1), ConfigError);
    const auto p = decoupled_well(UniformGrid(30.0, 1e-3), 1.0, 0.1);
    const auto rep = scan_embedded(p, linspace(1.0, 10.0, 40));
    EXPECT_EQ(rep.summary.embedded_candidates, 0u);
    for (const auto& r : rep.records) EXPECT_NE(r.verdict, Verdict::embedded_candidate) << r.lambda;
}

TEST(Scan, ValidatesTheGrid) {
    const auto& p = problem("cubic").potential;
    EXPECT_THROW(scan_embedded(p, {}), ConfigError);
    EXPECT_THROW(scan_embedded(p, {2.0, 1.5}), ConfigError);
    EXPECT_THROW(scan_embedded(p, {0.5}), ConfigError);
    EXPECT_THROW(scan_embedded(p, {2.0, std::nan("")}), ConfigError);
    EXPECT_THROW(certify_lambda(p, 0.2), DomainError);
}

TEST(Scan, FailuresBecomeInconclusiveRecords) {
    auto p = decoupled_well(UniformGrid(30.0, 1e-3), 1.0, 6.0);
    p.trust_edge = 2.0;  // V is not negligible inside the trusted region
    const auto rep = scan_embedded(p, {2.0, 5.0});
    ASSERT_EQ(rep.records.size(), 2u);
    for (const auto& r : rep.records) {
        EXPECT_EQ(r.verdict, Verdict::inconclusive);
        EXPECT_FALSE(r.note.empty());
        EXPECT_TRUE(std::isnan(r.mismatch));
    }
    EXPECT_EQ(rep.summary.inconclusive, 2u);
}

TEST(Scan, ThreadCountDoesNotChangeRecords) {
    const auto& p = problem("cubic_quintic").potential;
    const auto lambdas = linspace(1.0, 4.0, 9);
    const auto a = scan_embedded(p, lambdas, {}, 1);
    const auto b = scan_embedded(p, lambdas, {}, 3);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        EXPECT_EQ(a.records[i].v0, b.records[i].v0);
        EXPECT_EQ(a.records[i].v0p, b.records[i].v0p);
        EXPECT_EQ(a.records[i].mismatch, b.records[i].mismatch);
        EXPECT_EQ(a.records[i].verdict, b.records[i].verdict);
    }
    EXPECT_EQ(a.summary.min_mismatch, b.summary.min_mismatch);
}

TEST(Scan, SummaryCountsAndContinuity) {
    const auto& p = problem("cubic").potential;
    const auto rep = scan_embedded(p, linspace(1.0, 10.0, 25));
    EXPECT_EQ(rep.summary.count, 25u);
    EXPECT_EQ(rep.summary.no_embedded, 25u);
    EXPECT_EQ(rep.summary.continuity_flags, 0u);
    EXPECT_GE(rep.summary.min_normalized, 1e-3);
    EXPECT_GE(rep.summary.min_mismatch, 1e-3);
    EXPECT_TRUE(rep.records.front().threshold);
    EXPECT_FALSE(rep.records.back().threshold);
}

TEST(Linspace, Endpoints) {
    const auto v = linspace(1.0, 10.0, 200);
    ASSERT_EQ(v.size(), 200u);
    EXPECT_EQ(v.front(), 1.0);
    EXPECT_EQ(v.back(), 10.0);
    EXPECT_EQ(linspace(2.0, 5.0, 1), std::vector<double>{2.0});
}
