#include <gtest/gtest.h>

#include <cmath>

#include "gllab/identity.hpp"

using namespace gllab;

namespace {

const SolveResult& solved_state() {
    static const SolveResult r = [] {
        SolveOptions o;
        o.grad_tol = 1e-8;
        return solve(Grid::square(48), 4.0, 4.0, o, 2);
    }();
    return r;
}

Point smooth_potential(Point p) { return {std::sin(p.y) + p.x * p.y, 0.5 * p.x * p.x - std::cos(2 * p.x + p.y)}; }

}  // namespace

TEST(IbpGap, ZeroStateIsDegenerate) {
    const Grid g = Grid::square(16);
    const GLState s{g, g.complex_field(), reference_potential(g), 4.0, 4.0};
    const IbpGap r = ibp_identity_gap(s);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.gap, 0.0);
}

TEST(IbpTerms, ZeroFieldIdentityIsExactBySummationByParts) {
    // With A = 0 the identity reads sum |d_j d_k psi|^2 = |Laplacian psi|^2,
    // and the discrete terms agree to roundoff for any data.
    for (int n : {16, 33}) {
        const Grid g = Grid::square(n);
        const ComplexField psi = sample_complex(
            g, [](Point p) { return cplx(std::cos(M_PI * p.x) * std::cos(2 * M_PI * p.y), p.x * p.x * p.y); });
        const IbpTerms t = ibp_terms(g, psi, g.edge_field(), 0.0);
        EXPECT_EQ(t.curl2_psi2, 0.0);
        EXPECT_EQ(t.cross, 0.0);
        EXPECT_LT(std::abs(t.lhs - t.rhs()), 1e-11 * t.rhs());
    }
}

TEST(IbpGap, SolvedStateSatisfiesIdentity) {
    const SolveResult& r = solved_state();
    ASSERT_TRUE(r.stats.converged);
    const IbpGap gp = ibp_identity_gap(r.state, 1e-2);
    EXPECT_FALSE(gp.degenerate);
    EXPECT_FALSE(gp.bc_gated);
    EXPECT_LE(gp.gap, 0.05);
    EXPECT_GT(gp.terms.lhs, 0.0);
}

TEST(IbpGap, IsGaugeInvariant) {
    GLState s = solved_state().state;
    const double g0 = ibp_identity_gap(s).terms.lhs;
    const NodeField chi = sample_nodes(s.grid, [](Point p) { return std::sin(2 * p.x) * p.y; });
    gauge_transform(s.grid, s.psi, s.a, chi, s.B());
    EXPECT_NEAR(ibp_identity_gap(s).terms.lhs, g0, 1e-9 * g0);
}

TEST(LemmaRatio, SolvedStateIsBelowOne) {
    const GLState& s = solved_state().state;
    for (auto [p1, p2] : {std::pair{2.0, 2.0}, std::pair{1.0, 3.0}, std::pair{4.0, 1.5}}) {
        const LemmaRatio r = lemma_intparts_ratio(s, p1, p2);
        EXPECT_GT(r.lhs, 0.0);
        EXPECT_LE(r.ratio, 1.0);
    }
    EXPECT_THROW(lemma_intparts_ratio(s, 0.5, 2.0), SpecError);
}

TEST(LemmaRatio, ConjugateExponents) {
    EXPECT_EQ(conjugate_exponent(2.0), 2.0);
    EXPECT_TRUE(std::isinf(conjugate_exponent(1.0)));
    EXPECT_EQ(conjugate_exponent(std::numeric_limits<double>::infinity()), 1.0);
    EXPECT_NEAR(conjugate_exponent(3.0), 1.5, 1e-15);
}

TEST(CovariantModulus, ConstantWithZeroPotentialIsZero) {
    const Grid g = Grid::square(8);
    const CellField m = covariant_modulus(g, g.complex_field(2.0), g.edge_field(), 3.0);
    for (double v : m.values()) EXPECT_EQ(v, 0.0);
}

TEST(CurlTransform, FlatChartIsExact) {
    const CurlTransformResult r = curl_transform_check(std::numeric_limits<double>::infinity(), 0.5, smooth_potential, 1e-2);
    EXPECT_GT(r.samples, 0);
    EXPECT_LT(r.max_deviation, 1e-12);
}

TEST(CurlTransform, BoundarySliceMatchesCurl) {
    // At t = 0 the weight 1 - t k is one; only the difference error remains.
    const CircularChart ch{2.0};
    const double h = 1e-3;
    for (double s : {-0.4, 0.0, 0.7}) {
        const double lhs = (ch.pullback(smooth_potential, s + h, 0.0).y - ch.pullback(smooth_potential, s - h, 0.0).y) /
                               (2 * h) -
                           (ch.pullback(smooth_potential, s, h).x - ch.pullback(smooth_potential, s, -h).x) / (2 * h);
        const Point p = ch.map(s, 0.0);
        const double x = p.x, y = p.y;
        const double exact = x - (std::cos(y) + x);  // d_x A_2 - d_y A_1 with the sin terms dropped
        const double curl = exact + 2 * std::sin(2 * x + y);
        EXPECT_NEAR(lhs, curl, 1e-5);
    }
}

TEST(CurlTransform, CurvedChartIsSecondOrder) {
    const double d1 = curl_transform_check(1.5, 0.4, smooth_potential, 1.0 / 64).max_deviation;
    const double d2 = curl_transform_check(1.5, 0.4, smooth_potential, 1.0 / 128).max_deviation;
    EXPECT_LT(d1, 1e-3);
    EXPECT_NEAR(d1 / d2, 4.0, 0.5);
}

TEST(CurlTransform, RejectsInvalidCharts) {
    EXPECT_THROW(curl_transform_check(0.3, 0.5, smooth_potential, 1e-2), ChartError);
    EXPECT_THROW(curl_transform_check(0.2, 0.1, smooth_potential, 1e-2, 1.0), ChartError);
    EXPECT_THROW(curl_transform_check(1.0, 0.0, smooth_potential, 1e-2), SpecError);
    EXPECT_THROW(curl_transform_check(1.0, 0.5, smooth_potential, -1.0), SpecError);
}
