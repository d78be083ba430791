#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gllab/norms.hpp"

using namespace gllab;

namespace {

const std::vector<NormSpec>& all_specs() {
    static const std::vector<NormSpec> specs = {
        NormSpec::lp(1),  NormSpec::lp(2),  NormSpec::lp(4), NormSpec::lp(std::numeric_limits<double>::infinity()),
        NormSpec::w1p(2), NormSpec::w2p(4), NormSpec::sup(), NormSpec::c1(),
        NormSpec::c2(),   NormSpec::holder(0, 0.5), NormSpec::holder(1, 0.3), NormSpec::holder(2, 0.7)};
    return specs;
}

NodeField smooth(const Grid& g, double phase) {
    return sample_nodes(g, [phase](Point p) { return std::sin(3 * p.x + phase) * std::cos(2 * p.y) + p.x * p.y; });
}

}  // namespace

TEST(NormSpec, RejectsBadParameters) {
    const Grid g = Grid::square(8);
    const NodeField f = g.node_field(1.0);
    EXPECT_THROW(norm(g, f, NormSpec::lp(0.5)), SpecError);
    EXPECT_THROW(norm(g, f, NormSpec::holder(0, 1.0)), SpecError);
    EXPECT_THROW(norm(g, f, NormSpec::holder(0, 0.0)), SpecError);
    EXPECT_THROW(norm(g, f, NormSpec::holder(3, 0.5)), SpecError);
}

TEST(Norms, ConstantFunction) {
    const Grid g(8, 12, 2.0, 3.0);
    const NodeField f = g.node_field(-2.0);
    EXPECT_NEAR(norm(g, f, NormSpec::lp(1)), 2.0 * 6.0, 1e-12);
    EXPECT_NEAR(norm(g, f, NormSpec::lp(2)), 2.0 * std::sqrt(6.0), 1e-12);
    EXPECT_NEAR(norm(g, f, NormSpec::sup()), 2.0, 0.0);
    EXPECT_NEAR(norm(g, f, NormSpec::c2()), 2.0, 1e-12);
    EXPECT_NEAR(norm(g, f, NormSpec::holder(1, 0.5)), 2.0, 1e-12);
    EXPECT_NEAR(norm(g, f, NormSpec::w2p(3)), 2.0 * std::cbrt(6.0), 1e-12);
}

TEST(Norms, LinearFunctionHolderSeminormIsOne) {
    const Grid g = Grid::square(16);
    const NodeField f = sample_nodes(g, [](Point p) { return p.x; });
    for (double alpha : {0.25, 0.5, 0.9}) {
        EXPECT_NEAR(holder_seminorm(lattice(g, f), NormSpec::holder(0, alpha)), 1.0, 1e-12);
        EXPECT_NEAR(norm(g, f, NormSpec::holder(0, alpha)), 2.0, 1e-12);
    }
    EXPECT_NEAR(norm(g, f, NormSpec::c1()), 2.0, 1e-12);
}

TEST(Norms, L2AgreesWithQuadratureOracle) {
    // Exact integral of sin^2(pi x) sin^2(pi y) over the unit square is 1/4.
    const Grid g = Grid::square(64);
    const NodeField f = sample_nodes(g, [](Point p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); });
    EXPECT_NEAR(norm(g, f, NormSpec::lp(2)), 0.5, 1e-12);
    const CellField c = sample_cells(g, [](Point p) { return p.x * p.x; });
    EXPECT_NEAR(norm(g, c, NormSpec::lp(1)), 1.0 / 3.0, 1e-4);
}

TEST(Norms, AreHomogeneous) {
    const Grid g = Grid::square(20);
    const NodeField f = smooth(g, 0.0);
    NodeField f3 = f;
    for (auto& v : f3.values()) v *= -3.0;
    for (const NormSpec& s : all_specs()) {
        const double a = norm(g, f, s);
        EXPECT_NEAR(norm(g, f3, s), 3.0 * a, 1e-12 * a);
    }
}

TEST(Norms, SatisfyTriangleInequality) {
    const Grid g = Grid::square(20);
    const NodeField f = smooth(g, 0.0), h = smooth(g, 1.3);
    NodeField sum = f;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += h[k];
    for (const NormSpec& s : all_specs())
        EXPECT_LE(norm(g, sum, s), (norm(g, f, s) + norm(g, h, s)) * (1.0 + 1e-12));
}

TEST(Norms, ComplexModulusAndEdgeComponents) {
    const Grid g = Grid::square(16);
    const ComplexField psi = sample_complex(g, [](Point p) { return std::polar(2.0, 5 * p.x); });
    EXPECT_NEAR(norm(g, psi, NormSpec::lp(2)), 2.0, 1e-12);
    EXPECT_NEAR(norm(g, psi, NormSpec::sup()), 2.0, 1e-12);
    const EdgeField a = sample_edges(g, [](Point) { return Point{1.0, -2.0}; });
    EXPECT_NEAR(norm(g, a, NormSpec::sup()), 3.0, 1e-12);
}

TEST(Norms, CornerExclusionRemovesCornerSpike) {
    const Grid g = Grid::square(32);
    NodeField f = g.node_field(1.0);
    f(0, 0) = 50.0;
    NormSpec s = NormSpec::sup();
    EXPECT_EQ(norm(g, f, s), 50.0);
    s.corner_exclusion = true;
    EXPECT_EQ(norm(g, f, s), 1.0);
}

TEST(Norms, SampledHolderScanIsCloseToExhaustive) {
    const Grid g = Grid::square(48);
    const NodeField f = sample_nodes(g, [](Point p) { return std::sqrt(std::hypot(p.x - 0.3, p.y - 0.6)); });
    NormSpec exact = NormSpec::holder(0, 0.5);
    NormSpec sampled = exact;
    sampled.exhaustive_limit = 100;
    sampled.sample_pairs = 200000;
    const double e = holder_seminorm(lattice(g, f), exact);
    const double s = holder_seminorm(lattice(g, f), sampled);
    EXPECT_LE(s, e * (1.0 + 1e-12));
    EXPECT_GE(s, 0.95 * e);
    EXPECT_EQ(s, holder_seminorm(lattice(g, f), sampled));
}

TEST(Norms, DerivativeNormsConverge) {
    // sup |d/dx sin(x)| on [0,1] is 1; the centred scheme converges to it.
    const Grid g = Grid::square(128);
    const NodeField f = sample_nodes(g, [](Point p) { return std::sin(p.x); });
    EXPECT_NEAR(norm(g, f, NormSpec::c1()), std::sin(1.0) + 1.0, 1e-3);
    EXPECT_NEAR(norm(g, f, NormSpec::c2()), 2 * std::sin(1.0) + 1.0, 1e-2);
}

TEST(Argmax, FindsSpikeAndMeasuresDistance) {
    const Grid g = Grid::square(20);
    ComplexField psi = g.complex_field(0.1);
    psi(5, 14) = cplx(0.0, -2.0);
    const ArgmaxResult r = argmax_distance(g, psi);
    EXPECT_EQ(r.i, 5);
    EXPECT_EQ(r.j, 14);
    EXPECT_DOUBLE_EQ(r.value, 2.0);
    EXPECT_NEAR(r.distance, 0.25, 1e-15);
}

TEST(Argmax, TiesTakeFirstNodeAndZeroIsDegenerate) {
    const Grid g = Grid::square(10);
    const ArgmaxResult r = argmax_distance(g, g.complex_field(1.0));
    EXPECT_EQ(r.i, 0);
    EXPECT_EQ(r.j, 0);
    EXPECT_EQ(r.distance, 0.0);
    EXPECT_THROW(argmax_distance(g, g.complex_field()), DegenerateInputError);
}
