#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gllab/gauge.hpp"

using namespace gllab;

namespace {

EdgeField random_edges(const Grid& g, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    EdgeField a = g.edge_field();
    for (auto& v : a.x.values()) v = u(eng);
    for (auto& v : a.y.values()) v = u(eng);
    // The normal component on the outer boundary is not represented.
    return a;
}

double max_abs(const NodeField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double max_diff(const EdgeField& a, const EdgeField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.x.size(); ++k) m = std::max(m, std::abs(a.x[k] - b.x[k]));
    for (std::size_t k = 0; k < a.y.size(); ++k) m = std::max(m, std::abs(a.y[k] - b.y[k]));
    return m;
}

}  // namespace

TEST(PoissonOptions, Validation) {
    EXPECT_THROW((PoissonOptions{0.0, 10}.validate()), SpecError);
    EXPECT_THROW((PoissonOptions{1e-3, 10}.validate()), SpecError);
    EXPECT_THROW((PoissonOptions{1e-8, 0}.validate()), SpecError);
    EXPECT_NO_THROW((PoissonOptions{1e-4, 1}.validate()));
}

TEST(PoissonDirichlet, ZeroDataGivesZero) {
    const Grid g = Grid::square(16);
    EXPECT_EQ(max_abs(poisson_dirichlet(g, g.node_field())), 0.0);
}

TEST(PoissonDirichlet, ManufacturedSolutionIsSecondOrder) {
    auto err = [](int n) {
        const Grid g(n, n, 1.0, 2.0);
        const double pi = M_PI;
        auto u = [&](Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y / 2.0); };
        const NodeField rhs = sample_nodes(g, [&](Point p) { return -(pi * pi + pi * pi / 4.0) * u(p); });
        const NodeField sol = poisson_dirichlet(g, rhs);
        double e = 0.0;
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) e = std::max(e, std::abs(sol(i, j) - u(g.node(i, j))));
        return e;
    };
    const double e1 = err(16), e2 = err(32);
    EXPECT_LT(e1, 1e-2);
    EXPECT_NEAR(e1 / e2, 4.0, 0.3);
}

TEST(PoissonNeumann, IncompatibleDataIsRejected) {
    const Grid g = Grid::square(8);
    EXPECT_THROW(poisson_neumann(g, g.node_field(1.0), g.node_field()), CompatibilityError);
}

TEST(PoissonNeumann, CompatibleDataHasZeroMeanSolution) {
    const Grid g = Grid::square(16);
    const NodeField rhs = sample_nodes(g, [](Point p) { return std::cos(M_PI * p.x) * std::cos(2 * M_PI * p.y); });
    const NodeField u = poisson_neumann(g, rhs, g.node_field());
    double mean = 0.0;
    for (int j = 0; j <= 16; ++j)
        for (int i = 0; i <= 16; ++i) mean += g.node_weight(i, j) * u(i, j);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    const double scale = -5.0 * M_PI * M_PI;
    EXPECT_NEAR(u(0, 0), 1.0 / scale, 0.02 / 5.0);
}

TEST(ReferencePotential, NormalComponentAndCentreVanish) {
    const Grid g = Grid::square(16);
    const EdgeField f = reference_potential(g);
    // Boundary-normal components are not stored at all, so F . nu = 0 exactly
    // by construction; the tangential values at the centre vanish by symmetry.
    EXPECT_NEAR(interpolate(g, f, {0.5, 0.5}).x, 0.0, 1e-9);
    EXPECT_NEAR(interpolate(g, f, {0.5, 0.5}).y, 0.0, 1e-9);
}

TEST(ReferencePotential, DivergenceFreeAndUnitCurl) {
    const Grid g = Grid::square(128);
    const EdgeField f = reference_potential(g);
    EXPECT_LT(max_abs(discrete_div(g, f)), 1e-10);
    const CellField c = discrete_curl(g, f);
    double worst = 0.0;
    for (double v : c.values()) worst = std::max(worst, std::abs(v - 1.0));
    EXPECT_LE(worst, 1e-6);
}

TEST(ReferencePotential, IsFixedPointOfLondonProjection) {
    const Grid g = Grid::square(32);
    const EdgeField f = reference_potential(g);
    EXPECT_LT(max_diff(london_project(g, f), f), 1e-10);
}

TEST(LondonProjection, RandomPotential) {
    const Grid g(24, 20, 1.2, 1.0);
    const EdgeField a = random_edges(g, 3);
    const EdgeField p = london_project(g, a);
    EXPECT_LE(max_abs(discrete_div(g, p)), 1e-10);
    const CellField c0 = discrete_curl(g, a), c1 = discrete_curl(g, p);
    for (std::size_t k = 0; k < c0.size(); ++k) EXPECT_NEAR(c0[k], c1[k], 1e-14 * g.nx() * g.nx());
}

TEST(LondonProjection, PureGradientIsRemoved) {
    const Grid g = Grid::square(20);
    const NodeField chi = sample_nodes(g, [](Point p) { return std::sin(3 * p.x) * p.y + p.x * p.x; });
    EXPECT_LT(max_diff(london_project(g, discrete_grad(g, chi)), g.edge_field()), 1e-9);
}

TEST(LondonProjection, IsIdempotent) {
    const Grid g = Grid::square(20);
    const EdgeField p1 = london_project(g, random_edges(g, 9));
    EXPECT_LT(max_diff(london_project(g, p1), p1), 1e-9);
}

TEST(LondonProjection, CurlPreservedToRoundoffAtScale) {
    // curl of a gradient is an exact algebraic zero; only roundoff remains.
    const Grid g = Grid::square(64);
    const EdgeField a = random_edges(g, 11);
    const LondonProjection lp = london_gauge(g, a);
    const CellField c0 = discrete_curl(g, a), c1 = discrete_curl(g, lp.a);
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < c0.size(); ++k) {
        worst = std::max(worst, std::abs(c0[k] - c1[k]));
        scale = std::max(scale, std::abs(c0[k]));
    }
    EXPECT_LE(worst / scale, 1e-12);
}
