#include <gtest/gtest.h>

#include <cmath>

#include "gllab/operators.hpp"

using namespace gllab;

TEST(Grid, RejectsTooFewCells) {
    EXPECT_THROW(Grid(3, 8, 1.0, 1.0), DimensionError);
    EXPECT_THROW(Grid(8, 2, 1.0, 1.0), DimensionError);
    EXPECT_THROW(Grid(8, 8, 0.0, 1.0), DomainError);
    EXPECT_THROW(Grid(8, 8, 1.0, -2.0), DomainError);
}

TEST(Grid, FieldShapes) {
    const Grid g(6, 5, 1.2, 1.0);
    EXPECT_EQ(g.node_field().ni(), 7);
    EXPECT_EQ(g.node_field().nj(), 6);
    const EdgeField a = g.edge_field();
    EXPECT_EQ(a.x.ni(), 6);
    EXPECT_EQ(a.x.nj(), 6);
    EXPECT_EQ(a.y.ni(), 7);
    EXPECT_EQ(a.y.nj(), 5);
    EXPECT_EQ(g.cell_field().ni(), 6);
    EXPECT_EQ(g.cell_field().nj(), 5);
    EXPECT_DOUBLE_EQ(g.hx(), 0.2);
    EXPECT_DOUBLE_EQ(g.hy(), 0.2);
}

TEST(Grid, TrapezoidWeightsSumToArea) {
    const Grid g(7, 9, 1.4, 1.8);
    double s = 0.0;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) s += g.node_weight(i, j);
    EXPECT_NEAR(s, g.area(), 1e-14);
}

TEST(Grid, WithSpacingKeepsSquareCells) {
    const Grid g = Grid::with_spacing(2.0, 3.0, 0.125);
    EXPECT_EQ(g.nx(), 16);
    EXPECT_EQ(g.ny(), 24);
    EXPECT_DOUBLE_EQ(g.hx(), g.hy());
}

TEST(Grid, ShapeMismatchIsDimensionError) {
    const Grid g = Grid::square(8);
    const Grid other = Grid::square(10);
    EXPECT_THROW(covariant_diff(g, other.complex_field(), g.edge_field(), 1.0), DimensionError);
    EXPECT_THROW(discrete_curl(g, other.edge_field()), DimensionError);
}

TEST(Interpolate, NodePointsAreExact) {
    const Grid g = Grid::square(8);
    const ComplexField f = sample_complex(g, [](Point p) { return cplx(std::sin(3 * p.x), p.y * p.y); });
    for (int j = 0; j <= 8; ++j)
        for (int i = 0; i <= 8; ++i) {
            const cplx v = interpolate(g, f, g.node(i, j));
            EXPECT_EQ(v, f(i, j));
        }
}

TEST(Interpolate, BilinearFunctionsAreExact) {
    const Grid g(10, 6, 2.0, 1.0);
    const NodeField f = sample_nodes(g, [](Point p) { return p.x * p.y + 2 * p.x - p.y + 0.5; });
    for (double x : {0.0, 0.13, 0.77, 1.5, 2.0})
        for (double y : {0.0, 0.31, 0.5, 0.99, 1.0})
            EXPECT_NEAR(interpolate(g, f, {x, y}), x * y + 2 * x - y + 0.5, 1e-14);
}

TEST(Interpolate, SecondOrderOnSmoothData) {
    // Dense sampling oracle: maximum error over a fine lattice of points.
    auto err = [](int n) {
        const Grid g = Grid::square(n);
        const NodeField f = sample_nodes(g, [](Point p) { return std::sin(p.x); });
        double e = 0.0;
        for (int a = 0; a <= 97; ++a)
            for (int b = 0; b <= 13; ++b) {
                const Point p{a / 97.0, b / 13.0};
                e = std::max(e, std::abs(interpolate(g, f, p) - std::sin(p.x)));
            }
        return e;
    };
    const double e1 = err(8), e2 = err(16), e3 = err(32);
    EXPECT_GT(e1 / e2, 3.0);
    EXPECT_GT(e2 / e3, 3.0);
    EXPECT_LT(e3, 0.125 * 1.0 / (32.0 * 32.0));
}

TEST(Interpolate, OutsideIsDomainError) {
    const Grid g = Grid::square(8);
    EXPECT_THROW(interpolate(g, g.node_field(), {1.1, 0.5}), DomainError);
    EXPECT_THROW(interpolate(g, g.complex_field(), {0.5, -0.01}), DomainError);
    EXPECT_THROW(interpolate(g, g.edge_field(), {-1.0, 0.5}), DomainError);
}

TEST(Interpolate, EdgeFieldReproducesAffineComponents) {
    const Grid g = Grid::square(16);
    const EdgeField a = sample_edges(g, [](Point p) { return Point{-0.5 * p.y, 0.5 * p.x}; });
    for (Point p : {Point{0.3, 0.4}, Point{0.71, 0.22}, Point{0.5, 0.5}}) {
        const Point v = interpolate(g, a, p);
        EXPECT_NEAR(v.x, -0.5 * p.y, 1e-13);
        EXPECT_NEAR(v.y, 0.5 * p.x, 1e-13);
    }
}
