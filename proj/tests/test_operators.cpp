#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gllab/operators.hpp"

using namespace gllab;

namespace {

struct Random {
    std::mt19937_64 eng{42};
    std::uniform_real_distribution<double> u{-1.0, 1.0};
    double operator()() { return u(eng); }

    ComplexField complex(const Grid& g) {
        ComplexField f = g.complex_field();
        for (auto& v : f.values()) v = cplx(u(eng), u(eng));
        return f;
    }
    NodeField nodes(const Grid& g) {
        NodeField f = g.node_field();
        for (auto& v : f.values()) v = u(eng);
        return f;
    }
    EdgeField edges(const Grid& g) {
        EdgeField a = g.edge_field();
        for (auto& v : a.x.values()) v = u(eng);
        for (auto& v : a.y.values()) v = u(eng);
        return a;
    }
};

double max_abs(const EdgeComplexField& d) {
    double m = 0.0;
    for (const cplx& v : d.x.values()) m = std::max(m, std::abs(v));
    for (const cplx& v : d.y.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST(CovariantDiff, ConstantWithZeroPotentialIsZero) {
    const Grid g = Grid::square(8);
    const EdgeComplexField d = covariant_diff(g, g.complex_field(1.0), g.edge_field(), 3.0);
    EXPECT_EQ(max_abs(d), 0.0);
}

TEST(CovariantDiff, ZeroFieldStrengthIsPlainDifference) {
    const Grid g(8, 6, 1.0, 0.75);
    Random rnd;
    const ComplexField psi = rnd.complex(g);
    const EdgeField a = rnd.edges(g);
    const EdgeComplexField d = covariant_diff(g, psi, a, 0.0);
    const cplx mi(0.0, -1.0);
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            EXPECT_NEAR(std::abs(d.x(i, j) - mi * (psi(i + 1, j) - psi(i, j)) / g.hx()), 0.0, 1e-13);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i)
            EXPECT_NEAR(std::abs(d.y(i, j) - mi * (psi(i, j + 1) - psi(i, j)) / g.hy()), 0.0, 1e-13);
}

TEST(CovariantDiff, GaugeWaveIsAnnihilated) {
    const double B = 5.0;
    const Point av{0.7, -1.3};
    for (int n : {16, 32, 64}) {
        const Grid g = Grid::square(n);
        const EdgeField a = sample_edges(g, [&](Point) { return av; });
        const ComplexField psi =
            sample_complex(g, [&](Point p) { return std::polar(1.0, -B * (av.x * p.x + av.y * p.y)); });
        EXPECT_LT(max_abs(covariant_diff(g, psi, a, B)), 1e-9);
    }
}

TEST(CovariantDiff, GaugeCovarianceIsExact) {
    const Grid g = Grid::square(12);
    Random rnd;
    ComplexField psi = rnd.complex(g);
    EdgeField a = rnd.edges(g);
    const double B = 7.5;
    const EdgeComplexField d0 = covariant_diff(g, psi, a, B);
    NodeField chi = rnd.nodes(g);
    for (auto& v : chi.values()) v *= 3.0;
    gauge_transform(g, psi, a, chi, B);
    const EdgeComplexField d1 = covariant_diff(g, psi, a, B);
    for (std::size_t k = 0; k < d0.x.size(); ++k) EXPECT_NEAR(std::abs(d0.x[k]), std::abs(d1.x[k]), 1e-12);
    for (std::size_t k = 0; k < d0.y.size(); ++k) EXPECT_NEAR(std::abs(d0.y[k]), std::abs(d1.y[k]), 1e-12);
}

TEST(CovariantDiff, IsLinear) {
    const Grid g = Grid::square(8);
    Random rnd;
    const ComplexField p = rnd.complex(g), q = rnd.complex(g);
    const EdgeField a = rnd.edges(g);
    const cplx s(0.3, -2.0);
    ComplexField c = g.complex_field();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = p[k] + s * q[k];
    const EdgeComplexField dp = covariant_diff(g, p, a, 2.0), dq = covariant_diff(g, q, a, 2.0),
                           dc = covariant_diff(g, c, a, 2.0);
    for (std::size_t k = 0; k < dc.x.size(); ++k) EXPECT_NEAR(std::abs(dc.x[k] - dp.x[k] - s * dq.x[k]), 0.0, 1e-12);
    for (std::size_t k = 0; k < dc.y.size(); ++k) EXPECT_NEAR(std::abs(dc.y[k] - dp.y[k] - s * dq.y[k]), 0.0, 1e-12);
}

TEST(SecondCovariant, ExactOnQuadratics) {
    const Grid g = Grid::square(10);
    const EdgeField a = g.edge_field();
    // D_j = -i d_j, so D_j D_k = -d_j d_k.
    const ComplexField xx = sample_complex(g, [](Point p) { return cplx(p.x * p.x + 3 * p.y); });
    const ComplexField yy = sample_complex(g, [](Point p) { return cplx(0.0, 2 * p.y * p.y - p.x); });
    const ComplexField xy = sample_complex(g, [](Point p) { return cplx(p.x * p.y); });
    const ComplexField d11 = second_covariant_diag(g, xx, a, 0.0, 1);
    const ComplexField d22 = second_covariant_diag(g, yy, a, 0.0, 2);
    for (int j = 1; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) {
            EXPECT_NEAR(std::abs(d11(i, j) - cplx(-2.0)), 0.0, 1e-10);
            EXPECT_NEAR(std::abs(d22(i, j) - cplx(0.0, -4.0)), 0.0, 1e-10);
        }
    for (int axes : {12, 21}) {
        const CellComplexField m = second_covariant_mixed(g, xy, a, 0.0, axes / 10, axes % 10);
        for (const cplx& v : m.values()) EXPECT_NEAR(std::abs(v - cplx(-1.0)), 0.0, 1e-10);
    }
}

TEST(SecondCovariant, ZeroInZeroOut) {
    const Grid g = Grid::square(8);
    Random rnd;
    const CovariantHessian h = covariant_hessian(g, g.complex_field(), rnd.edges(g), 4.0);
    for (const ComplexField* f : {&h.d11, &h.d22})
        for (const cplx& v : f->values()) EXPECT_EQ(v, cplx{});
    for (const CellComplexField* f : {&h.d12, &h.d21})
        for (const cplx& v : f->values()) EXPECT_EQ(v, cplx{});
}

TEST(SecondCovariant, CommutatorIsPlaquetteCurl) {
    // |(D1 D2 - D2 D1) psi| = B |curl A| |psi| + O(h^2) at each cell, where psi
    // is read at the corner the two paths share.
    const double B = 3.0;
    auto defect = [&](int n) {
        const Grid g = Grid::square(n);
        const EdgeField a = sample_edges(g, [](Point p) { return Point{std::sin(2 * p.y), p.x * p.x + std::cos(p.y)}; });
        Random rnd;
        const ComplexField psi = rnd.complex(g);
        const CellComplexField d12 = second_covariant_mixed(g, psi, a, B, 1, 2);
        const CellComplexField d21 = second_covariant_mixed(g, psi, a, B, 2, 1);
        const CellField c = discrete_curl(g, a);
        double worst = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double lhs = std::abs(d12(i, j) - d21(i, j));
                const double rhs = B * std::abs(c(i, j)) * std::abs(psi(i + 1, j + 1));
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        return worst;
    };
    const double e1 = defect(16), e2 = defect(32);
    EXPECT_LT(e1, 0.05);
    EXPECT_GT(e1 / e2, 3.5);
}

TEST(DiscreteCurl, AffineSymmetricPotentialHasUnitCurl) {
    const Grid g(9, 7, 1.3, 1.0);
    const EdgeField a = sample_edges(g, [](Point p) { return Point{-0.5 * p.y, 0.5 * p.x}; });
    const CellField c = discrete_curl(g, a);
    for (double v : c.values()) EXPECT_NEAR(v, 1.0, 1e-13);
}

TEST(DiscreteCurl, GradientsAreCurlFree) {
    const Grid g = Grid::square(11);
    Random rnd;
    NodeField chi = rnd.nodes(g);
    for (auto& v : chi.values()) v *= 100.0;
    const CellField c = discrete_curl(g, discrete_grad(g, chi));
    for (double v : c.values()) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(DiscreteDiv, IsNegativeWeightedAdjointOfGrad) {
    const Grid g(8, 10, 0.8, 1.0);
    Random rnd;
    const EdgeField a = rnd.edges(g);
    const NodeField chi = rnd.nodes(g);
    const NodeField div = discrete_div(g, a);
    const EdgeField gr = discrete_grad(g, chi);
    double lhs = 0.0, rhs = 0.0;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) lhs += g.node_weight(i, j) * chi(i, j) * div(i, j);
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) rhs -= g.xedge_weight(i, j) * a.x(i, j) * gr.x(i, j);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) rhs -= g.yedge_weight(i, j) * a.y(i, j) * gr.y(i, j);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs) + 1e-12);
}

TEST(DiscreteCurl, TransposeMatchesDirectSummation) {
    const Grid g(7, 9, 0.7, 0.9);
    Random rnd;
    const EdgeField a = rnd.edges(g);
    CellField c = g.cell_field();
    for (auto& v : c.values()) v = rnd();
    const CellField ca = discrete_curl(g, a);
    const EdgeField ct = curl_transpose(g, c);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) lhs += c[k] * ca[k];
    for (std::size_t k = 0; k < a.x.size(); ++k) rhs += ct.x[k] * a.x[k];
    for (std::size_t k = 0; k < a.y.size(); ++k) rhs += ct.y[k] * a.y[k];
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
}
