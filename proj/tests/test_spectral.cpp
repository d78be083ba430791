#include <gtest/gtest.h>

#include <cmath>

#include "gllab/spectral.hpp"

using namespace gllab;

TEST(SymTridiag, MatchesClosedFormSpectrum) {
    // Dirichlet second difference: 2 - 2 cos(k pi / (n + 1)).
    const int n = 50;
    SymTridiag m;
    m.d.assign(n, 2.0);
    m.e.assign(n - 1, -1.0);
    for (int k = 0; k < 4; ++k)
        EXPECT_NEAR(m.eigenvalue(k, 1e-14), 2.0 - 2.0 * std::cos((k + 1) * M_PI / (n + 1)), 1e-12);
    EXPECT_THROW(m.eigenvalue(n), SpecError);
}

TEST(Fiber, ZeroMomentumIsHarmonicGroundState) {
    // The Neumann problem at xi = 0 is the even half of the harmonic oscillator.
    EXPECT_NEAR(mu_of_xi({0.0, 12.0, 2000}), 1.0, 1e-4);
    EXPECT_NEAR(mu_of_xi({0.0, 12.0, 2000}), landau_levels(1, 12.0, 4000)[0], 1e-5);
}

TEST(Fiber, LargeMomentumApproachesBulkLevel) {
    EXPECT_NEAR(mu_of_xi({6.0, 16.0, 3000}), 1.0, 1e-4);
}

TEST(Fiber, TruncationLengthIsConverged) {
    for (double xi : {0.3, 0.77, 1.5}) EXPECT_NEAR(mu_of_xi({xi, 12.0, 2400}), mu_of_xi({xi, 24.0, 4800}), 1e-8);
}

TEST(Fiber, Validation) {
    EXPECT_THROW(mu_of_xi({0.0, 4.0, 2000}), SpecError);
    EXPECT_THROW(mu_of_xi({0.0, 12.0, 100}), SpecError);
    EXPECT_THROW(mu_of_xi({std::nan(""), 12.0, 2000}), SpecError);
}

TEST(Theta0, MinimumOfFiberEigenvalue) {
    const SpectralResult r = theta0();
    EXPECT_NEAR(r.theta0, 0.5901, 1e-3);
    EXPECT_GT(r.theta0, 0.0);
    EXPECT_LT(r.theta0, 1.0);
    // At the minimiser, xi_opt^2 equals the minimal value.
    EXPECT_NEAR(r.xi_opt * r.xi_opt, r.theta0, 1e-3);
    EXPECT_NEAR(r.theta_coarse, r.theta_fine, 1e-5);
    EXPECT_FALSE(r.mu_samples.empty());
    for (const auto& [xi, mu] : r.mu_samples) EXPECT_GE(mu, r.theta0 - 1e-9);
}

TEST(Theta0, Validation) {
    EXPECT_THROW(theta0(1e-2), SpecError);
    Theta0Options o;
    o.xi_lo = 1.0;
    o.xi_hi = 1.0;
    EXPECT_THROW(theta0(1e-6, o), SpecError);
    o.xi_lo = 1.2;
    o.xi_hi = 2.0;
    EXPECT_THROW(theta0(1e-6, o), BracketError);
}

TEST(LandauLevels, OddIntegers) {
    const std::vector<double> l = landau_levels(3);
    ASSERT_EQ(l.size(), 3u);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(l[k], 2 * k + 1, 1e-3);
    EXPECT_THROW(landau_levels(0), SpecError);
    EXPECT_THROW(landau_levels(7), SpecError);
}

TEST(MagneticGroundState, PlaneLevelIsOne) {
    const EigenResult r = plane_ground_state(4.0);
    EXPECT_GE(r.eigenvalue, 1.0 - 5e-3);
    EXPECT_LE(r.eigenvalue, 1.0 + 5e-3);
    EXPECT_EQ(r.nx, 64);
}

TEST(MagneticGroundState, HalfplaneEdgeLowersTheLevel) {
    HalfplaneOptions o;
    o.points_per_unit = 4.0;
    o.edge_half_length = 8.0;
    const double neumann = halfplane_ground_state(6.0, o).eigenvalue;
    o.neumann_edge = false;
    const double dirichlet = halfplane_ground_state(6.0, o).eigenvalue;
    EXPECT_LT(neumann, 0.7);
    EXPECT_GT(neumann, 0.55);
    EXPECT_GT(dirichlet, 0.95);
    EXPECT_THROW(halfplane_ground_state(4.0, o), SpecError);
}

TEST(Probe, ZeroCouplingGivesZero) {
    ProbeOptions o;
    o.points_per_unit = 4.0;
    const ProbeResult r = nonlinear_limit_probe(0.0, 1.0, 6.0, ProbeGeometry::halfplane, o);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.sup_norm, 1e-6);
}

TEST(Probe, EdgeStateBetweenThresholds) {
    // Theta0 < lambda < 1: the half-plane state survives near the edge, the
    // plane state dies.
    ProbeOptions o;
    o.points_per_unit = 4.0;
    o.grad_tol = 1e-7;
    const ProbeResult half = nonlinear_limit_probe(0.8, 1.0, 8.0, ProbeGeometry::halfplane, o);
    EXPECT_GT(half.sup_norm, 0.3);
    EXPECT_GT(half.edge_mass_fraction, 0.9);
    EXPECT_LT(half.energy, 0.0);
    const ProbeResult plane = nonlinear_limit_probe(0.8, 1.0, 5.0, ProbeGeometry::plane, o);
    EXPECT_LT(plane.sup_norm, 1e-3);
    EXPECT_EQ(plane.edge_mass_fraction, 0.0);
}

TEST(Probe, Validation) {
    EXPECT_THROW(nonlinear_limit_probe(-1.0, 1.0, 6.0, ProbeGeometry::plane), SpecError);
    EXPECT_THROW(nonlinear_limit_probe(0.5, 1.0, 0.0, ProbeGeometry::plane), SpecError);
}
