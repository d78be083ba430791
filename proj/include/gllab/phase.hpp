#pragma once

#include <cmath>

namespace gllab {

/**
 * sin and cos of one argument for the link-phase loops. Cody-Waite
 * reduction to [-pi/4, pi/4] followed by Taylor polynomials of degree 17/18;
 * the truncation error there is below 1e-18, so the result agrees with
 * std::sin / std::cos to a few ulp. Huge arguments fall back to libm.
 */
inline void unit_phase(double th, double& s, double& c) {
    if (!(std::abs(th) < 1e8)) {
        s = std::sin(th);
        c = std::cos(th);
        return;
    }
    constexpr double two_over_pi = 0.63661977236758134308;
    // pi/2 split into three parts with 33, 33 and 53 significant bits.
    constexpr double p1 = 1.5707963267341256141662597656250;
    constexpr double p2 = 6.0771005065061922293482348322868e-11;
    constexpr double p3 = 2.0222662487959507323405832897329e-21;
    const double q = std::nearbyint(th * two_over_pi);
    const double r = ((th - q * p1) - q * p2) - q * p3;
    const double r2 = r * r;
    const double sp =
        r * (1.0 + r2 * (-1.0 / 6 + r2 * (1.0 / 120 + r2 * (-1.0 / 5040 + r2 * (1.0 / 362880 +
             r2 * (-1.0 / 39916800 + r2 * (1.0 / 6227020800 + r2 * (-1.0 / 1307674368000 +
             r2 * (1.0 / 355687428096000)))))))));
    const double cp =
        1.0 + r2 * (-0.5 + r2 * (1.0 / 24 + r2 * (-1.0 / 720 + r2 * (1.0 / 40320 + r2 * (-1.0 / 3628800 +
              r2 * (1.0 / 479001600 + r2 * (-1.0 / 87178291200 + r2 * (1.0 / 20922789888000 +
              r2 * (-1.0 / 6402373705728000)))))))));
    const long k = static_cast<long>(q) & 3;
    switch (k) {
        case 0: s = sp; c = cp; break;
        case 1: s = cp; c = -sp; break;
        case 2: s = -sp; c = -cp; break;
        default: s = -cp; c = sp; break;
    }
}

}  // namespace gllab
