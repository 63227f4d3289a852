#pragma once

#include <cmath>
#include <stdexcept>

// Cumulant-style expansion of F(p,z) = log(1 - p + p e^z) and the exact
// coefficient combinations built from it. The pair/quad coefficients are
// always evaluated through big_F itself (never through the truncated
// series), so downstream identities hold to machine precision.

namespace dising::expansion {

namespace detail {
inline void check_p(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("expansion: p outside [0,1]");
}
}  // namespace detail

// F(p,z) = log(1 - p + p e^z), evaluated in cancellation-free form:
// log1p(p*expm1(z)) for moderate z, z + log(p + (1-p)e^-z) for large z.
inline double big_F(double p, double z) {
    detail::check_p(p);
    if (z > 30.0) return z + std::log(p + (1.0 - p) * std::exp(-z));
    return std::log1p(p * std::expm1(z));
}

// Taylor polynomial of F(p,.) about 0 up to the given order (1..4):
//   p z + p(1-p) z^2/2 + p(2p^2-3p+1) z^3/6 + p(-6p^3+12p^2-7p+1) z^4/24.
inline double series_F(double p, double z, int order) {
    detail::check_p(p);
    if (order < 1 || order > 4)
        throw std::invalid_argument("series_F: order must be in 1..4");
    const double c1 = p;
    const double c2 = p * (1.0 - p) / 2.0;
    const double c3 = p * (2.0 * p * p - 3.0 * p + 1.0) / 6.0;
    const double c4 = p * (-6.0 * p * p * p + 12.0 * p * p - 7.0 * p + 1.0) / 24.0;
    double acc = c1;
    if (order >= 2) acc = c1 + z * c2;
    if (order >= 3) acc = c1 + z * (c2 + z * c3);
    if (order >= 4) acc = c1 + z * (c2 + z * (c3 + z * c4));
    return z * acc;
}

// Even/odd split of z -> F(p, gamma*(z+y)) around z=0:
//   even = (F(p,gamma*(z+y)) + F(p,gamma*(-z+y)))/2, odd the difference.
struct SymmetricSplit {
    double even = 0.0;
    double odd = 0.0;
};

inline SymmetricSplit symmetric_split(double p, double gamma, double z, double y) {
    const double fp = big_F(p, gamma * (z + y));
    const double fm = big_F(p, gamma * (-z + y));
    return {0.5 * (fp + fm), 0.5 * (fp - fm)};
}

// Single-configuration tilt exponents: with f(x) = F(p, gamma*(x - m^2)),
//   a0 = (f(1) + f(-1))/2,  a1 = (f(1) - f(-1))/2,
// so that log E T(sigma) = N^2 a0 + a1 k^2 (+ field term) for |sigma| = k.
struct PairCoefficients {
    double a0 = 0.0;
    double a1 = 0.0;
    double p = 0.0, gamma = 0.0, m = 0.0;
};

inline PairCoefficients pair_coefficients(double p, double gamma, double m) {
    const SymmetricSplit s = symmetric_split(p, gamma, 1.0, -m * m);
    return {s.even, s.odd, p, gamma, m};
}

// Two-configuration tilt exponents: with f(x) = F(p, gamma*(x - 2 m^2)),
//   b0  = (f(2) + f(-2) + 2 f(0))/4,
//   b1  = (f(2) - f(-2))/4            (shared by both k^2 and l^2),
//   b12 = (f(2) + f(-2) - 2 f(0))/4   (the overlap n^2 coupling).
struct QuadCoefficients {
    double b0 = 0.0;
    double b1 = 0.0;
    double b12 = 0.0;
    double p = 0.0, gamma = 0.0, m = 0.0;
};

inline QuadCoefficients quad_coefficients(double p, double gamma, double m) {
    const double y = -2.0 * m * m;
    const double f2 = big_F(p, gamma * (2.0 + y));
    const double fm2 = big_F(p, gamma * (-2.0 + y));
    const double f0 = big_F(p, gamma * y);
    QuadCoefficients q;
    q.b0 = 0.25 * (f2 + fm2 + 2.0 * f0);
    q.b1 = 0.25 * (f2 - fm2);
    q.b12 = 0.25 * (f2 + fm2 - 2.0 * f0);
    q.p = p;
    q.gamma = gamma;
    q.m = m;
    return q;
}

}  // namespace dising::expansion
