/// @file jet.hpp
/// @brief Third-order forward-mode jets: value plus first three derivatives in one variable.
///
/// Closed-form profiles (warps and densities) are evaluated on jets so that f', f'', f'''
/// and phi', phi'' come out exactly, without finite differences.
#pragma once

#include <cmath>

namespace phiheat {

struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;

    static constexpr Jet constant(double c) { return {c, 0.0, 0.0, 0.0}; }
    static constexpr Jet variable(double x) { return {x, 1.0, 0.0, 0.0}; }
};

inline Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3}; }
inline Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3}; }
inline Jet operator-(const Jet& a) { return {-a.v, -a.d1, -a.d2, -a.d3}; }
inline Jet operator*(double s, const Jet& a) { return {s * a.v, s * a.d1, s * a.d2, s * a.d3}; }
inline Jet operator*(const Jet& a, double s) { return s * a; }
inline Jet operator+(const Jet& a, double s) { return {a.v + s, a.d1, a.d2, a.d3}; }
inline Jet operator+(double s, const Jet& a) { return a + s; }

inline Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
            a.d3 * b.v + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.v * b.d3};
}

/// g(a) given g and its first three derivatives at a.v (Faa di Bruno to third order).
inline Jet compose(const Jet& a, double g0, double g1, double g2, double g3) {
    return {g0,
            g1 * a.d1,
            g2 * a.d1 * a.d1 + g1 * a.d2,
            g3 * a.d1 * a.d1 * a.d1 + 3.0 * g2 * a.d1 * a.d2 + g1 * a.d3};
}

inline Jet sin(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return compose(a, s, c, -s, -c);
}
inline Jet cos(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return compose(a, c, -s, -c, s);
}
inline Jet sinh(const Jet& a) {
    const double s = std::sinh(a.v), c = std::cosh(a.v);
    return compose(a, s, c, s, c);
}
inline Jet cosh(const Jet& a) {
    const double s = std::sinh(a.v), c = std::cosh(a.v);
    return compose(a, c, s, c, s);
}
inline Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return compose(a, e, e, e, e);
}
inline Jet reciprocal(const Jet& a) {
    const double x = a.v;
    return compose(a, 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x), -6.0 / (x * x * x * x));
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

/// a^k for a nonnegative integer k.
inline Jet ipow(const Jet& a, int k) {
    if (k == 0) return Jet::constant(1.0);
    const double x = a.v;
    const double g0 = std::pow(x, k);
    const double g1 = k * std::pow(x, k - 1);
    const double g2 = k >= 2 ? k * (k - 1) * std::pow(x, k - 2) : 0.0;
    const double g3 = k >= 3 ? k * (k - 1) * (k - 2) * std::pow(x, k - 3) : 0.0;
    return compose(a, g0, g1, g2, g3);
}

} // namespace phiheat
