/// @file quadrature.hpp
/// @brief Adaptive Gauss-Kronrod integration on finite intervals.
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <vector>

namespace phiheat {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Adaptive 15-point Gauss-Kronrod on [a, b]. Relative tolerance 1e-10 by default; the
/// absolute fallback 1e-10 applies when the integral is close to zero.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-10) {
    if (b <= a) return {0.0, 0.0};
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 20, rel_tol, &err, &l1);
    return {v, err};
}

/// Integral over [a, b] split at interior breakpoints (kinks of the integrand).
template <class F>
double integrate_piecewise(F&& f, double a, double b, std::vector<double> breaks, double rel_tol = 1e-10) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = std::clamp(breaks[i], a, b);
        const double hi = std::clamp(breaks[i + 1], a, b);
        if (hi > lo) total += integrate(f, lo, hi, rel_tol).value;
    }
    return total;
}

/// Integration for integrands with square-root type endpoint behaviour: the substitution
/// x = a + (b - a)(1 - cos theta)/2 makes the integrand smooth before Gauss-Kronrod.
template <class F>
double integrate_singular(F&& f, double a, double b, double rel_tol = 1e-10) {
    if (b <= a) return 0.0;
    const double half = 0.5 * (b - a);
    const auto g = [&](double th) { return f(a + half * (1.0 - std::cos(th))) * half * std::sin(th); };
    return integrate(g, 0.0, std::numbers::pi, rel_tol).value;
}

/// integrate_singular over [a, b] split at interior breakpoints.
template <class F>
double integrate_singular_piecewise(F&& f, double a, double b, std::vector<double> breaks, double rel_tol = 1e-10) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = std::clamp(breaks[i], a, b);
        const double hi = std::clamp(breaks[i + 1], a, b);
        if (hi > lo) total += integrate_singular(f, lo, hi, rel_tol);
    }
    return total;
}

} // namespace phiheat
