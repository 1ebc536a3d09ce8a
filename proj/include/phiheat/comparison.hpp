/// @file comparison.hpp
/// @brief Comparison functions, Bishop-Gromov type volume bounds, doubling and cross-center
/// ratios, and the two sides of the weighted Laplacian comparison for the distance to the pole.
#pragma once

#include "phiheat/errors.hpp"
#include "phiheat/model_geometry.hpp"
#include "phiheat/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace phiheat {

/// s_K(t): sin(sqrt(K) t)/sqrt(K), t, or sinh(sqrt(-K) t)/sqrt(-K).
inline double comparison_s(double K, double t) {
    if (K > 0.0) {
        const double q = std::sqrt(K);
        return std::sin(q * t) / q;
    }
    if (K < 0.0) {
        const double q = std::sqrt(-K);
        return std::sinh(q * t) / q;
    }
    return t;
}

inline double comparison_s_prime(double K, double t) {
    if (K > 0.0) return std::cos(std::sqrt(K) * t);
    if (K < 0.0) return std::cosh(std::sqrt(-K) * t);
    return 1.0;
}

/// First positive zero of s_K (infinite unless K > 0).
inline double comparison_zero(double K) { return K > 0.0 ? std::numbers::pi / std::sqrt(K) : kInf; }

struct ComparisonProfile {
    double c = 1.0;
    double K = 0.0;
    int resolution = 64; ///< minimum panel count for oracle-style quadratures

    ComparisonProfile(double c_, double K_, int res = 64) : c(c_), K(K_), resolution(res) {
        if (!(c > 0.0)) throw ParameterError("comparison profile needs c > 0");
        if (resolution < 64) throw ParameterError("comparison profile needs quadrature resolution >= 64");
    }
};

/// Integral of s_{cK}(t)^{1/c} over [0, min(upper, pi/sqrt(cK))].
inline double bg_integral(const ComparisonProfile& p, double upper) {
    if (upper < 0.0) throw OutOfRangeError("bg_integral needs upper >= 0");
    const double cK = p.c * p.K;
    const double hi = std::min(upper, comparison_zero(cK));
    if (!(hi > 0.0)) return 0.0;
    const double e = 1.0 / p.c;
    // t = hi u keeps the integrand O(1) for tiny upper limits: I = hi^{1+e} int_0^1 (s(hi u)/hi)^e du.
    const double scaled = integrate([&](double u) { return std::pow(std::max(comparison_s(cK, hi * u) / hi, 0.0), e); },
                                    0.0, 1.0, 1e-11).value;
    return std::pow(hi, 1.0 + e) * scaled;
}

/// Upper bound on V_x(R)/V_x(r): b I(min(R/a, pi/sqrt(cK))) / (a I(r/b)).
/// For K > 0 the radius must also satisfy R <= b pi / (c sqrt(K)).
inline double volume_ratio_bound(const CurvatureParams& p, double r, double R) {
    if (!(r > 0.0) || R < r) throw OutOfRangeError("volume_ratio_bound needs 0 < r <= R");
    if (p.K > 0.0) {
        const double cap = p.b * std::numbers::pi / (p.c * std::sqrt(p.K));
        if (R > cap * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "R = " << R << " exceeds the positive-curvature cap " << cap;
            throw OutOfRangeError(os.str());
        }
    }
    const ComparisonProfile prof(p.c, p.K);
    return p.b * bg_integral(prof, R / p.a) / (p.a * bg_integral(prof, r / p.b));
}

/// (b/a)^{(1+2c)/c} (r/s)^{(1+c)/c} exp(sqrt(K1/c) r/a), K1 = max(0, -K).
inline double same_center_ratio_bound(const CurvatureParams& p, double s, double r) {
    if (!(s > 0.0) || r < s) throw OutOfRangeError("same_center_ratio_bound needs 0 < s <= r");
    const double c = p.c;
    return std::pow(p.b / p.a, (1.0 + 2.0 * c) / c) * std::pow(r / s, (1.0 + c) / c) *
           std::exp(std::sqrt(p.K1() / c) * r / p.a);
}

inline double doubling_bound(const CurvatureParams& p, double R1) { return same_center_ratio_bound(p, R1, 2.0 * R1); }

/// Ratio bound for balls of radius s around points at distance d: r = s + d substituted above.
inline double cross_center_ratio_bound(const CurvatureParams& p, double s, double d) {
    if (d < 0.0) throw OutOfRangeError("cross_center_ratio_bound needs d >= 0");
    return same_center_ratio_bound(p, s, s + d);
}

struct ComparisonPair {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = Delta_phi r = (n-1) f'/f - phi'; rhs = s'_{cK}(r/b) / (c rho s_{cK}(r/b)) with rho = a
/// where s' >= 0 and rho = b otherwise.
inline ComparisonPair laplacian_comparison_pair(const ModelManifold& m, const CurvatureParams& p, double r) {
    if (m.domain.kind != Domain::Kind::PoleCap) throw ConfigError("laplacian comparison needs a pole cap domain");
    if (!(r > 0.0) || r >= m.domain.r_max) throw OutOfRangeError("laplacian comparison needs an interior radius");
    const double cK = p.c * p.K;
    const double t = r / p.b;
    if (t >= comparison_zero(cK)) throw OutOfRangeError("radius at or beyond the zero of the comparison function");
    const Jet f = m.f(r);
    const Jet ph = m.phi(r);
    ComparisonPair out;
    out.lhs = (m.n - 1) * f.d1 / f.v - ph.d1;
    const double sp = comparison_s_prime(cK, t);
    const double rho = sp >= 0.0 ? p.a : p.b;
    out.rhs = sp / (p.c * rho * comparison_s(cK, t));
    return out;
}

} // namespace phiheat
