/// @file model_geometry.hpp
/// @brief Rotationally symmetric weighted model manifolds and their pointwise curvature data.
///
/// A model is the warped product dr^2 + f(r)^2 g_{S^{n-1}} carrying the measure
/// d(mu) = e^{-phi} d(vol), with radial density phi. One-dimensional models (n = 1) are the
/// interval or circle itself with measure e^{-phi} dr; formulas that involve n - 1 in a
/// denominator evaluate them with the curvature dimension max(n, 2).
#pragma once

#include "phiheat/errors.hpp"
#include "phiheat/profile.hpp"
#include "phiheat/quadrature.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace phiheat {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// The effective dimension N in (-inf, 1] u [n, +inf]; +inf is an explicit branch.
class EffectiveDim {
public:
    static EffectiveDim infinity() { return EffectiveDim(kInf); }
    static EffectiveDim finite(double v) { return EffectiveDim(v); }

    bool infinite() const { return std::isinf(value_); }
    double value() const { return value_; }
    bool equals(double n) const { return !infinite() && value_ == n; }
    std::string str() const {
        if (infinite()) return "inf";
        std::ostringstream os;
        os << value_;
        return os.str();
    }

private:
    explicit EffectiveDim(double v) : value_(v) {}
    double value_;
};

struct Domain {
    enum class Kind { PoleCap, Interval, Circle };

    Kind kind = Kind::PoleCap;
    double r_min = 0.0;
    double r_max = 1.0;     ///< for circles: the period L (r_min = 0)
    bool truncation = false; ///< piece of a noncompact model (affects density_band warnings)

    static Domain pole_cap(double R, bool truncation = false) { return {Kind::PoleCap, 0.0, R, truncation}; }
    static Domain interval(double a, double b, bool truncation = false) { return {Kind::Interval, a, b, truncation}; }
    static Domain circle(double L) { return {Kind::Circle, 0.0, L, false}; }

    double length() const { return r_max - r_min; }
    bool periodic() const { return kind == Kind::Circle; }
};

inline std::string to_string(Domain::Kind k) {
    switch (k) {
    case Domain::Kind::PoleCap: return "pole_cap";
    case Domain::Kind::Interval: return "interval";
    case Domain::Kind::Circle: return "circle";
    }
    return "?";
}

/// Area of the unit sphere S^{k}.
inline double unit_sphere_area(int k) {
    const double half = 0.5 * (k + 1);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

struct ModelManifold {
    int n = 2;
    Domain domain;
    WarpProfile warp;
    ScalarProfile density;

    bool one_dimensional() const { return n == 1; }
    int curvature_dim() const { return std::max(n, 2); }

    /// |S^{n-1}|; one-dimensional models use 1 (the measure is e^{-phi} dr).
    double omega() const { return one_dimensional() ? 1.0 : unit_sphere_area(n - 1); }

    Jet f(double r) const { return warp.eval(r); }
    Jet phi(double r) const { return density.eval(r); }

    /// omega * f^{n-1} * e^{-phi}: the radial density of mu.
    double measure_density(double r) const {
        const double e = std::exp(-density.value(r));
        if (one_dimensional()) return e;
        return omega() * std::pow(std::max(warp.value(r), 0.0), n - 1) * e;
    }

    /// Pole cap whose warp closes again at r_max (sphere-like).
    bool closed_right() const {
        return domain.kind == Domain::Kind::PoleCap && std::abs(warp.value(domain.r_max)) < 1e-12;
    }

    bool compact_closed() const { return closed_right() || domain.periodic(); }

    /// Numerical diameter used by the eigenvalue audits.
    double diameter() const {
        switch (domain.kind) {
        case Domain::Kind::Circle: return 0.5 * domain.length();
        case Domain::Kind::Interval: return domain.length();
        case Domain::Kind::PoleCap: return closed_right() ? domain.r_max : 2.0 * domain.r_max;
        }
        return domain.length();
    }

    /// Throws ParameterError when an invariant of the model is violated.
    void validate() const {
        if (n < 1) throw ParameterError("dimension n must be >= 1");
        if (!(domain.r_max > domain.r_min)) throw ParameterError("empty domain");
        if (one_dimensional()) {
            if (domain.kind == Domain::Kind::PoleCap)
                throw ParameterError("n = 1 is only supported on interval and circle domains");
            if (warp.base != WarpProfile::Base::Flat || !warp.perturbation.terms.empty())
                throw ParameterError("one-dimensional models require the flat warp f = 1");
        }
        if (domain.kind == Domain::Kind::PoleCap) {
            const Jet f0 = f(0.0);
            if (std::abs(f0.v) > 1e-12 || std::abs(f0.d1 - 1.0) > 1e-9)
                throw ParameterError("pole cap requires f(0) = 0 and f'(0) = 1");
            if (closed_right() && std::abs(f(domain.r_max).d1 + 1.0) > 1e-9)
                throw ParameterError("warp closing at r_max must satisfy f'(r_max) = -1");
        }
        const int probes = 512;
        for (int i = 0; i < probes; ++i) {
            const double r = domain.r_min + (i + 0.5) * domain.length() / probes;
            if (!(warp.value(r) > 0.0)) {
                std::ostringstream os;
                os << "warp must be positive on the open domain; f(" << r << ") = " << warp.value(r);
                throw ParameterError(os.str());
            }
        }
        if (domain.periodic()) {
            const Jet a = phi(domain.r_min), b = phi(domain.r_max);
            if (std::abs(a.v - b.v) > 1e-9 || std::abs(a.d1 - b.d1) > 1e-9)
                throw ParameterError("density must be periodic on a circle domain");
        }
    }
};

/// Distance between two points on a common radial ray (or on the 1D model).
inline double radial_distance(const ModelManifold& m, double r1, double r2) {
    const double d = std::abs(r1 - r2);
    if (m.domain.periodic()) return std::min(d, m.domain.length() - d);
    return d;
}

/// Staggered sample points of the domain plus its closed endpoints; used by every
/// pointwise scan (density band, K derivation, hypothesis checks).
inline std::vector<double> scan_points(const ModelManifold& m, int count = 4096) {
    std::vector<double> pts;
    pts.reserve(count + 2);
    const double a = m.domain.r_min, L = m.domain.length();
    pts.push_back(a);
    for (int i = 0; i < count; ++i) pts.push_back(a + (i + 0.5) * L / count);
    if (!m.domain.periodic()) pts.push_back(m.domain.r_max);
    return pts;
}

// ---------------------------------------------------------------------------
// epsilon-range and derived constants
// ---------------------------------------------------------------------------

struct EpsRangeCheck {
    bool admissible = false;
    double bound = 0.0; ///< admissible |eps| bound (+inf when any eps is accepted)
    std::string diagnostic;
};

/// Admissibility of eps for (N, n). N in (1, n) is outside the admissible N set.
inline EpsRangeCheck validate_eps_range(EffectiveDim N, int n, double eps) {
    if (n < 2) throw ParameterError("validate_eps_range expects n >= 2");
    EpsRangeCheck out;
    std::ostringstream os;
    if (!N.infinite() && N.value() > 1.0 && N.value() < n) {
        os << "N = " << N.value() << " lies in (1, n) with n = " << n << "; admissible N are (-inf, 1] u [n, +inf]";
        throw ParameterError(os.str());
    }
    if (N.infinite()) {
        out.bound = 1.0;
        out.admissible = std::abs(eps) < 1.0;
    } else if (N.value() == 1.0) {
        out.bound = 0.0;
        out.admissible = eps == 0.0;
    } else if (N.value() == n) {
        out.bound = kInf;
        out.admissible = true;
    } else {
        out.bound = std::sqrt((N.value() - 1.0) / (N.value() - n));
        out.admissible = std::abs(eps) < out.bound;
    }
    os << "N = " << N.str() << ", n = " << n << ", eps = " << eps << ": "
       << (out.admissible ? "admissible" : "outside the eps-range") << "; bound |eps| < " << out.bound;
    if (N.equals(1.0)) os << " (N = 1 requires eps = 0)";
    out.diagnostic = os.str();
    return out;
}

inline double curvature_constant_c(EffectiveDim N, int n, double eps) {
    const auto chk = validate_eps_range(N, n, eps);
    if (!chk.admissible) throw ParameterError(chk.diagnostic);
    const double base = 1.0 / (n - 1);
    if (N.infinite()) return base * (1.0 - eps * eps);
    if (N.value() == 1.0 || N.value() == n) return base;
    return base * (1.0 - eps * eps * (N.value() - n) / (N.value() - 1.0));
}

/// Local Sobolev exponent: 3 for c = 1, 1 + 1/c for c < 1.
inline double sobolev_exponent_nu(double c) {
    if (!(c > 0.0) || c > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "Sobolev exponent needs 0 < c <= 1, got c = " << c;
        throw ParameterError(os.str());
    }
    if (std::abs(c - 1.0) <= 1e-12) return 3.0;
    return 1.0 + 1.0 / c;
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

struct RadialCurvatures {
    double radial = 0.0;
    double tangential = 0.0;
    double min() const { return std::min(radial, tangential); }
};

/// The two eigenvalues of Ric_phi^N in the radial/tangential frame.
inline RadialCurvatures radial_curvatures(const ModelManifold& m, EffectiveDim N, double r) {
    const int cn = m.curvature_dim();
    const bool phi_const = m.density.is_constant();
    if (N.equals(cn) && !phi_const)
        throw ParameterError("N = n is only admissible for constant density");
    if (!N.infinite() && N.value() > 1.0 && N.value() < cn)
        throw ParameterError("N in (1, n) is not admissible");

    const Jet ph = m.phi(r);
    const bool drop = N.infinite() || phi_const || N.equals(cn);
    const double quad = drop ? 0.0 : ph.d1 * ph.d1 / (N.value() - cn);

    if (m.one_dimensional()) {
        const double k = ph.d2 - quad;
        return {k, k};
    }

    const int n = m.n;
    const Jet f = m.f(r);
    if (std::abs(f.v) < 1e-13) {
        // Pole: f ~ sigma (r - r0) + f'''(r0)(r - r0)^3 / 6.
        const double sigma = f.d1 > 0 ? 1.0 : -1.0;
        const double k3 = sigma * f.d3;
        const double radial = -(n - 1) * k3 + ph.d2 - quad;
        double tangential = -(n - 1) * k3 + ph.d2;
        if (std::abs(ph.d1) > 1e-12) tangential = (ph.d1 * sigma > 0 ? 1.0 : -1.0) * kInf;
        return {radial, tangential};
    }
    const double radial = -(n - 1) * f.d2 / f.v + ph.d2 - quad;
    const double tangential = -f.d2 / f.v + (n - 2) * m.warp.one_minus_slope_sq(r) / (f.v * f.v) + ph.d1 * f.d1 / f.v;
    return {radial, tangential};
}

/// e^{4(eps-1)phi(r)/(n-1)}: the variable weight multiplying K in the curvature bound.
inline double curvature_weight(const ModelManifold& m, double eps, double r) {
    return std::exp(4.0 * (eps - 1.0) * m.density.value(r) / (m.curvature_dim() - 1));
}

// ---------------------------------------------------------------------------
// Density band and curvature parameters
// ---------------------------------------------------------------------------

struct DensityBand {
    double a = 1.0;
    double b = 1.0;
    bool truncated_warning = false; ///< band of a truncated noncompact model
};

/// (a, b) = extremes of e^{2(1-eps)phi/(n-1)} over the scan points.
inline DensityBand density_band(const ModelManifold& m, double eps) {
    DensityBand band{kInf, 0.0, false};
    const double k = 2.0 * (1.0 - eps) / (m.curvature_dim() - 1);
    for (double r : scan_points(m)) {
        const double v = std::exp(k * m.density.value(r));
        band.a = std::min(band.a, v);
        band.b = std::max(band.b, v);
    }
    if (eps == 1.0) band.a = band.b = 1.0;
    band.truncated_warning = m.domain.truncation && !m.density.is_constant() && eps != 1.0;
    return band;
}

struct CurvatureParams {
    EffectiveDim N = EffectiveDim::infinity();
    double eps = 0.0;
    double K = 0.0;
    double c = 1.0;
    double nu = 3.0;
    double a = 1.0;
    double b = 1.0;
    bool band_warning = false;

    double K1() const { return std::max(0.0, -K); }
};

/// Validates the eps-range and derives c, nu and the density band.
inline CurvatureParams make_curvature_params(const ModelManifold& m, EffectiveDim N, double eps, double K) {
    const int cn = m.curvature_dim();
    const auto chk = validate_eps_range(N, cn, eps);
    if (!chk.admissible) throw ParameterError(chk.diagnostic);
    if (N.equals(cn) && !m.density.is_constant())
        throw ParameterError("N = n is only admissible for constant density");
    CurvatureParams p;
    p.N = N;
    p.eps = eps;
    p.K = K;
    p.c = curvature_constant_c(N, cn, eps);
    p.nu = sobolev_exponent_nu(p.c);
    const auto band = density_band(m, eps);
    p.a = band.a;
    p.b = band.b;
    p.band_warning = band.truncated_warning;
    return p;
}

namespace detail {

struct PolishedMin {
    double value = kInf;
    double r = 0.0;
};

/// Minimum of g over the sorted points, refined by Brent's method between the neighbors of every
/// discrete local minimum so that dips narrower than the point spacing are not missed.
template <class G>
PolishedMin polished_minimum(const std::vector<double>& pts, G&& g) {
    PolishedMin out;
    const std::size_t n = pts.size();
    if (n == 0) return out;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = g(pts[i]);
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] < out.value) out = {v[i], pts[i]};
        const bool left_ok = i == 0 || v[i] <= v[i - 1];
        const bool right_ok = i + 1 == n || v[i] <= v[i + 1];
        if (!left_ok || !right_ok || !std::isfinite(v[i])) continue;
        const double a = pts[i == 0 ? 0 : i - 1], b = pts[i + 1 == n ? n - 1 : i + 1];
        if (!(b > a)) continue;
        std::uintmax_t iters = 100;
        const auto [x, fx] = boost::math::tools::brent_find_minima(g, a, b, std::numeric_limits<double>::digits / 2, iters);
        if (fx < out.value) out = {fx, x};
    }
    return out;
}

} // namespace detail

/// Largest K with Ric_phi^N >= K e^{4(eps-1)phi/(n-1)}: scan minimum polished between points.
inline double derive_admissible_K(const ModelManifold& m, EffectiveDim N, double eps, int count = 4096) {
    return detail::polished_minimum(scan_points(m, count), [&](double r) {
               return radial_curvatures(m, N, r).min() / curvature_weight(m, eps, r);
           }).value;
}

struct HypothesisScan {
    bool holds = true;
    double worst_violation = 0.0; ///< max of K w - Ric over the scan (<= 0 when the bound holds)
    double worst_r = 0.0;
    int points = 0;
};

/// Check of Ric_phi^N >= K e^{4(eps-1)phi/(n-1)} on [r_lo, r_hi] (whole domain by default), with the
/// worst slack polished between scan points.
inline HypothesisScan curvature_hypothesis_scan(const ModelManifold& m, const CurvatureParams& p,
                                                double r_lo = -kInf, double r_hi = kInf, int count = 4096) {
    HypothesisScan s;
    std::vector<double> pts;
    for (double r : scan_points(m, count))
        if (r >= r_lo && r <= r_hi) pts.push_back(r);
    s.points = static_cast<int>(pts.size());
    if (pts.empty()) return s;
    // Minimizing the slack Ric - K w finds the largest violation, including between points.
    const auto slack = [&](double r) {
        const double ric = radial_curvatures(m, p.N, r).min();
        return ric - p.K * curvature_weight(m, p.eps, r);
    };
    const auto worst = detail::polished_minimum(pts, slack);
    s.worst_violation = -worst.value;
    s.worst_r = worst.r;
    const double rhs = p.K * curvature_weight(m, p.eps, worst.r);
    const double ric = radial_curvatures(m, p.N, worst.r).min();
    const double tol = 1e-12 * std::max({1.0, std::abs(rhs), std::isfinite(ric) ? std::abs(ric) : 0.0});
    s.holds = !(s.worst_violation > tol);
    return s;
}

/// K_eps(r) = max{0, sup_v -e^{-4(eps-1)phi/(n-1)} Ric_phi^N(v)}. The supremum over unit
/// directions is attained on the radial or a tangential direction (the form is diagonal).
inline double k_epsilon(const ModelManifold& m, const CurvatureParams& p, double r) {
    const auto rc = radial_curvatures(m, p.N, r);
    const double v = -rc.min() / curvature_weight(m, p.eps, r);
    return std::max(0.0, v);
}

/// Ball supremum of K_eps around `center` (the pole for pole caps).
inline double k_epsilon_ball(const ModelManifold& m, const CurvatureParams& p, double R, double center = 0.0,
                             int count = 4096) {
    if (m.domain.kind == Domain::Kind::PoleCap) center = 0.0;
    double k = 0.0;
    for (double r : scan_points(m, count))
        if (radial_distance(m, r, center) <= R) k = std::max(k, k_epsilon(m, p, r));
    return k;
}

// ---------------------------------------------------------------------------
// Ball volumes
// ---------------------------------------------------------------------------

/// mu(B_pole(R)) for pole caps, exact one-dimensional quadrature.
inline double pole_ball_volume(const ModelManifold& m, double R) {
    const double hi = std::min(R, m.domain.r_max);
    return integrate([&](double r) { return m.measure_density(r); }, 0.0, hi).value;
}

inline double total_volume(const ModelManifold& m) {
    return integrate([&](double r) { return m.measure_density(r); }, m.domain.r_min, m.domain.r_max).value;
}

namespace detail {

/// Cosine of the largest polar angle theta such that (r, theta) lies within distance s of
/// the axis point at radius rho, on a space form.
inline double space_form_cos_theta(const WarpProfile& w, double r, double rho, double s) {
    switch (w.base) {
    case WarpProfile::Base::Euclidean:
        return (r * r + rho * rho - s * s) / (2.0 * r * rho);
    case WarpProfile::Base::Sphere: {
        const double a = w.scale;
        return (std::cos(s / a) - std::cos(r / a) * std::cos(rho / a)) / (std::sin(r / a) * std::sin(rho / a));
    }
    case WarpProfile::Base::Hyperbolic: {
        const double a = w.scale;
        return (std::cosh(r / a) * std::cosh(rho / a) - std::cosh(s / a)) / (std::sinh(r / a) * std::sinh(rho / a));
    }
    case WarpProfile::Base::Flat: break;
    }
    return 1.0;
}

} // namespace detail

/// mu(B_x(R)) for a center x at radial position `center` (on a common ray with the pole).
/// Exact for pole-centered balls, for one-dimensional models, and for off-pole centers on
/// unperturbed space-form warps with n in {2, 3}; std::nullopt otherwise.
inline std::optional<double> ball_volume(const ModelManifold& m, double center, double R) {
    if (R <= 0.0) return 0.0;
    const auto dens = [&](double r) { return m.measure_density(r); };
    if (m.one_dimensional()) {
        const double L = m.domain.length();
        if (m.domain.periodic()) {
            if (2.0 * R >= L) return total_volume(m);
            const auto wrapped = [&](double r) {
                double x = std::fmod(r - m.domain.r_min, L);
                if (x < 0) x += L;
                return dens(m.domain.r_min + x);
            };
            return integrate(wrapped, center - R, center + R).value;
        }
        const double lo = std::max(m.domain.r_min, center - R);
        const double hi = std::min(m.domain.r_max, center + R);
        return integrate(dens, lo, hi).value;
    }
    if (m.domain.kind == Domain::Kind::PoleCap) {
        if (center <= 0.0) return pole_ball_volume(m, R);
        if (!m.warp.is_space_form() || (m.n != 2 && m.n != 3)) return std::nullopt;
        const double rho = center;
        const double hi = std::min(m.domain.r_max, rho + R);
        const auto integrand = [&](double r) {
            if (r <= 0.0) return 0.0;
            double ct;
            if (r <= R - rho) ct = -1.0; // the whole sphere of radius r lies inside the ball
            else ct = std::clamp(detail::space_form_cos_theta(m.warp, r, rho, R), -1.0, 1.0);
            const double ang = m.n == 2 ? 2.0 * std::acos(ct) : 2.0 * std::numbers::pi * (1.0 - ct);
            const double fr = m.warp.value(r);
            return ang * std::pow(fr, m.n - 1) * std::exp(-m.density.value(r));
        };
        std::vector<double> breaks{std::abs(rho - R)};
        if (m.warp.base == WarpProfile::Base::Sphere) breaks.push_back(2.0 * std::numbers::pi * m.warp.scale - rho - R);
        return integrate_singular_piecewise(integrand, std::max(0.0, rho - R), hi, breaks);
    }
    return std::nullopt;
}

} // namespace phiheat
