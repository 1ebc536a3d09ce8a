/// @file profile.hpp
/// @brief Radial profiles (densities and warps) evaluated with exact derivatives: sums of
/// closed-form terms, optionally plus a natural cubic spline through sampled values.
#pragma once

#include "phiheat/errors.hpp"
#include "phiheat/jet.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace phiheat {

/// One additive term of a radial profile.
struct ProfileTerm {
    enum class Kind { Constant, Power, Sin, Cos, SinSquared };

    Kind kind = Kind::Constant;
    double amp = 0.0;
    double freq = 1.0;  ///< angular frequency for the trigonometric kinds
    double phase = 0.0;
    int power = 0;      ///< exponent for Kind::Power

    Jet eval(const Jet& r) const {
        switch (kind) {
        case Kind::Constant: return Jet::constant(amp);
        case Kind::Power: return amp * ipow(r, power);
        case Kind::Sin: return amp * sin(freq * r + phase);
        case Kind::Cos: return amp * cos(freq * r + phase);
        case Kind::SinSquared: {
            const Jet s = sin(freq * r + phase);
            return amp * (s * s);
        }
        }
        return Jet::constant(0.0);
    }

    /// True when the term contributes a nonzero derivative somewhere.
    bool varies() const {
        if (amp == 0.0) return false;
        if (kind == Kind::Constant) return false;
        if (kind == Kind::Power) return power != 0;
        return freq != 0.0;
    }
};

/// Natural cubic spline through (x_k, y_k), strictly increasing x, at least 3 knots. Outside
/// the knot range the end cubic pieces are continued. Derivatives are those of the piecewise
/// cubic (the third derivative is piecewise constant).
class CubicSpline {
public:
    /// Natural ends unless a slope is given; pole ends of a density need slope 0.
    CubicSpline(std::vector<double> x, std::vector<double> y, std::optional<double> left_slope = std::nullopt,
                std::optional<double> right_slope = std::nullopt)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw ConfigError("spline needs at least 3 knots and matching value count");
        for (std::size_t k = 1; k < n; ++k)
            if (!(x_[k] > x_[k - 1])) throw ConfigError("spline knots must be strictly increasing");
        // Second derivatives m_k from the end-condition tridiagonal system (Thomas sweep).
        std::vector<double> lo(n, 0.0), di(n, 1.0), up(n, 0.0), rhs(n, 0.0);
        for (std::size_t k = 1; k + 1 < n; ++k) {
            const double h0 = x_[k] - x_[k - 1], h1 = x_[k + 1] - x_[k];
            lo[k] = h0;
            di[k] = 2.0 * (h0 + h1);
            up[k] = h1;
            rhs[k] = 6.0 * ((y_[k + 1] - y_[k]) / h1 - (y_[k] - y_[k - 1]) / h0);
        }
        if (left_slope) {
            const double h = x_[1] - x_[0];
            di[0] = 2.0 * h;
            up[0] = h;
            rhs[0] = 6.0 * ((y_[1] - y_[0]) / h - *left_slope);
        }
        if (right_slope) {
            const double h = x_[n - 1] - x_[n - 2];
            lo[n - 1] = h;
            di[n - 1] = 2.0 * h;
            rhs[n - 1] = 6.0 * (*right_slope - (y_[n - 1] - y_[n - 2]) / h);
        }
        for (std::size_t k = 1; k < n; ++k) {
            const double w = lo[k] / di[k - 1];
            di[k] -= w * up[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        m_.assign(n, 0.0);
        m_[n - 1] = rhs[n - 1] / di[n - 1];
        for (std::size_t k = n - 1; k-- > 0;) m_[k] = (rhs[k] - up[k] * m_[k + 1]) / di[k];
    }

    Jet eval(double r) const {
        const std::size_t n = x_.size();
        std::size_t k = std::upper_bound(x_.begin(), x_.end(), r) - x_.begin();
        k = std::clamp<std::size_t>(k, 1, n - 1) - 1;
        const double h = x_[k + 1] - x_[k];
        const double a = x_[k + 1] - r, b = r - x_[k];
        const double m0 = m_[k], m1 = m_[k + 1];
        Jet out;
        out.v = m0 * a * a * a / (6 * h) + m1 * b * b * b / (6 * h) + (y_[k] / h - m0 * h / 6) * a +
                (y_[k + 1] / h - m1 * h / 6) * b;
        out.d1 = -m0 * a * a / (2 * h) + m1 * b * b / (2 * h) - (y_[k] / h - m0 * h / 6) + (y_[k + 1] / h - m1 * h / 6);
        out.d2 = m0 * a / h + m1 * b / h;
        out.d3 = (m1 - m0) / h;
        return out;
    }

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::vector<double> x_, y_, m_;
};

/// Sum of terms plus an optional spline; an empty profile is identically zero.
struct ScalarProfile {
    std::vector<ProfileTerm> terms;
    std::shared_ptr<const CubicSpline> spline;

    Jet eval(double r) const {
        const Jet x = Jet::variable(r);
        Jet acc = spline ? spline->eval(r) : Jet::constant(0.0);
        for (const auto& t : terms) acc = acc + t.eval(x);
        return acc;
    }
    double value(double r) const { return eval(r).v; }

    bool is_constant() const {
        if (spline) {
            const auto& v = spline->values();
            if (std::any_of(v.begin(), v.end(), [&](double y) { return y != v.front(); })) return false;
        }
        for (const auto& t : terms)
            if (t.varies()) return false;
        return true;
    }

    ScalarProfile shifted(double c) const {
        ScalarProfile p = *this;
        p.terms.push_back({ProfileTerm::Kind::Constant, c});
        return p;
    }

    static ScalarProfile zero() { return {}; }
    static ScalarProfile constant(double c) { return {{{ProfileTerm::Kind::Constant, c}}, nullptr}; }
    static ScalarProfile quadratic(double coef) {
        return {{{ProfileTerm::Kind::Power, coef, 1.0, 0.0, 2}}, nullptr};
    }
    static ScalarProfile sine(double amp, double freq = 1.0, double phase = 0.0) {
        return {{{ProfileTerm::Kind::Sin, amp, freq, phase}}, nullptr};
    }
    static ScalarProfile cosine(double amp, double freq = 1.0, double phase = 0.0) {
        return {{{ProfileTerm::Kind::Cos, amp, freq, phase}}, nullptr};
    }
    static ScalarProfile linear(double coef) {
        return {{{ProfileTerm::Kind::Power, coef, 1.0, 0.0, 1}}, nullptr};
    }
};

/// Warp function f of the model metric dr^2 + f(r)^2 g_{S^{n-1}}.
///
/// f(r) = base(r) * (1 + eta(r)). Bases: euclidean s*(r/s) = r, sphere s*sin(r/s),
/// hyperbolic s*sinh(r/s), flat 1 (used by one-dimensional models).
struct WarpProfile {
    enum class Base { Euclidean, Sphere, Hyperbolic, Flat };

    Base base = Base::Euclidean;
    double scale = 1.0;
    ScalarProfile perturbation;

    Jet eval(double r) const {
        const Jet x = Jet::variable(r);
        Jet b;
        switch (base) {
        case Base::Euclidean: b = x; break;
        case Base::Sphere: b = scale * sin((1.0 / scale) * x); break;
        case Base::Hyperbolic: b = scale * sinh((1.0 / scale) * x); break;
        case Base::Flat: b = Jet::constant(1.0); break;
        }
        if (perturbation.terms.empty() && !perturbation.spline) return b;
        return b * (1.0 + perturbation.eval(r));
    }
    double value(double r) const { return eval(r).v; }

    /// 1 - f'(r)^2 without the cancellation near poles: 1 - b'^2 is K_b b^2 for the curved bases,
    /// and the perturbation adds -(f' - b')(f' + b') with f' - b' = b' p + b p'.
    double one_minus_slope_sq(double r) const {
        const Jet x = Jet::variable(r);
        Jet b;
        double base_part = 0.0;
        switch (base) {
        case Base::Euclidean: b = x; break;
        case Base::Sphere: b = scale * sin((1.0 / scale) * x); break;
        case Base::Hyperbolic: b = scale * sinh((1.0 / scale) * x); break;
        case Base::Flat: b = Jet::constant(1.0); base_part = 1.0; break;
        }
        if (base != Base::Flat) base_part = base_curvature() * b.v * b.v;
        if (perturbation.terms.empty() && !perturbation.spline) return base_part;
        const Jet p = perturbation.eval(r);
        const double diff = b.d1 * p.v + b.v * p.d1;
        return base_part - diff * (2.0 * b.d1 + diff);
    }

    /// Constant sectional curvature of the unperturbed base (0, 1/s^2, -1/s^2).
    double base_curvature() const {
        switch (base) {
        case Base::Sphere: return 1.0 / (scale * scale);
        case Base::Hyperbolic: return -1.0 / (scale * scale);
        default: return 0.0;
        }
    }
    bool is_space_form() const { return perturbation.is_constant() && perturbation.eval(0.0).v == 0.0; }

    static WarpProfile euclidean() { return {Base::Euclidean, 1.0, {}}; }
    static WarpProfile sphere(double s = 1.0) { return {Base::Sphere, s, {}}; }
    static WarpProfile hyperbolic(double s = 1.0) { return {Base::Hyperbolic, s, {}}; }
    static WarpProfile flat() { return {Base::Flat, 1.0, {}}; }
};

inline std::string to_string(WarpProfile::Base b) {
    switch (b) {
    case WarpProfile::Base::Euclidean: return "euclidean";
    case WarpProfile::Base::Sphere: return "sphere";
    case WarpProfile::Base::Hyperbolic: return "hyperbolic";
    case WarpProfile::Base::Flat: return "flat";
    }
    return "?";
}

} // namespace phiheat
