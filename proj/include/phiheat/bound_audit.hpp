/// @file bound_audit.hpp
/// @brief Machine-checkable audits of the comparison, Poincare, Sobolev, mean-value, Harnack,
/// heat-kernel, eigenvalue and Li-Yau inequalities on weighted model manifolds.
///
/// Explicit-constant audits evaluate both sides and assert lhs <= rhs sample by sample.
/// Audits whose constants are only known to exist compute the smallest constant that makes the
/// inequality hold on the samples, at grid sizes M and 2M, and require it to be finite and stable.
/// Balls are centered at the pole for pole caps and at the domain midpoint for 1D models.
#pragma once

#include "phiheat/bound_report.hpp"
#include "phiheat/comparison.hpp"
#include "phiheat/discrete_operator.hpp"
#include "phiheat/errors.hpp"
#include "phiheat/grid.hpp"
#include "phiheat/heat_semigroup.hpp"
#include "phiheat/model_geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace phiheat {

struct AuditSettings {
    int M = 512;                    ///< base resolution; empirical audits also run at 2M
    double explicit_tol = 1e-6;     ///< relative tolerance of explicit-constant audits
    double stability_factor = 1.25; ///< allowed refinement drift of empirical constants
    double li_yau_tol = 0.05;
};

/// Cylinder fractions of the parabolic Harnack inequality; also used by the mean-value audit
/// (Q_delta = B(delta R) x (t0 - delta R^2, t0)).
struct AuditCylinderSpec {
    double delta = 0.8;
    double eps = 0.45;
    double rho = 0.55;
    double varsigma = 0.95;
    double R = 1.0;
    double t0 = 2.0;

    /// The fractions used in the chaining argument for the Li-Yau type Harnack inequality.
    static AuditCylinderSpec standard(double R) {
        const double d = 0.8;
        return {d, (1.0 + d) / 4.0, (3.0 - d) / 4.0, (3.0 + d) / 4.0, R, 2.0 * R * R};
    }

    void validate() const {
        if (!(0.0 < eps && eps < rho && rho < varsigma && varsigma <= 1.0))
            throw ConfigError("cylinder fractions must satisfy 0 < eps < rho < varsigma <= 1");
        if (!(0.0 < delta && delta < 1.0)) throw ConfigError("cylinder needs 0 < delta < 1");
        if (!(R > 0.0) || t0 < R * R) throw ConfigError("cylinder needs R > 0 and R^2 <= t0");
    }
};

namespace detail {

inline double standard_center(const ModelManifold& m) {
    return m.domain.kind == Domain::Kind::PoleCap ? 0.0 : 0.5 * (m.domain.r_min + m.domain.r_max);
}

/// Largest radius of a ball around the standard center that stays inside the domain.
inline double max_ball_radius(const ModelManifold& m) {
    return m.domain.kind == Domain::Kind::PoleCap ? m.domain.r_max : 0.5 * m.domain.length();
}

/// Odd node counts on 1D models put the standard center on a node.
inline int model_nodes(const ModelManifold& m, int M) { return (m.one_dimensional() && M % 2 == 0) ? M + 1 : M; }

inline std::shared_ptr<const RadialGrid> model_grid(const ModelManifold& m, int M) {
    return std::make_shared<const RadialGrid>(RadialGrid::build(m, model_nodes(m, M)));
}

struct BallGrid {
    std::shared_ptr<const RadialGrid> grid;
    Boundary left = Boundary::Neumann;
    Boundary right = Boundary::Neumann;
    int center = 0;   ///< node at the ball center
    double x0 = 0.0;  ///< center coordinate
    bool whole = false;

    double dist(int i) const { return grid->separation(i, center); }
};

/// Grid over B(center, R) with `cut` boundary conditions where the ball ends inside the domain.
inline BallGrid ball_grid(const ModelManifold& m, double R, int M, Boundary cut) {
    BallGrid b;
    b.x0 = standard_center(m);
    if (m.domain.kind == Domain::Kind::PoleCap) {
        const double hi = std::min(R, m.domain.r_max);
        const bool cuts = hi < m.domain.r_max - 1e-12;
        b.grid = std::make_shared<const RadialGrid>(RadialGrid::build(m, M, 0.0, hi));
        auto [lb, rb] = natural_boundaries(m, *b.grid);
        b.left = lb;
        b.right = cuts ? cut : rb;
        b.center = 0;
        b.whole = !cuts;
        return b;
    }
    const int Mo = M % 2 == 0 ? M + 1 : M;
    if (R >= max_ball_radius(m) - 1e-12) {
        b.grid = std::make_shared<const RadialGrid>(RadialGrid::build(m, Mo));
        auto [lb, rb] = natural_boundaries(m, *b.grid);
        b.left = lb;
        b.right = rb;
        b.whole = true;
    } else {
        b.grid = std::make_shared<const RadialGrid>(RadialGrid::build(m, Mo, b.x0 - R, b.x0 + R));
        b.left = cut;
        b.right = cut;
    }
    b.center = Mo / 2;
    return b;
}

/// Distance of node i from the standard center on a full model grid.
inline double center_distance(const ModelManifold& m, const RadialGrid& g, int i) {
    return radial_distance(m, g.nodes[i], standard_center(m));
}

inline int center_node(const ModelManifold& m, const RadialGrid& g) {
    return m.domain.kind == Domain::Kind::PoleCap ? 0 : g.M / 2;
}

/// Ball volume around the standard center (exact quadrature).
inline double center_volume(const ModelManifold& m, double R) { return *ball_volume(m, standard_center(m), R); }

struct Fit {
    double slope = 0.0;
    double stderr_ = 0.0;
};

inline Fit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 3) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - my - slope * (x[i] - mx);
        ss += r * r;
    }
    return {slope, std::sqrt(ss / (n - 2) / sxx)};
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Composite Simpson weights for an odd number of equally spaced samples over [a, b].
inline std::vector<double> simpson_weights(int count, double a, double b) {
    if (count < 3 || count % 2 == 0) throw ConfigError("simpson needs an odd sample count >= 3");
    const double h = (b - a) / (count - 1);
    std::vector<double> w(count);
    for (int k = 0; k < count; ++k) w[k] = h / 3.0 * ((k == 0 || k == count - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0));
    return w;
}

inline HypothesisScan scan_ball(const ModelManifold& m, const CurvatureParams& p, double R) {
    if (m.domain.kind == Domain::Kind::PoleCap) return curvature_hypothesis_scan(m, p, -kInf, R);
    const double x0 = standard_center(m);
    if (m.domain.periodic() && R >= 0.5 * m.domain.length()) return curvature_hypothesis_scan(m, p);
    return curvature_hypothesis_scan(m, p, x0 - R, x0 + R);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Comparison audits (explicit constants)
// ---------------------------------------------------------------------------

inline BoundReport audit_laplacian_comparison(const ModelManifold& m, const CurvatureParams& p, int n_samples = 100,
                                              const AuditSettings& st = {}) {
    if (m.domain.kind != Domain::Kind::PoleCap) throw ConfigError("laplacian comparison needs a pole cap model");
    BoundReport r;
    r.bound_id = "laplacian-comparison";
    const double r_hi = std::min(m.domain.r_max, p.b * comparison_zero(p.c * p.K));
    const auto scan = curvature_hypothesis_scan(m, p, -kInf, r_hi);
    if (!scan.holds) {
        mark_vacuous(r, scan.worst_violation, scan.worst_r);
        return r;
    }
    for (int k = 0; k < n_samples; ++k) {
        const double rr = r_hi * (k + 0.5) / n_samples;
        if (rr >= m.domain.r_max) continue;
        const auto pr = laplacian_comparison_pair(m, p, rr);
        r.samples.push_back({{{"r", rr}}, pr.lhs, pr.rhs});
    }
    finalize_explicit(r, st.explicit_tol);
    return r;
}

inline BoundReport audit_volume_comparison(const ModelManifold& m, const CurvatureParams& p, int n_grid = 8,
                                           const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "volume-comparison";
    double R_hi = detail::max_ball_radius(m);
    if (p.K > 0.0) R_hi = std::min(R_hi, p.b * std::numbers::pi / (p.c * std::sqrt(p.K)));
    const auto scan = detail::scan_ball(m, p, R_hi);
    if (!scan.holds) {
        mark_vacuous(r, scan.worst_violation, scan.worst_r);
        return r;
    }
    for (int i = 1; i <= n_grid; ++i) {
        const double rr = R_hi * i / n_grid;
        const double Vr = detail::center_volume(m, rr);
        for (int j = i; j <= n_grid; ++j) {
            const double RR = R_hi * j / n_grid;
            const double lhs = detail::center_volume(m, RR) / Vr;
            r.samples.push_back({{{"r", rr}, {"R", RR}}, lhs, volume_ratio_bound(p, rr, RR)});
        }
    }
    finalize_explicit(r, st.explicit_tol);
    return r;
}

namespace detail {

/// Ball centers on the ray for which exact volumes of every ball radius are available.
inline std::vector<double> exact_volume_centers(const ModelManifold& m) {
    std::vector<double> c{standard_center(m)};
    if (m.one_dimensional()) {
        c.push_back(standard_center(m) + 0.2 * m.domain.length());
    } else if (m.warp.is_space_form() && (m.n == 2 || m.n == 3)) {
        c.push_back(0.3 * m.domain.r_max);
        c.push_back(0.6 * m.domain.r_max);
    }
    return c;
}

/// True when B(center, R) lies inside the domain or the domain has no boundary.
inline bool ball_inside(const ModelManifold& m, double center, double R) {
    if (m.domain.periodic()) return true;
    if (m.domain.kind == Domain::Kind::PoleCap) return m.closed_right() || center + R <= m.domain.r_max + 1e-12;
    return center - R >= m.domain.r_min - 1e-12 && center + R <= m.domain.r_max + 1e-12;
}

} // namespace detail

inline BoundReport audit_doubling(const ModelManifold& m, const CurvatureParams& p, int n_samples = 12,
                                  const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "volume-doubling";
    const auto scan = curvature_hypothesis_scan(m, p);
    if (!scan.holds) {
        mark_vacuous(r, scan.worst_violation, scan.worst_r);
        return r;
    }
    const double D = m.diameter();
    for (double x : detail::exact_volume_centers(m)) {
        for (int k = 1; k <= n_samples; ++k) {
            const double R1 = 0.5 * D * k / n_samples;
            if (!detail::ball_inside(m, x, 2.0 * R1)) continue;
            const auto v1 = ball_volume(m, x, R1), v2 = ball_volume(m, x, 2.0 * R1);
            if (!v1 || !v2) continue;
            r.samples.push_back({{{"center", x}, {"R1", R1}}, *v2 / *v1, doubling_bound(p, R1)});
        }
    }
    finalize_explicit(r, st.explicit_tol);
    return r;
}

inline BoundReport audit_cross_center(const ModelManifold& m, const CurvatureParams& p, int n_samples = 8,
                                      const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "cross-center-ratio";
    const auto scan = curvature_hypothesis_scan(m, p);
    if (!scan.holds) {
        mark_vacuous(r, scan.worst_violation, scan.worst_r);
        return r;
    }
    const auto centers = detail::exact_volume_centers(m);
    if (centers.size() < 2) r.note("off-center volumes unavailable for this warp; same-center pairs only");
    const double D = m.diameter();
    for (double x : centers) {
        for (double y : centers) {
            const double d = radial_distance(m, x, y);
            for (int k = 1; k <= n_samples; ++k) {
                const double s = 0.5 * D * k / n_samples;
                if (!detail::ball_inside(m, x, s) || !detail::ball_inside(m, y, s)) continue;
                const auto vx = ball_volume(m, x, s), vy = ball_volume(m, y, s);
                if (!vx || !vy) continue;
                r.samples.push_back({{{"x", x}, {"y", y}, {"s", s}, {"d", d}}, *vx / *vy, cross_center_ratio_bound(p, s, d)});
            }
        }
    }
    finalize_explicit(r, st.explicit_tol);
    return r;
}

// ---------------------------------------------------------------------------
// Neumann-Poincare (explicit) and local Sobolev (empirical)
// ---------------------------------------------------------------------------

/// Largest Poincare ratio int_{B_R}|u - mean|^2 / int_{B_2R}|grad u|^2 over the span of the
/// first `count` Neumann eigenfunctions of B_2R (all angular modes).
inline double poincare_ratio(const ModelManifold& m, double R, int M, int count = 40) {
    const auto ball = detail::ball_grid(m, 2.0 * R, M, Boundary::Neumann);
    const RadialGrid& g = *ball.grid;
    const double h = g.h;
    if (R < 4.0 * h) throw ConfigError("poincare audit: R is below four grid cells");
    const int l_max = m.one_dimensional() ? 0 : 12;
    Spectrum sp;
    sp.grid = ball.grid;
    for (int l = 0; l <= l_max; ++l) {
        const auto op = assemble_mode_operator(m, ball.grid, l, ball.left, ball.right);
        auto part = mode_spectrum(op, std::min(count, g.M));
        for (auto& e : part.entries) sp.entries.push_back(std::move(e));
    }
    sp.sort();
    if (static_cast<int>(sp.entries.size()) > count) sp.entries.resize(count);

    std::vector<char> inner(g.M);
    double VR = 0.0;
    for (int i = 0; i < g.M; ++i) {
        inner[i] = ball.dist(i) <= R;
        if (inner[i]) VR += g.mu[i];
    }
    std::map<int, std::vector<const SpectrumEntry*>> by_mode;
    for (const auto& e : sp.entries)
        if (!(e.l == 0 && e.lambda < 1e-10)) by_mode[e.l].push_back(&e);
    double best = 0.0;
    for (const auto& [l, es] : by_mode) {
        const int k = static_cast<int>(es.size());
        std::vector<std::vector<double>> v(k);
        for (int a = 0; a < k; ++a) {
            v[a] = es[a]->vec;
            if (l == 0) {
                double mean = 0.0;
                for (int i = 0; i < g.M; ++i)
                    if (inner[i]) mean += g.mu[i] * v[a][i];
                mean /= VR;
                for (double& x : v[a]) x -= mean;
            }
        }
        Eigen::MatrixXd A(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = a; b < k; ++b) {
                double s = 0.0;
                for (int i = 0; i < g.M; ++i)
                    if (inner[i]) s += g.mu[i] * v[a][i] * v[b][i];
                A(a, b) = A(b, a) = s / std::sqrt(es[a]->lambda * es[b]->lambda);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_solver(A, Eigen::EigenvaluesOnly);
        best = std::max(best, es_solver.eigenvalues().maxCoeff());
    }
    return best;
}

inline double poincare_constant(const ModelManifold& m, const CurvatureParams& p, double R) {
    const double K2 = k_epsilon_ball(m, p, 2.0 * R, detail::standard_center(m));
    const int cn = m.curvature_dim();
    return std::pow(2.0, cn + 3) * std::pow(2.0 * p.b / p.a, 1.0 / p.c) * std::exp(std::sqrt(K2 / p.c) * 2.0 * R / p.a) *
           R * R;
}

inline BoundReport audit_poincare(const ModelManifold& m, const CurvatureParams& p, double R, const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "neumann-poincare";
    if (2.0 * R > detail::max_ball_radius(m) + 1e-12 && !m.domain.periodic())
        throw ConfigError("poincare audit: B(2R) must lie inside the domain");
    const double lhs = poincare_ratio(m, R, st.M);
    r.samples.push_back({{{"R", R}}, lhs, poincare_constant(m, p, R)});
    finalize_explicit(r, st.explicit_tol);
    return r;
}

/// Largest ||u||_q^2 / (R^2 V^{-2/nu} int(|grad u|^2 + u^2/R^2)) over radial bumps and the first
/// 20 radial Dirichlet eigenfunctions of B(R); q = 2 nu / (nu - 2).
inline double sobolev_empirical_constant(const ModelManifold& m, const CurvatureParams& p, double R, int M) {
    const auto ball = detail::ball_grid(m, R, M, Boundary::Dirichlet);
    const RadialGrid& g = *ball.grid;
    const auto op = assemble_mode_operator(m, ball.grid, 0, ball.left, ball.right);
    const double nu = p.nu;
    const double q = 2.0 * nu / (nu - 2.0);
    const double V = detail::center_volume(m, R);
    std::vector<std::vector<double>> family;
    const double Rb = ball.whole ? detail::max_ball_radius(m) : R;
    for (double c0 : {0.0, 0.5}) {
        for (double w : {0.25, 0.5, 1.0}) {
            if (c0 + w > 1.0 + 1e-12) continue;
            std::vector<double> u(g.M, 0.0);
            for (int i = 0; i < g.M; ++i) {
                const double x = (ball.dist(i) - c0 * Rb) / (w * Rb);
                if (std::abs(x) < 1.0) u[i] = (1.0 - x * x) * (1.0 - x * x);
            }
            family.push_back(std::move(u));
        }
    }
    if (!ball.whole) {
        const auto sp = mode_spectrum(op, std::min(20, g.M));
        for (const auto& e : sp.entries) family.push_back(e.vec);
    }
    double best = 0.0;
    for (const auto& u : family) {
        double lq = 0.0, l2 = 0.0;
        for (int i = 0; i < g.M; ++i) {
            lq += g.mu[i] * std::pow(std::abs(u[i]), q);
            l2 += g.mu[i] * u[i] * u[i];
        }
        if (!(l2 > 0.0)) continue;
        const double num = std::pow(lq, 2.0 / q);
        const double den = R * R * std::pow(V, -2.0 / nu) * (op.energy(u) + l2 / (R * R));
        best = std::max(best, num / den);
    }
    return best;
}

inline BoundReport audit_sobolev(const ModelManifold& m, const CurvatureParams& p, double R, const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "local-sobolev";
    const double c1 = sobolev_empirical_constant(m, p, R, st.M);
    const double c2 = sobolev_empirical_constant(m, p, R, 2 * st.M);
    r.samples.push_back({{{"R", R}, {"M", static_cast<double>(st.M)}}, c1, std::nullopt});
    r.samples.push_back({{{"R", R}, {"M", static_cast<double>(2 * st.M)}}, c2, std::nullopt});
    finalize_empirical(r, c1, c2, st.stability_factor);
    const double ch = sobolev_empirical_constant(m, p, 0.5 * R, 2 * st.M);
    r.shape_exponents.push_back({"log2_constant_ratio_R_over_half_R", std::log2(c2 / ch), -kInf, kInf});
    r.note("test family: radial bumps and radial Dirichlet eigenfunctions");
    return r;
}

// ---------------------------------------------------------------------------
// Heat-kernel based audits
// ---------------------------------------------------------------------------

/// Zonal kernel column from the standard center: a positive solution of the weighted heat
/// equation that is radial about the center.
struct CenterSolution {
    HeatKernel kernel;
    int src = 0;

    std::vector<double> at(double t) const { return kernel.column(src, t, true); }
    const RadialGrid& grid() const { return kernel.grid(); }
};

inline CenterSolution center_solution(const ModelManifold& m, int M, double t_min) {
    auto g = detail::model_grid(m, M);
    return {HeatKernel::spectral(m, g, t_min, true), detail::center_node(m, *g)};
}

inline double mean_value_constant(const ModelManifold& m, const CurvatureParams& p, const AuditCylinderSpec& cyl,
                                  int M, double power) {
    const auto sol = center_solution(m, M, 0.9 * (cyl.t0 - cyl.R * cyl.R));
    const RadialGrid& g = sol.grid();
    const double R = cyl.R, s = cyl.t0, d = cyl.delta;
    const int nt = 33;
    const auto w = detail::simpson_weights(nt, s - R * R, s);
    double integral = 0.0, sup = 0.0;
    for (int k = 0; k < nt; ++k) {
        const double t = s - R * R + k * (R * R) / (nt - 1);
        const auto u = sol.at(t);
        double space = 0.0;
        for (int i = 0; i < g.M; ++i) {
            const double dist = detail::center_distance(m, g, i);
            if (dist <= R) space += g.mu[i] * std::pow(u[i], power);
            if (dist <= d * R && t >= s - d * R * R - 1e-12) sup = std::max(sup, std::pow(u[i], power));
        }
        integral += w[k] * space;
    }
    const double V = detail::center_volume(m, R);
    return sup * std::pow(1.0 - d, 2.0 + p.nu) * R * R * V / integral;
}

inline BoundReport audit_mean_value(const ModelManifold& m, const CurvatureParams& p, const AuditCylinderSpec& cyl,
                                    const AuditSettings& st = {}) {
    cyl.validate();
    BoundReport r;
    r.bound_id = "mean-value";
    double worst_drift_c1 = 0, worst_drift_c2 = 0, cmax = 0;
    bool ok = true;
    for (double pw : {1.0, 2.0}) {
        const double c1 = mean_value_constant(m, p, cyl, st.M, pw);
        const double c2 = mean_value_constant(m, p, cyl, 2 * st.M, pw);
        r.samples.push_back({{{"p", pw}, {"M", static_cast<double>(st.M)}}, c1, std::nullopt});
        r.samples.push_back({{{"p", pw}, {"M", static_cast<double>(2 * st.M)}}, c2, std::nullopt});
        BoundReport tmp;
        finalize_empirical(tmp, c1, c2, st.stability_factor);
        ok = ok && tmp.pass;
        if (c2 >= cmax) {
            cmax = c2;
            worst_drift_c1 = c1;
            worst_drift_c2 = c2;
        }
        if (!tmp.pass) {
            worst_drift_c1 = c1;
            worst_drift_c2 = c2;
        }
    }
    finalize_empirical(r, worst_drift_c1, worst_drift_c2, st.stability_factor);
    r.empirical_constant = cmax;
    r.pass = r.pass && ok;
    r.note("cylinder R=" + detail::fmt(cyl.R) + " t0=" + detail::fmt(cyl.t0) + " delta=" + detail::fmt(cyl.delta));
    return r;
}

inline double harnack_constant(const ModelManifold& m, const AuditCylinderSpec& cyl, int M) {
    const double R = cyl.R, t0 = cyl.t0;
    const auto sol = center_solution(m, M, 0.9 * (t0 - cyl.varsigma * R * R));
    const RadialGrid& g = sol.grid();
    double sup_minus = 0.0, inf_plus = kInf;
    const int nt = 9;
    for (int k = 0; k < nt; ++k) {
        const double tm = t0 - cyl.varsigma * R * R + k * (cyl.varsigma - cyl.rho) * R * R / (nt - 1);
        const double tp = t0 - cyl.eps * R * R + k * cyl.eps * R * R / (nt - 1);
        const auto um = sol.at(tm), up = sol.at(tp);
        for (int i = 0; i < g.M; ++i) {
            if (detail::center_distance(m, g, i) > cyl.delta * R) continue;
            sup_minus = std::max(sup_minus, um[i]);
            inf_plus = std::min(inf_plus, up[i]);
        }
    }
    if (!(inf_plus > 1e-300)) throw NumericalError("harnack audit: infimum below the positivity floor 1e-300");
    return sup_minus / inf_plus;
}

inline BoundReport audit_harnack(const ModelManifold& m, const CurvatureParams& p, const AuditCylinderSpec& cyl,
                                 const AuditSettings& st = {}) {
    cyl.validate();
    BoundReport r;
    r.bound_id = "parabolic-harnack";
    const double c1 = harnack_constant(m, cyl, st.M);
    const double c2 = harnack_constant(m, cyl, 2 * st.M);
    r.samples.push_back({{{"M", static_cast<double>(st.M)}}, c1, std::nullopt});
    r.samples.push_back({{{"M", static_cast<double>(2 * st.M)}}, c2, std::nullopt});
    finalize_empirical(r, c1, c2, st.stability_factor);
    const double Ke = k_epsilon_ball(m, p, cyl.R, detail::standard_center(m));
    r.shape_exponents.push_back({"sqrtK_R", std::sqrt(Ke) * cyl.R, 0.0, 0.0});
    r.note("cylinders delta=" + detail::fmt(cyl.delta) + " eps=" + detail::fmt(cyl.eps) + " rho=" + detail::fmt(cyl.rho) +
           " varsigma=" + detail::fmt(cyl.varsigma));
    return r;
}

/// sup over sampled (x, s), (y, t) of ln(u(x,s)/u(y,t)) divided by
/// (t-s) sqrt(D K_eps) + d^2/(t-s) + (t-s)/R^2 + (t-s)/s with D = 1.
inline double li_yau_harnack_constant(const ModelManifold& m, const CurvatureParams& p, double R, int M) {
    const std::vector<double> times{0.1 * R * R, 0.2 * R * R, 0.4 * R * R, 0.8 * R * R};
    const auto sol = center_solution(m, M, 0.9 * times.front());
    const RadialGrid& g = sol.grid();
    const double Ke = k_epsilon_ball(m, p, R, detail::standard_center(m));
    std::vector<std::vector<double>> u;
    for (double t : times) u.push_back(sol.at(t));
    std::vector<int> nodes;
    const int stride = std::max(1, g.M / 64);
    for (int i = 0; i < g.M; i += stride)
        if (detail::center_distance(m, g, i) <= R) nodes.push_back(i);
    double best = 0.0;
    for (std::size_t a = 0; a < times.size(); ++a)
        for (std::size_t b = a + 1; b < times.size(); ++b) {
            const double s = times[a], t = times[b], dt = t - s;
            for (int i : nodes)
                for (int j : nodes) {
                    const double lhs = std::log(u[a][i] / u[b][j]);
                    if (lhs <= 0.0) continue;
                    const double d = g.separation(i, j);
                    const double br = dt * std::sqrt(Ke) + d * d / dt + dt / (R * R) + dt / s;
                    best = std::max(best, lhs / br);
                }
        }
    return best;
}

inline BoundReport audit_li_yau_harnack(const ModelManifold& m, const CurvatureParams& p, double R,
                                        const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "li-yau-harnack";
    const double c1 = li_yau_harnack_constant(m, p, R, st.M);
    const double c2 = li_yau_harnack_constant(m, p, R, 2 * st.M);
    r.samples.push_back({{{"M", static_cast<double>(st.M)}}, c1, std::nullopt});
    r.samples.push_back({{{"M", static_cast<double>(2 * st.M)}}, c2, std::nullopt});
    if (c1 == 0.0 && c2 == 0.0) {
        r.pass = true;
        r.empirical_constant = 0.0;
        r.margin = std::log(st.stability_factor);
        r.note("log-quotient nonpositive on every sample");
    } else {
        finalize_empirical(r, c1, c2, st.stability_factor);
    }
    r.note("unspecified rate constant D taken as 1; cylinder fractions 4/5, 9/20, 11/20, 19/20");
    return r;
}

/// Sample plan of the Gaussian kernel audits: times and the largest admitted d^2/t.
struct KernelSamplePlan {
    std::vector<double> times;
    double max_ratio = 50.0;
    int space_samples = 64;

    static KernelSamplePlan standard(const ModelManifold& m) {
        const double D = detail::max_ball_radius(m);
        KernelSamplePlan plan;
        for (double f : {0.004, 0.01, 0.025, 0.05, 0.1, 0.25}) plan.times.push_back(f * D * D);
        return plan;
    }
};

struct KernelSample {
    double t = 0.0;
    double d = 0.0;
    double H = 0.0;
    double Vx = 0.0;
    double Vy = 0.0; ///< 0 when the off-center volume is unavailable
    double Ke = 0.0; ///< K_eps over the ball about the center containing both points, radius >= 10 sqrt t
};

namespace detail {

inline std::vector<KernelSample> kernel_samples(const ModelManifold& m, const KernelSamplePlan& plan, int M,
                                                bool* symmetric_volumes) {
    const double t_min = *std::min_element(plan.times.begin(), plan.times.end());
    const auto sol = center_solution(m, M, 0.99 * t_min);
    const RadialGrid& g = sol.grid();
    std::vector<KernelSample> out;
    bool sym = true;
    const int stride = std::max(1, g.M / plan.space_samples);
    for (double t : plan.times) {
        const auto col = sol.at(t);
        const double Vx = center_volume(m, std::sqrt(t));
        for (int i = sol.src % stride; i < g.M; i += stride) {
            const double d = center_distance(m, g, i);
            if (d * d / t > plan.max_ratio) continue;
            const auto vy = ball_volume(m, g.nodes[i], std::sqrt(t));
            if (!vy) sym = false;
            out.push_back({t, d, col[i], Vx, vy.value_or(0.0)});
        }
    }
    if (symmetric_volumes) *symmetric_volumes = sym;
    return out;
}

/// Running maximum of K_eps by distance from the standard center, so that K_eps over any ball
/// about the center is one binary search.
class KEpsByRadius {
public:
    KEpsByRadius(const ModelManifold& m, const CurvatureParams& p) {
        const double c = standard_center(m);
        for (double r : scan_points(m)) pts_.push_back({radial_distance(m, r, c), k_epsilon(m, p, r)});
        std::sort(pts_.begin(), pts_.end());
        for (std::size_t i = 1; i < pts_.size(); ++i) pts_[i].second = std::max(pts_[i].second, pts_[i - 1].second);
    }
    double operator()(double R) const {
        const auto it = std::upper_bound(pts_.begin(), pts_.end(), std::pair{R, kInf});
        return it == pts_.begin() ? 0.0 : std::prev(it)->second;
    }

private:
    std::vector<std::pair<double, double>> pts_;
};

inline void attach_k_eps(std::vector<KernelSample>& ss, const KEpsByRadius& ke) {
    for (auto& s : ss) s.Ke = ke(std::max(10.0 * std::sqrt(s.t), s.d));
}

/// Smallest C with H <= C / V exp(-d^2 / (4 (1 + eps) t) + K_eps t); the unspecified C(eps)
/// multiplying K_eps t is taken as 1.
inline double upper_constant(const std::vector<KernelSample>& ss, double eps_har, bool sym) {
    double c = 0.0;
    for (const auto& s : ss) {
        const double V = sym ? std::sqrt(s.Vx * s.Vy) : s.Vx;
        c = std::max(c, s.H * V * std::exp(s.d * s.d / (4.0 * (1.0 + eps_har) * s.t) - s.Ke * s.t));
    }
    return c;
}

} // namespace detail

/// Log-slope of H sqrt(V_x V_y) against d^2/t over the top decade d^2/t in [5, 50], at a fixed
/// time chosen so that the decade stays in the half of the domain nearest the source.
inline double gaussian_decay_slope(const ModelManifold& m, int M) {
    const double dmax = 0.5 * detail::max_ball_radius(m);
    const double t = dmax * dmax / 50.0;
    const auto sol = center_solution(m, M, 0.99 * t);
    const RadialGrid& g = sol.grid();
    const auto col = sol.at(t);
    std::vector<double> x, y;
    for (int i = 0; i < g.M; ++i) {
        const double d = detail::center_distance(m, g, i);
        const double ratio = d * d / t;
        if (ratio < 5.0 || ratio > 50.0 || col[i] <= 0.0) continue;
        const auto vy = ball_volume(m, g.nodes[i], std::sqrt(t));
        const double vx = detail::center_volume(m, std::sqrt(t));
        const double V = vy ? std::sqrt(vx * *vy) : vx;
        x.push_back(ratio);
        y.push_back(std::log(col[i] * V));
    }
    return detail::linear_fit(x, y).slope;
}

inline BoundReport audit_gaussian_upper(const ModelManifold& m, const CurvatureParams& p, double eps_har,
                                        const KernelSamplePlan& plan, const AuditSettings& st = {}) {
    if (!(eps_har > 0.0)) throw ConfigError("gaussian upper audit needs eps_har > 0");
    BoundReport r;
    r.bound_id = "gaussian-upper";
    bool sym1 = true, sym2 = true;
    auto s1 = detail::kernel_samples(m, plan, st.M, &sym1);
    auto s2 = detail::kernel_samples(m, plan, 2 * st.M, &sym2);
    const detail::KEpsByRadius ke(m, p);
    detail::attach_k_eps(s1, ke);
    detail::attach_k_eps(s2, ke);
    const bool sym = sym1 && sym2;
    const double c1 = detail::upper_constant(s1, eps_har, sym), c2 = detail::upper_constant(s2, eps_har, sym);
    double ke_max = 0.0;
    for (const auto& s : s2) {
        r.samples.push_back({{{"t", s.t}, {"d", s.d}, {"K_eps", s.Ke}}, s.H, std::nullopt});
        ke_max = std::max(ke_max, s.Ke);
    }
    finalize_empirical(r, c1, c2, st.stability_factor);
    const double slope = gaussian_decay_slope(m, 2 * st.M);
    const double rate = -1.0 / (4.0 * (1.0 + eps_har));
    r.shape_exponents.push_back({"decay_slope", slope, rate, rate});
    if (!(slope <= rate)) {
        r.pass = false;
        r.note("decay slope " + detail::fmt(slope) + " above the rate " + detail::fmt(rate));
    }
    r.note("eps_har=" + detail::fmt(eps_har));
    if (ke_max > 0.0)
        r.note("K_eps over the ball about the center containing both points, radius >= 10 sqrt t (max " +
               detail::fmt(ke_max) + "); C(eps) taken as 1");
    if (!sym) r.note("off-center volumes unavailable; single-center normalization V_x(sqrt t)");
    return r;
}

inline BoundReport audit_gaussian_lower(const ModelManifold& m, const CurvatureParams& p, const KernelSamplePlan& plan,
                                        const AuditSettings& st = {}) {
    (void)p;
    BoundReport r;
    r.bound_id = "gaussian-lower";
    const auto s1 = detail::kernel_samples(m, plan, st.M, nullptr);
    const auto s2 = detail::kernel_samples(m, plan, 2 * st.M, nullptr);
    const auto c_low = [](const std::vector<KernelSample>& ss, double c13, double c14) {
        double c = kInf;
        for (const auto& s : ss) c = std::min(c, s.H * s.Vx * std::exp(c13 * s.t + c14 * s.d * s.d / s.t));
        return c;
    };
    double best = -1.0, b13 = 0.0, b14 = 0.0;
    for (double c13 : {0.0, 0.5, 1.0, 2.0, 4.0})
        for (double c14 : {0.25, 0.5, 1.0}) {
            const double c = c_low(s1, c13, c14);
            if (c > best) {
                best = c;
                b13 = c13;
                b14 = c14;
            }
        }
    const double c2 = c_low(s2, b13, b14);
    for (const auto& s : s2) r.samples.push_back({{{"t", s.t}, {"d", s.d}}, s.H, std::nullopt});
    finalize_empirical(r, best, c2, st.stability_factor);
    r.shape_exponents.push_back({"c13", b13, b13, b13});
    r.shape_exponents.push_back({"c14", b14, b14, b14});
    return r;
}

/// Single-center variant: sup of H V_x(sqrt t) / ((1 + d/sqrt t)^{(1+c)/2c} exp(-d^2/(4(1+eps)t))).
inline BoundReport audit_single_center_upper(const ModelManifold& m, const CurvatureParams& p, double eps_har,
                                             const KernelSamplePlan& plan, const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "single-center-upper";
    const double e = (1.0 + p.c) / (2.0 * p.c);
    const auto cst = [&](const std::vector<KernelSample>& ss) {
        double c = 0.0;
        for (const auto& s : ss)
            c = std::max(c, s.H * s.Vx / (std::pow(1.0 + s.d / std::sqrt(s.t), e) *
                                          std::exp(-s.d * s.d / (4.0 * (1.0 + eps_har) * s.t))));
        return c;
    };
    const auto s1 = detail::kernel_samples(m, plan, st.M, nullptr);
    const auto s2 = detail::kernel_samples(m, plan, 2 * st.M, nullptr);
    for (const auto& s : s2) r.samples.push_back({{{"t", s.t}, {"d", s.d}}, s.H, std::nullopt});
    finalize_empirical(r, cst(s1), cst(s2), st.stability_factor);
    r.note("volume at scale sqrt(t) around the source (fixed-radius volume fails as t -> 0)");
    return r;
}

inline BoundReport audit_davies(const ModelManifold& m, const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "davies-integral";
    const auto g = detail::model_grid(m, st.M);
    const double D = detail::max_ball_radius(m);
    const double t_min = 0.01 * D * D;
    const auto k = HeatKernel::spectral(m, g, t_min, true);
    const int c = detail::center_node(m, *g);
    const auto within = [&](double a, double b) {
        CellRange cr{g->M, -1};
        for (int i = 0; i < g->M; ++i) {
            const double d = detail::center_distance(m, *g, i);
            if (d >= a && d <= b && (m.domain.kind == Domain::Kind::PoleCap || i >= c)) {
                cr.first = std::min(cr.first, i);
                cr.last = std::max(cr.last, i);
            }
        }
        return cr;
    };
    const std::vector<std::pair<CellRange, CellRange>> sets{
        {within(0.0, 0.2 * D), within(0.4 * D, 0.6 * D)},
        {within(0.0, 0.1 * D), within(0.7 * D, 0.9 * D)},
        {within(0.2 * D, 0.3 * D), within(0.3 * D, 0.5 * D)},
        {CellRange{0, g->M - 1}, CellRange{0, g->M - 1}}};
    for (const auto& [B1, B2] : sets) {
        if (B1.first > B1.last || B2.first > B2.last) continue;
        for (double f : {0.01, 0.05, 0.2, 1.0}) {
            const double t = f * D * D;
            const auto dv = davies_double_integral(k, B1, B2, t, 0.0);
            r.samples.push_back({{{"t", t}, {"d", dv.distance}, {"V1", dv.V1}, {"V2", dv.V2}}, dv.lhs, dv.rhs});
        }
    }
    finalize_explicit(r, st.explicit_tol);
    const auto sp = full_spectrum(m, g, m.one_dimensional() ? 0 : 1, 2);
    double lambda1 = 0.0;
    for (const auto& e : sp.entries)
        if (e.lambda > 1e-9) {
            lambda1 = e.lambda;
            break;
        }
    r.note("bottom of spectrum taken as 0 (Neumann/closed); computed lambda_1=" + detail::fmt(lambda1));
    return r;
}

/// Dirichlet-truncated masses at radii D k/10 (k = 1..10, D the largest ball radius) are
/// nondecreasing in R and at most 1, and the untruncated mass is 1.
inline BoundReport audit_stochastic_completeness(const ModelManifold& m, double t, const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "stochastic-completeness";
    const double D = detail::max_ball_radius(m);
    const double h = D / st.M;
    std::vector<double> Rs;
    for (int k = 1; k <= 10; ++k) Rs.push_back(D * k / 10.0);
    const auto prof = dirichlet_mass_profile(m, Rs, t, h);
    double prev = 0.0;
    bool mono = true, bounded = true;
    for (const auto& dm : prof) {
        r.samples.push_back({{{"R", dm.R}, {"t", t}}, dm.mass, 1.0});
        if (dm.mass < prev - 1e-12) mono = false;
        if (dm.mass > 1.0 + 1e-8) bounded = false;
        prev = dm.mass;
    }
    const auto g = detail::model_grid(m, st.M);
    const auto k = HeatKernel::spectral(m, g, t, true);
    const double full = mass(k.column(detail::center_node(m, *g), t, true), *g);
    r.samples.push_back({{{"R", kInf}, {"t", t}}, full, 1.0});
    r.pass = mono && bounded && std::abs(full - 1.0) <= 1e-8;
    r.margin = 1.0 - prev;
    if (!mono) r.note("Dirichlet mass not monotone in R");
    if (!bounded) r.note("Dirichlet mass exceeds 1");
    if (std::abs(full - 1.0) > 1e-8) r.note("Neumann mass drift " + detail::fmt(full - 1.0));
    r.note("largest-R Dirichlet mass " + detail::fmt(prev));
    return r;
}

// ---------------------------------------------------------------------------
// Eigenvalue lower bound (empirical)
// ---------------------------------------------------------------------------

struct EigenvalueBoundData {
    double C_emp = 0.0;
    double slope = 0.0;
    std::vector<double> lambdas;
};

/// C_emp = min_{1<=k<=k_max} lambda_k d^2 / (k+1)^{2c/(c+1)} and the log-log slope over the top decade.
inline EigenvalueBoundData eigenvalue_bound_data(const Spectrum& sp, double c, double d, int k_max) {
    EigenvalueBoundData out;
    out.lambdas = sp.expanded(static_cast<std::size_t>(k_max) + 1);
    const double e = 2.0 * c / (c + 1.0);
    out.C_emp = kInf;
    std::vector<double> x, y;
    for (int k = 1; k <= k_max; ++k) {
        out.C_emp = std::min(out.C_emp, out.lambdas[k] * d * d / std::pow(k + 1.0, e));
        if (k >= k_max / 10) {
            x.push_back(std::log(k + 1.0));
            y.push_back(std::log(out.lambdas[k]));
        }
    }
    out.slope = detail::linear_fit(x, y).slope;
    return out;
}

/// Spectrum complete up to the (k_max+1)-th eigenvalue, widening the mode range as needed.
inline Spectrum counted_spectrum(const ModelManifold& m, int M, int k_max) {
    const auto g = detail::model_grid(m, M);
    int l_max = m.one_dimensional() ? 0 : 16, kpm = m.one_dimensional() ? k_max + 2 : 24;
    for (int attempt = 0; attempt < 6; ++attempt) {
        auto sp = full_spectrum(m, g, l_max, std::min(kpm, g->M));
        try {
            (void)sp.expanded(static_cast<std::size_t>(k_max) + 1);
            return sp;
        } catch (const NumericalError&) {
            l_max *= 2;
            kpm *= 2;
        }
    }
    throw NumericalError("spectrum incomplete below the requested rank; widen l_max");
}

inline BoundReport audit_eigenvalue_lower(const ModelManifold& m, const CurvatureParams& p, int k_max = 200,
                                          const AuditSettings& st = {}) {
    if (!(m.compact_closed() || m.domain.kind == Domain::Kind::Interval))
        throw ConfigError("eigenvalue audit needs a compact model");
    BoundReport r;
    r.bound_id = "eigenvalue-lower";
    const double d = m.diameter();
    const auto a = eigenvalue_bound_data(counted_spectrum(m, st.M, k_max), p.c, d, k_max);
    const auto b = eigenvalue_bound_data(counted_spectrum(m, 2 * st.M, k_max), p.c, d, k_max);
    for (int k = 1; k <= k_max; ++k) r.samples.push_back({{{"k", static_cast<double>(k)}}, b.lambdas[k], std::nullopt});
    finalize_empirical(r, a.C_emp, b.C_emp, st.stability_factor);
    const double need = 2.0 * p.c / (p.c + 1.0) - 0.05;
    r.shape_exponents.push_back({"growth_exponent", b.slope, need, need});
    if (!(b.slope >= need)) {
        r.pass = false;
        r.note("growth exponent " + detail::fmt(b.slope) + " below " + detail::fmt(need));
    }
    r.note("k >= 1 only (lambda_0 = 0); d = diameter " + detail::fmt(d));
    if (p.K != 0.0) r.note("curvature exponential factor absorbed into the empirical constant");
    return r;
}

// ---------------------------------------------------------------------------
// Li-Yau machinery
// ---------------------------------------------------------------------------

struct LiYauParams {
    double alpha = 1.1;
    double p = 3.0;
    int n = 2;          ///< manifold dimension entering delta, tau, C28 and 2n+1
    double delta = 0.4;
    double tau = 12.5;
    double C28 = 0.0;
    double C29 = 0.0;
    double C_hat = 1.0;
    std::string C_hat_source = "user-supplied";
    bool C29_clamped = false;
    RadialField V;
};

/// (2n + (2-delta)(N-n)) / (2n(N-n)); (2-delta)/(2n) for N = inf; 0 when phi is constant.
inline double c28(int n, EffectiveDim N, double delta, bool phi_constant) {
    if (phi_constant) return 0.0;
    if (N.infinite()) return (2.0 - delta) / (2.0 * n);
    if (N.value() == n) throw ParameterError("C28 is undefined at N = n with nonconstant phi");
    return (2.0 * n + (2.0 - delta) * (N.value() - n)) / (2.0 * n * (N.value() - n));
}

inline LiYauParams make_li_yau_params(const ModelManifold& m, const CurvatureParams& cp,
                                      std::shared_ptr<const RadialGrid> grid, double alpha, double p, double C_hat,
                                      std::string C_hat_source) {
    LiYauParams lp;
    lp.n = m.n;
    if (!(alpha > 1.0)) throw ParameterError("Li-Yau audit needs alpha > 1");
    if (!(p > lp.n)) throw ParameterError("Li-Yau audit needs p > n");
    lp.alpha = alpha;
    lp.p = p;
    lp.delta = 2.0 / (2.0 * lp.n + 1.0);
    lp.tau = 5.0 / lp.delta;
    lp.C28 = c28(lp.n, cp.N, lp.delta, m.density.is_constant());
    lp.C_hat = C_hat;
    lp.C_hat_source = std::move(C_hat_source);
    const int cn = m.curvature_dim();
    const RadialGrid& g = *grid;
    std::vector<double> V(g.M);
    double e_norm = 0.0;
    for (int i = 0; i < g.M; ++i) {
        const double w = std::exp(4.0 * (cp.eps - 1.0) * g.phi[i] / (cn - 1));
        V[i] = std::max(cp.K * w + lp.C28 * g.dphi[i] * g.dphi[i], 0.0);
        e_norm += std::pow(w, p) * g.mu[i];
    }
    lp.V = RadialField(grid, std::move(V));
    const double c29 = cp.K * std::pow(e_norm, 1.0 / p) + lp.C28 * grad_phi_lp(g, p, true);
    lp.C29_clamped = c29 < 0.0;
    lp.C29 = std::max(c29, 0.0);
    return lp;
}

/// 2^{-1/(tau-1)} exp(-(tau-1)^{n/(2p-n)} (4 C29 C_hat^{1/p})^{2p/(2p-n)} t).
inline double j_lower_bound(const LiYauParams& lp, double t, double C_hat_scale = 1.0) {
    if (!(lp.p > lp.n)) throw ParameterError("j_lower_bound needs p > n");
    const double n = lp.n, p = lp.p, tm1 = lp.tau - 1.0;
    const double rate = std::pow(tm1, n / (2.0 * p - n)) *
                        std::pow(4.0 * lp.C29 * std::pow(lp.C_hat * C_hat_scale, 1.0 / p), 2.0 * p / (2.0 * p - n));
    return std::pow(2.0, -1.0 / tm1) * std::exp(-rate * t);
}

struct JSolution {
    HeatSolution w;
    std::vector<std::vector<double>> J;
};

/// Backward-Euler solution of w_t = Delta_phi w + 2(tau-1) V w, w(0) = 1, and J = w^{-1/(tau-1)}.
/// The step is capped so that dt 2(tau-1) max V < 1/2, which keeps the system an M-matrix and
/// w >= 1 for V >= 0.
inline JSolution solve_j_function(const ModelManifold& m, const LiYauParams& lp, double T, double dt) {
    if (!m.compact_closed() && m.domain.kind != Domain::Kind::Interval)
        throw ConfigError("J solver needs a compact model");
    const auto grid = lp.V.grid;
    const auto op = assemble_mode_operator(m, grid, 0);
    const double k = 2.0 * (lp.tau - 1.0);
    double vmax = 0.0;
    for (double v : lp.V.values) vmax = std::max(vmax, v);
    if (vmax > 0.0) dt = std::min(dt, 0.5 / (k * vmax));
    const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-12)));
    const double h = T / steps;
    const RadialGrid& g = *grid;
    Tridiagonal A = detail::implicit_matrix(op, h);
    for (int i = 0; i < g.M; ++i) A.diag[i] -= h * k * lp.V.values[i] * g.mu[i];
    JSolution out;
    out.w.grid = grid;
    std::vector<double> w(g.M, 1.0);
    const auto record = [&](double t) {
        out.w.times.push_back(t);
        out.w.values.push_back(w);
        std::vector<double> J(g.M);
        for (int i = 0; i < g.M; ++i) J[i] = std::pow(w[i], -1.0 / (lp.tau - 1.0));
        out.J.push_back(std::move(J));
    };
    record(0.0);
    for (int s = 1; s <= steps; ++s) {
        std::vector<double> rhs(g.M);
        for (int i = 0; i < g.M; ++i) rhs[i] = g.mu[i] * w[i];
        w = tridiagonal_solve(A, rhs);
        for (double x : w)
            if (!(x > 0.0)) throw NumericalError("J solver produced a nonpositive w");
        record(s * h);
    }
    for (const auto& J : out.J)
        for (double x : J)
            if (x > 1.0 + 1e-10) throw NumericalError("J exceeds 1");
    return out;
}

inline BoundReport audit_j_function(const ModelManifold& m, const LiYauParams& lp, double T,
                                    const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "j-function";
    const auto js = solve_j_function(m, lp, T, T / 200.0);
    double worst = kInf;
    for (std::size_t k = 1; k < js.w.times.size(); k += std::max<std::size_t>(1, js.w.times.size() / 20)) {
        const double t = js.w.times[k];
        const double Jmin = *std::min_element(js.J[k].begin(), js.J[k].end());
        const double lower = j_lower_bound(lp, t);
        r.samples.push_back({{{"t", t}}, lower, Jmin});
        worst = std::min(worst, Jmin);
    }
    finalize_explicit(r, st.explicit_tol);
    const double t_end = js.w.times.back();
    r.note("C_hat=" + detail::fmt(lp.C_hat) + " (" + lp.C_hat_source + "); J_lower(T) at 0.5x/1x/2x C_hat: " +
           detail::fmt(j_lower_bound(lp, t_end, 0.5)) + "/" + detail::fmt(j_lower_bound(lp, t_end)) + "/" +
           detail::fmt(j_lower_bound(lp, t_end, 2.0)));
    if (lp.C29_clamped) r.note("C29 negative, clamped at 0");
    r.note("min J over run " + detail::fmt(worst));
    return r;
}

/// Centered-difference |u'| with mirror ghosts at pole/Neumann ends and wraparound on circles.
inline std::vector<double> radial_gradient(const RadialGrid& g, const std::vector<double>& u) {
    const int M = g.M;
    std::vector<double> du(M);
    for (int i = 0; i < M; ++i) {
        const double left = i > 0 ? u[i - 1] : (g.periodic ? u[M - 1] : u[0]);
        const double right = i + 1 < M ? u[i + 1] : (g.periodic ? u[0] : u[M - 1]);
        du[i] = (right - left) / (2.0 * g.h);
    }
    return du;
}

struct LiYauEvaluation {
    double lhs = 0.0;           ///< sup_x of J_lower |grad u|^2/u^2 - alpha Delta_phi u / u
    double rhs = 0.0;           ///< (2n+1) / (2 t J_lower)
    double classical_lhs = 0.0; ///< same with J_lower replaced by 1
};

inline LiYauEvaluation evaluate_li_yau(const ModeOperator& op0, const LiYauParams& lp, const std::vector<double>& u,
                                       double t) {
    const RadialGrid& g = *op0.grid;
    double umax = 0.0;
    for (double x : u) umax = std::max(umax, x);
    for (double x : u)
        if (x < -1e-10 * umax) throw NumericalError("Li-Yau audit needs a positive solution");
    const double Jl = j_lower_bound(lp, t);
    const auto du = radial_gradient(g, u);
    const auto Lu = op0.apply(u);
    LiYauEvaluation ev;
    ev.lhs = -kInf;
    ev.classical_lhs = -kInf;
    for (int i = 0; i < g.M; ++i) {
        if (u[i] < 1e-10 * umax) continue;
        const double gq = du[i] * du[i] / (u[i] * u[i]);
        const double tq = Lu[i] / u[i];
        ev.lhs = std::max(ev.lhs, Jl * gq - lp.alpha * tq);
        ev.classical_lhs = std::max(ev.classical_lhs, gq - lp.alpha * tq);
    }
    ev.rhs = (2.0 * lp.n + 1.0) / (2.0 * t * Jl);
    return ev;
}

/// Li-Yau audit on zonal kernel columns started at the standard center and at a second node.
inline BoundReport audit_li_yau(const ModelManifold& m, const CurvatureParams& cp, const LiYauParams& lp,
                                const std::vector<double>& t_list, const AuditSettings& st = {}) {
    BoundReport r;
    r.bound_id = "li-yau";
    if (!m.compact_closed() && m.domain.kind != Domain::Kind::Interval)
        throw ConfigError("Li-Yau audit needs a compact model");
    const auto scan = curvature_hypothesis_scan(m, cp);
    if (!scan.holds) {
        mark_vacuous(r, scan.worst_violation, scan.worst_r);
        return r;
    }
    const auto grid = lp.V.grid;
    const double t_min = *std::min_element(t_list.begin(), t_list.end());
    const auto k = HeatKernel::spectral(m, grid, 0.99 * t_min, true);
    const auto op0 = assemble_mode_operator(m, grid, 0);
    const int c = detail::center_node(m, *grid);
    double classical = -kInf;
    for (int src : {c, (c + grid->M / 3) % grid->M}) {
        for (double t : t_list) {
            const auto u = k.column(src, t, true);
            const auto ev = evaluate_li_yau(op0, lp, u, t);
            r.samples.push_back({{{"t", t}, {"source_r", grid->nodes[src]}}, ev.lhs, ev.rhs});
            classical = std::max(classical, ev.classical_lhs * t);
        }
    }
    finalize_explicit(r, st.li_yau_tol);
    r.shape_exponents.push_back({"classical_sup_t_lhs", classical, 0.0, 0.0});
    r.note("alpha=" + detail::fmt(lp.alpha) + " p=" + detail::fmt(lp.p) + " C_hat=" + detail::fmt(lp.C_hat) + " (" +
           lp.C_hat_source + ")");
    if (lp.C29_clamped) r.note("C29 negative, clamped at 0");
    // Below a few cells per diffusion length the discrete gradient misjudges the kernel.
    if (std::sqrt(t_min) < 4.0 * grid->h)
        r.note("t=" + detail::fmt(t_min) + " under-resolved (sqrt t < 4h); raise M");
    return r;
}

} // namespace phiheat
