/// @file heat_semigroup.hpp
/// @brief Weighted heat kernels (spectral sums or implicit time stepping), heat solutions and
/// semigroup-level quantities: mass, Dirichlet-truncated mass, Harnack quotients, Davies integrals.
#pragma once

#include "phiheat/discrete_operator.hpp"
#include "phiheat/errors.hpp"
#include "phiheat/grid.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

namespace phiheat {

enum class Scheme { BackwardEuler, CrankNicolson };

namespace detail {

/// D - theta*dt*S as a tridiagonal system.
inline Tridiagonal implicit_matrix(const ModeOperator& op, double theta_dt) {
    Tridiagonal A;
    A.cyclic = op.S.cyclic;
    const int M = op.size();
    A.diag.resize(M);
    A.sub.resize(M);
    A.sup.resize(M);
    for (int i = 0; i < M; ++i) {
        A.diag[i] = op.grid->mu[i] - theta_dt * op.S.diag[i];
        A.sub[i] = -theta_dt * op.S.sub[i];
        A.sup[i] = -theta_dt * op.S.sup[i];
    }
    return A;
}

} // namespace detail

/// One implicit step of u_t = L u. Backward Euler solves (D - dt S)u' = D u; Crank-Nicolson
/// solves (D - dt S/2)u' = (D + dt S/2)u.
inline std::vector<double> heat_step(const ModeOperator& op, const std::vector<double>& u, double dt,
                                     Scheme scheme = Scheme::CrankNicolson) {
    if (!(dt > 0.0)) throw OutOfRangeError("heat_step needs dt > 0");
    const int M = op.size();
    if (static_cast<int>(u.size()) != M) throw ConfigError("heat_step: field length mismatch");
    const auto& mu = op.grid->mu;
    if (scheme == Scheme::BackwardEuler) {
        std::vector<double> rhs(M);
        for (int i = 0; i < M; ++i) rhs[i] = mu[i] * u[i];
        return tridiagonal_solve(detail::implicit_matrix(op, dt), rhs);
    }
    auto Su = op.S.apply(u);
    std::vector<double> rhs(M);
    for (int i = 0; i < M; ++i) rhs[i] = mu[i] * u[i] + 0.5 * dt * Su[i];
    return tridiagonal_solve(detail::implicit_matrix(op, 0.5 * dt), rhs);
}

struct HeatSolution {
    std::shared_ptr<const RadialGrid> grid;
    int l = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> values;
};

/// Steps u0 to time T with ceil(T/dt) equal steps, recording every `record_every` steps
/// (and always the initial and final states).
inline HeatSolution solve_heat(const ModeOperator& op, const std::vector<double>& u0, double T, double dt,
                               Scheme scheme = Scheme::CrankNicolson, int record_every = 1) {
    if (!(T >= 0.0) || !(dt > 0.0)) throw OutOfRangeError("solve_heat needs T >= 0 and dt > 0");
    const int steps = static_cast<int>(std::ceil(T / dt - 1e-12));
    const double h = steps > 0 ? T / steps : dt;
    HeatSolution sol;
    sol.grid = op.grid;
    sol.l = op.l;
    sol.times.push_back(0.0);
    sol.values.push_back(u0);
    std::vector<double> u = u0;
    const Tridiagonal A = detail::implicit_matrix(op, scheme == Scheme::BackwardEuler ? h : 0.5 * h);
    const auto& mu = op.grid->mu;
    for (int k = 1; k <= steps; ++k) {
        std::vector<double> rhs(u.size());
        if (scheme == Scheme::BackwardEuler) {
            for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = mu[i] * u[i];
        } else {
            const auto Su = op.S.apply(u);
            for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = mu[i] * u[i] + 0.5 * h * Su[i];
        }
        u = tridiagonal_solve(A, rhs);
        if (k % record_every == 0 || k == steps) {
            sol.times.push_back(k * h);
            sol.values.push_back(u);
        }
    }
    return sol;
}

/// mu-normalized indicator of one cell: the discrete delta at node j.
inline std::vector<double> delta_field(const RadialGrid& g, int j) {
    std::vector<double> u(g.M, 0.0);
    u[j] = 1.0 / g.mu[j];
    return u;
}

/// Weighted heat kernel on a grid.
///
/// Spectral kernels sum e^{-lambda t} v(x) v(y) over a spectrum that is complete below
/// lambda_0 + 33/t_min, so the discarded tail is below 1e-14 of the leading term for t >= t_min.
/// Pairs on a common radial ray weight each mode by its multiplicity m_l; the zonal kernel
/// (sphere average in one variable) keeps l = 0 only. Stepped kernels run backward Euler
/// from a discrete delta and are zonal.
class HeatKernel {
public:
    enum class Representation { Spectral, Stepped };

    static HeatKernel spectral(const ModelManifold& m, std::shared_ptr<const RadialGrid> grid, double t_min,
                               bool zonal_only = false) {
        if (!(t_min > 0.0)) throw OutOfRangeError("heat kernel needs t_min > 0");
        const auto op0 = assemble_mode_operator(m, grid, 0);
        const double lambda0 = mode_spectrum(op0, 1).entries.front().lambda;
        HeatKernel k;
        k.rep_ = Representation::Spectral;
        k.grid_ = grid;
        k.spectrum_ = spectrum_below(m, grid, lambda0 + 33.0 / t_min, zonal_only ? 0 : -1);
        k.lambda0_ = lambda0;
        k.zonal_only_ = zonal_only;
        return k;
    }

    static HeatKernel from_spectrum(Spectrum sp) {
        HeatKernel k;
        k.rep_ = Representation::Spectral;
        k.grid_ = sp.grid;
        k.lambda0_ = sp.entries.empty() ? 0.0 : sp.entries.front().lambda;
        k.spectrum_ = std::move(sp);
        return k;
    }

    static HeatKernel stepped(const ModeOperator& op0, double dt) {
        if (op0.l != 0) throw ConfigError("stepped kernels use the l = 0 operator");
        HeatKernel k;
        k.rep_ = Representation::Stepped;
        k.grid_ = op0.grid;
        k.op_ = op0;
        k.dt_ = dt;
        k.zonal_only_ = true;
        return k;
    }

    Representation representation() const { return rep_; }
    const RadialGrid& grid() const { return *grid_; }
    std::shared_ptr<const RadialGrid> grid_ptr() const { return grid_; }
    const Spectrum& spectrum() const { return spectrum_; }
    double lambda0() const { return lambda0_; }

    /// Smallest t for which the spectral truncation guard holds.
    double t_min() const {
        if (rep_ == Representation::Stepped) return 0.0;
        return 32.3 / (spectrum_.complete_below - lambda0_);
    }

    /// Kernel between nodes i and j on a common ray at time t.
    double operator()(int i, int j, double t) const { return value(i, j, t, false); }
    double zonal(int i, int j, double t) const { return value(i, j, t, true); }

    /// x -> H(x, y_j, t) over all nodes.
    std::vector<double> column(int j, double t, bool zonal = false) const {
        check_time(t);
        const int M = grid_->M;
        if (rep_ == Representation::Stepped) {
            const auto sol = solve_heat(*op_, delta_field(*grid_, j), t, dt_, Scheme::BackwardEuler, 1 << 30);
            return sol.values.back();
        }
        std::vector<double> out(M, 0.0);
        for (const auto& e : spectrum_.entries) {
            if (zonal && e.l != 0) continue;
            const double c = e.multiplicity * std::exp(-e.lambda * t) * e.vec[j];
            if (c == 0.0) continue;
            for (int i = 0; i < M; ++i) out[i] += c * e.vec[i];
        }
        return out;
    }

private:
    double value(int i, int j, double t, bool zonal) const {
        check_time(t);
        if (rep_ == Representation::Stepped) return column(j, t)[i];
        double s = 0.0;
        for (const auto& e : spectrum_.entries) {
            if (zonal && e.l != 0) continue;
            s += e.multiplicity * std::exp(-e.lambda * t) * e.vec[i] * e.vec[j];
        }
        return s;
    }

    void check_time(double t) const {
        if (!(t > 0.0)) throw OutOfRangeError("heat kernel needs t > 0");
        if (rep_ == Representation::Spectral && t < t_min() * (1.0 - 1e-12)) {
            std::ostringstream os;
            os << "spectral truncation guard fails at t = " << t << " (valid for t >= " << t_min()
               << "); increase the spectral rank";
            throw NumericalError(os.str());
        }
    }

    Representation rep_ = Representation::Spectral;
    std::shared_ptr<const RadialGrid> grid_;
    Spectrum spectrum_;
    std::optional<ModeOperator> op_;
    double dt_ = 0.0;
    double lambda0_ = 0.0;
    bool zonal_only_ = false;
};

struct DirichletMass {
    double R = 0.0;
    double mass = 0.0;
};

/// Mass at time t of the heat kernel started from a fixed source, on the domain truncated to
/// the ball of radius R with Dirichlet data on the cut. The source is the pole for pole caps and
/// the domain midpoint for one-dimensional models. All truncations share the spacing h, so the
/// grids nest and the values are nondecreasing in R.
inline std::vector<DirichletMass> dirichlet_mass_profile(const ModelManifold& m, const std::vector<double>& R_list,
                                                         double t, double h) {
    if (!(t > 0.0)) throw OutOfRangeError("dirichlet_mass_profile needs t > 0");
    if (!(h > 0.0)) throw ConfigError("dirichlet_mass_profile needs h > 0");
    std::vector<DirichletMass> out;
    const bool pole = m.domain.kind == Domain::Kind::PoleCap;
    const double x0 = pole ? 0.0 : 0.5 * (m.domain.r_min + m.domain.r_max);
    for (double R : R_list) {
        const int cells = std::max(2, static_cast<int>(std::lround(R / h)));
        double lo, hi;
        int src;
        if (pole) {
            lo = 0.0;
            hi = std::min(cells * h, m.domain.r_max);
        } else {
            lo = std::max(m.domain.r_min, x0 - cells * h);
            hi = std::min(m.domain.r_max, x0 + cells * h);
        }
        const bool cut_lo = !pole && lo > m.domain.r_min + 1e-12;
        const bool cut_hi = hi < m.domain.r_max - 1e-12;
        const bool whole = !cut_lo && !cut_hi;
        const int M = std::max(4, static_cast<int>(std::lround((hi - lo) / h)));
        auto grid = std::make_shared<const RadialGrid>(
            whole ? RadialGrid::build(m, M) : RadialGrid::build(m, M, lo, hi));
        src = pole ? 0 : grid->locate(x0 - 0.5 * h);
        auto [lb, rb] = natural_boundaries(m, *grid);
        if (cut_lo) lb = Boundary::Dirichlet;
        if (cut_hi) rb = Boundary::Dirichlet;
        if (!whole && grid->periodic) throw ConfigError("truncation of a periodic grid");
        const auto op = assemble_mode_operator(m, grid, 0, lb, rb);
        const double lambda0 = mode_spectrum(op, 1).entries.front().lambda;
        const auto sp = mode_spectrum_below(op, lambda0 + 33.0 / t);
        double total = 0.0;
        for (const auto& e : sp.entries) total += std::exp(-e.lambda * t) * e.vec[src] * mass(e.vec, *grid);
        out.push_back({pole ? hi : 0.5 * (hi - lo), total});
    }
    return out;
}

/// ln(u(x_i, s) / u(y_j, t)) for recorded times s = times[a] < t = times[b].
inline double harnack_quotient(const HeatSolution& sol, int i, int a, int j, int b) {
    if (a > b) throw OutOfRangeError("harnack_quotient needs s <= t");
    const double us = sol.values.at(a).at(i), ut = sol.values.at(b).at(j);
    if (!(us > 0.0) || !(ut > 0.0)) throw NumericalError("harnack_quotient of a nonpositive solution");
    return std::log(us / ut);
}

/// A set of consecutive cells [first, last] of the grid (an annulus around the pole, or an arc).
struct CellRange {
    int first = 0;
    int last = 0;
};

struct DaviesPair {
    double lhs = 0.0;
    double rhs = 0.0;
    double distance = 0.0;
    double V1 = 0.0;
    double V2 = 0.0;
};

/// lhs = sum over B1 x B2 of H mu mu (zonal kernel, so annuli are integrated exactly over
/// angles); rhs = sqrt(V1 V2) exp(-d^2/4t - mu1 t) with d the gap between the cell ranges.
inline DaviesPair davies_double_integral(const HeatKernel& k, CellRange B1, CellRange B2, double t, double mu1 = 0.0) {
    const RadialGrid& g = k.grid();
    if (B1.first < 0 || B2.first < 0 || B1.last >= g.M || B2.last >= g.M || B1.first > B1.last || B2.first > B2.last)
        throw ConfigError("davies_double_integral: cell range outside the grid");
    DaviesPair out;
    for (int i = B1.first; i <= B1.last; ++i) out.V1 += g.mu[i];
    for (int j = B2.first; j <= B2.last; ++j) out.V2 += g.mu[j];
    for (int j = B2.first; j <= B2.last; ++j) {
        const auto col = k.column(j, t, true);
        for (int i = B1.first; i <= B1.last; ++i) out.lhs += col[i] * g.mu[i] * g.mu[j];
    }
    const double a0 = g.lo + B1.first * g.h, a1 = g.lo + (B1.last + 1) * g.h;
    const double b0 = g.lo + B2.first * g.h, b1 = g.lo + (B2.last + 1) * g.h;
    double d = std::max({0.0, b0 - a1, a0 - b1});
    if (g.periodic) {
        const double L = g.hi - g.lo;
        if (b0 >= a1) d = std::min(d, std::max(0.0, a0 + L - b1));
        else if (a0 >= b1) d = std::min(d, std::max(0.0, b0 + L - a1));
    }
    out.distance = d;
    out.rhs = std::sqrt(out.V1 * out.V2) * std::exp(-d * d / (4.0 * t) - mu1 * t);
    return out;
}

} // namespace phiheat
