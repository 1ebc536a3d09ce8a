/// @file grid.hpp
/// @brief Staggered radial grids with measure-consistent node and face weights.
#pragma once

#include "phiheat/errors.hpp"
#include "phiheat/model_geometry.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace phiheat {

/// Nodes r_i = lo + (i + 1/2)h (0-based), faces lo + ih. Node measures
/// mu_i = omega f(r_i)^{n-1} e^{-phi(r_i)} h, face weights w_i = omega f^{n-1} e^{-phi} at face i.
/// Periodic grids have M faces (face M coincides with face 0).
struct RadialGrid {
    double lo = 0.0;
    double hi = 1.0;
    double h = 1.0;
    int M = 0;
    bool periodic = false;
    std::vector<double> nodes;
    std::vector<double> faces;
    std::vector<double> mu;
    std::vector<double> w;
    std::vector<double> f;     ///< warp at nodes
    std::vector<double> phi;   ///< density at nodes
    std::vector<double> dphi;  ///< phi' at nodes

    /// Grid over the whole model domain.
    static RadialGrid build(const ModelManifold& m, int M) {
        return build(m, M, m.domain.r_min, m.domain.r_max);
    }

    /// Grid over [lo, hi] inside the model domain (balls B_pole(R) use [0, R]).
    static RadialGrid build(const ModelManifold& m, int M, double lo, double hi) {
        if (M < 4) throw ConfigError("grid needs at least 4 nodes");
        if (!(hi > lo)) throw ConfigError("grid interval is empty");
        if (lo < m.domain.r_min - 1e-12 || hi > m.domain.r_max + 1e-12)
            throw ConfigError("grid interval exceeds the model domain");
        RadialGrid g;
        g.lo = lo;
        g.hi = hi;
        g.M = M;
        g.h = (hi - lo) / M;
        g.periodic = m.domain.periodic() && lo == m.domain.r_min && hi == m.domain.r_max;
        g.nodes.resize(M);
        g.mu.resize(M);
        g.f.resize(M);
        g.phi.resize(M);
        g.dphi.resize(M);
        for (int i = 0; i < M; ++i) {
            const double r = lo + (i + 0.5) * g.h;
            g.nodes[i] = r;
            g.mu[i] = m.measure_density(r) * g.h;
            g.f[i] = m.warp.value(r);
            const Jet p = m.phi(r);
            g.phi[i] = p.v;
            g.dphi[i] = p.d1;
            if (!(g.mu[i] > 0.0)) throw ConfigError("nonpositive node measure");
        }
        const int nf = g.periodic ? M : M + 1;
        g.faces.resize(nf);
        g.w.resize(nf);
        for (int i = 0; i < nf; ++i) {
            const double r = lo + i * g.h;
            g.faces[i] = r;
            g.w[i] = m.measure_density(r);
        }
        return g;
    }

    double total_mass() const {
        double s = 0.0;
        for (double v : mu) s += v;
        return s;
    }

    /// Index of the node closest to r.
    int locate(double r) const {
        int i = static_cast<int>(std::floor((r - lo) / h));
        return std::clamp(i, 0, M - 1);
    }

    /// Signed node separation along the coordinate, wrapped on periodic grids.
    double separation(int i, int j) const {
        const double d = std::abs(nodes[i] - nodes[j]);
        return periodic ? std::min(d, (hi - lo) - d) : d;
    }
};

/// Node values on a grid.
struct RadialField {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> values;

    RadialField() = default;
    RadialField(std::shared_ptr<const RadialGrid> g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (!grid || static_cast<int>(values.size()) != grid->M)
            throw ConfigError("field length does not match the grid node count");
    }
    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

/// (sum |phi'|^p mu_i)^{1/p}, or with |phi'|^{2p} when `squared` (the L^p norm of |grad phi|^2).
inline double grad_phi_lp(const RadialGrid& g, double p, bool squared = false) {
    if (p < 1.0) throw ParameterError("grad_phi_lp needs p >= 1");
    const double e = squared ? 2.0 * p : p;
    double s = 0.0;
    for (int i = 0; i < g.M; ++i) s += std::pow(std::abs(g.dphi[i]), e) * g.mu[i];
    return std::pow(s, 1.0 / p);
}

inline double grad_phi_lp(const ModelManifold& m, int M, double p, bool squared = false) {
    return grad_phi_lp(RadialGrid::build(m, M), p, squared);
}

/// Integral of a node field against mu.
inline double mass(const std::vector<double>& u, const RadialGrid& g) {
    double s = 0.0;
    for (int i = 0; i < g.M; ++i) s += u[i] * g.mu[i];
    return s;
}

} // namespace phiheat
