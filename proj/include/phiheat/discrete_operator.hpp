/// @file discrete_operator.hpp
/// @brief Finite-volume weighted Laplacian per angular mode and its mu-orthonormal spectra.
///
/// For mode l the operator is (L u)_i = (S u)_i / mu_i with S symmetric:
/// S couples neighbours through w_face / h and carries -gamma_l mu_i / f_i^2 on the diagonal.
#pragma once

#include "phiheat/errors.hpp"
#include "phiheat/grid.hpp"
#include "phiheat/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace phiheat {

enum class Boundary { Neumann, Dirichlet, Pole, Periodic };

inline std::string to_string(Boundary b) {
    switch (b) {
    case Boundary::Neumann: return "neumann";
    case Boundary::Dirichlet: return "dirichlet";
    case Boundary::Pole: return "pole";
    case Boundary::Periodic: return "periodic";
    }
    return "?";
}

/// Eigenvalue l(l+n-2) of the Laplacian on S^{n-1}.
inline double angular_eigenvalue(int n, int l) { return static_cast<double>(l) * (l + n - 2); }

/// Dimension of the degree-l spherical harmonics on S^{n-1} (only l = 0 for n = 1).
inline long angular_multiplicity(int n, int l) {
    if (l < 0) throw ParameterError("negative angular index");
    if (l == 0) return 1;
    if (n == 1) return 0;
    if (n == 2) return 2;
    // (2l+n-2)(l+n-3)! / (l!(n-2)!) = (2l+n-2)/(n-2) * C(l+n-3, l)
    long double binom = 1.0L;
    for (int k = 1; k <= l; ++k) binom = binom * (n - 3 + k) / k;
    return std::lround(static_cast<double>((2.0L * l + n - 2) * binom / (n - 2)));
}

struct ModeOperator {
    std::shared_ptr<const RadialGrid> grid;
    int n = 2;
    int l = 0;
    double gamma = 0.0;
    long multiplicity = 1;
    Boundary left = Boundary::Neumann;
    Boundary right = Boundary::Neumann;
    Tridiagonal S; ///< symmetric form, L = D^{-1} S with D = diag(mu)

    int size() const { return grid->M; }

    std::vector<double> apply(const std::vector<double>& u) const {
        auto y = S.apply(u);
        for (int i = 0; i < size(); ++i) y[i] /= grid->mu[i];
        return y;
    }

    /// Dirichlet form -u^T S u as a sum of nonnegative terms (face differences, boundary ghost
    /// terms, angular term); free of the cancellation in the expanded product.
    double energy(const std::vector<double>& u) const {
        const int M = size();
        double s = 0.0;
        for (int i = 0; i + 1 < M; ++i) {
            const double du = u[i + 1] - u[i];
            s += S.sup[i] * du * du;
        }
        if (S.cyclic) {
            const double du = u[0] - u[M - 1];
            s += S.sup[M - 1] * du * du;
        } else {
            if (left == Boundary::Dirichlet) s += 2.0 * grid->w[0] / grid->h * u[0] * u[0];
            if (right == Boundary::Dirichlet) s += 2.0 * grid->w[M] / grid->h * u[M - 1] * u[M - 1];
        }
        if (gamma != 0.0)
            for (int i = 0; i < M; ++i) s += gamma * grid->mu[i] * u[i] * u[i] / (grid->f[i] * grid->f[i]);
        return s;
    }

    /// Symmetric tridiagonal -D^{-1/2} S D^{-1/2}: diagonal and off-diagonal (off[M-1] is the
    /// periodic wrap coupling, zero otherwise).
    std::pair<std::vector<double>, std::vector<double>> symmetrized() const {
        const int M = size();
        const auto& mu = grid->mu;
        std::vector<double> d(M), e(M, 0.0);
        for (int i = 0; i < M; ++i) d[i] = -S.diag[i] / mu[i];
        for (int i = 0; i + 1 < M; ++i) e[i] = -S.sup[i] / std::sqrt(mu[i] * mu[i + 1]);
        if (S.cyclic) e[M - 1] = -S.sup[M - 1] / std::sqrt(mu[M - 1] * mu[0]);
        return {d, e};
    }
};

/// Boundary kinds implied by the grid: pole where f vanishes, periodic on closed circles,
/// Neumann otherwise.
inline std::pair<Boundary, Boundary> natural_boundaries(const ModelManifold& m, const RadialGrid& g) {
    if (g.periodic) return {Boundary::Periodic, Boundary::Periodic};
    const auto at = [&](double r) {
        return (!m.one_dimensional() && std::abs(m.warp.value(r)) < 1e-12) ? Boundary::Pole : Boundary::Neumann;
    };
    return {at(g.lo), at(g.hi)};
}

inline ModeOperator assemble_mode_operator(const ModelManifold& m, std::shared_ptr<const RadialGrid> grid, int l,
                                           Boundary left, Boundary right) {
    const RadialGrid& g = *grid;
    const int M = g.M;
    if (l < 0) throw ConfigError("negative angular index");
    if (m.one_dimensional() && l != 0) throw ConfigError("one-dimensional models have only the l = 0 mode");
    if ((left == Boundary::Periodic) != (right == Boundary::Periodic))
        throw ConfigError("periodic boundary must be used at both ends");
    if ((left == Boundary::Periodic) != g.periodic)
        throw ConfigError("periodic boundary requires a full circle grid and vice versa");
    const auto check_end = [&](Boundary b, double r, const char* side) {
        const bool pole = !m.one_dimensional() && std::abs(m.warp.value(r)) < 1e-12;
        if (b == Boundary::Pole && !pole) throw ConfigError(std::string("pole boundary at the ") + side + " end where f > 0");
        if (b == Boundary::Dirichlet && pole) throw ConfigError(std::string("dirichlet boundary at a pole (") + side + " end)");
    };
    check_end(left, g.lo, "left");
    check_end(right, g.hi, "right");

    ModeOperator op;
    op.grid = grid;
    op.n = m.n;
    op.l = l;
    op.gamma = angular_eigenvalue(m.n, l);
    op.multiplicity = angular_multiplicity(m.n, l);
    op.left = left;
    op.right = right;
    op.S.cyclic = g.periodic;
    op.S.sub.assign(M, 0.0);
    op.S.sup.assign(M, 0.0);
    op.S.diag.assign(M, 0.0);
    for (int i = 1; i < M; ++i) {
        const double k = g.w[i] / g.h;
        op.S.sup[i - 1] = k;
        op.S.sub[i] = k;
        op.S.diag[i - 1] -= k;
        op.S.diag[i] -= k;
    }
    if (g.periodic) {
        const double k = g.w[0] / g.h;
        op.S.sup[M - 1] = k;
        op.S.sub[0] = k;
        op.S.diag[M - 1] -= k;
        op.S.diag[0] -= k;
    } else {
        if (left == Boundary::Dirichlet) op.S.diag[0] -= 2.0 * g.w[0] / g.h;
        if (right == Boundary::Dirichlet) op.S.diag[M - 1] -= 2.0 * g.w[M] / g.h;
    }
    if (op.gamma != 0.0)
        for (int i = 0; i < M; ++i) op.S.diag[i] -= op.gamma * g.mu[i] / (g.f[i] * g.f[i]);
    return op;
}

inline ModeOperator assemble_mode_operator(const ModelManifold& m, std::shared_ptr<const RadialGrid> grid, int l) {
    const auto [lb, rb] = natural_boundaries(m, *grid);
    return assemble_mode_operator(m, std::move(grid), l, lb, rb);
}

struct SpectrumEntry {
    double lambda = 0.0;
    int l = 0;
    int j = 0;
    long multiplicity = 1;
    std::vector<double> vec; ///< mu-normalized radial eigenvector
};

struct Spectrum {
    std::shared_ptr<const RadialGrid> grid;
    int n = 2;
    std::vector<SpectrumEntry> entries; ///< sorted by (lambda, l, j)
    double complete_below = kInf;       ///< no eigenvalue below this value is missing

    void sort() {
        std::sort(entries.begin(), entries.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
            return std::tie(a.lambda, a.l, a.j) < std::tie(b.lambda, b.l, b.j);
        });
    }

    /// The first `count` eigenvalues with multiplicities expanded.
    std::vector<double> expanded(std::size_t count) const {
        std::vector<double> out;
        for (const auto& e : entries) {
            for (long k = 0; k < e.multiplicity && out.size() < count; ++k) out.push_back(e.lambda);
            if (out.size() >= count) break;
        }
        if (out.size() < count) {
            std::ostringstream os;
            os << "spectrum holds only " << out.size() << " complete eigenvalues below " << complete_below
               << "; widen l_max or k_per_mode";
            throw NumericalError(os.str());
        }
        return out;
    }

    /// Mode labels (l) of the first `count` expanded entries.
    std::vector<int> expanded_modes(std::size_t count) const {
        std::vector<int> out;
        for (const auto& e : entries)
            for (long k = 0; k < e.multiplicity && out.size() < count; ++k) out.push_back(e.l);
        return out;
    }

    std::vector<const SpectrumEntry*> mode(int l) const {
        std::vector<const SpectrumEntry*> out;
        for (const auto& e : entries)
            if (e.l == l) out.push_back(&e);
        return out;
    }
};

namespace detail {

inline std::vector<double> squared(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * v[i];
    return out;
}

inline Spectrum mode_eigen(const ModeOperator& op, int count, double upper) {
    auto [d, e] = op.symmetrized();
    SymEigen se;
    if (op.S.cyclic) {
        se = cyclic_eigen(d, e, count, upper);
    } else {
        e.pop_back();
        se = tridiagonal_eigen(d, e, count, upper);
    }
    Spectrum s;
    s.grid = op.grid;
    s.n = op.n;
    const auto& mu = op.grid->mu;
    for (std::size_t k = 0; k < se.values.size(); ++k) {
        SpectrumEntry en;
        en.lambda = se.values[k];
        en.l = op.l;
        en.j = static_cast<int>(k);
        en.multiplicity = op.multiplicity;
        en.vec = std::move(se.vectors[k]);
        for (std::size_t i = 0; i < en.vec.size(); ++i) en.vec[i] /= std::sqrt(mu[i]);
        en.lambda = op.energy(en.vec) / mass(squared(en.vec), *op.grid);
        s.entries.push_back(std::move(en));
    }
    return s;
}

inline double max_warp_squared(const RadialGrid& g) {
    double mx = 0.0;
    for (double f : g.f) mx = std::max(mx, f * f);
    return mx;
}

} // namespace detail

/// The k_max smallest eigenpairs of -L for one mode.
inline Spectrum mode_spectrum(const ModeOperator& op, int k_max) {
    if (k_max < 1 || k_max > op.size()) throw ConfigError("mode_spectrum: need 1 <= k_max <= M");
    auto s = detail::mode_eigen(op, k_max, 0.0);
    s.complete_below = s.entries.size() == static_cast<std::size_t>(op.size()) ? kInf : s.entries.back().lambda;
    return s;
}

/// All eigenpairs of one mode with lambda <= upper.
inline Spectrum mode_spectrum_below(const ModeOperator& op, double upper) {
    auto s = detail::mode_eigen(op, -1, upper);
    s.complete_below = upper;
    return s;
}

/// Merged spectrum over modes 0..l_max with k_per_mode radial eigenpairs each. Entries are kept
/// only below the completeness threshold: the smallest last-computed eigenvalue over modes and
/// the angular floor gamma_{l_max+1} / max f^2.
inline Spectrum full_spectrum(const ModelManifold& m, std::shared_ptr<const RadialGrid> grid, int l_max, int k_per_mode) {
    if (m.one_dimensional()) l_max = 0;
    Spectrum out;
    out.grid = grid;
    out.n = m.n;
    double threshold = m.one_dimensional() ? kInf : angular_eigenvalue(m.n, l_max + 1) / detail::max_warp_squared(*grid);
    for (int l = 0; l <= l_max; ++l) {
        const auto op = assemble_mode_operator(m, grid, l);
        auto part = mode_spectrum(op, std::min(k_per_mode, grid->M));
        threshold = std::min(threshold, part.complete_below);
        for (auto& e : part.entries) out.entries.push_back(std::move(e));
    }
    std::erase_if(out.entries, [&](const SpectrumEntry& e) { return e.lambda > threshold; });
    out.complete_below = threshold;
    out.sort();
    return out;
}

/// Every eigenpair (all modes) with lambda <= upper, as needed by truncated kernel sums.
inline Spectrum spectrum_below(const ModelManifold& m, std::shared_ptr<const RadialGrid> grid, double upper,
                               int l_only = -1) {
    Spectrum out;
    out.grid = grid;
    out.n = m.n;
    out.complete_below = upper;
    const double fmax2 = m.one_dimensional() ? 1.0 : detail::max_warp_squared(*grid);
    for (int l = 0;; ++l) {
        if (l_only >= 0 && l != l_only) {
            if (l > l_only) break;
            continue;
        }
        if (l > 0 && (m.one_dimensional() || angular_eigenvalue(m.n, l) / fmax2 > upper)) break;
        const auto op = assemble_mode_operator(m, grid, l);
        auto part = mode_spectrum_below(op, upper);
        for (auto& e : part.entries) out.entries.push_back(std::move(e));
        if (l_only >= 0) break;
    }
    out.sort();
    return out;
}

/// <-L u, u>_mu / <u, u>_mu.
inline double rayleigh_quotient(const ModeOperator& op, const std::vector<double>& u) {
    const double den = mass(detail::squared(u), *op.grid);
    if (!(den > 0.0)) throw ConfigError("rayleigh_quotient of a zero field");
    return op.energy(u) / den;
}

} // namespace phiheat
