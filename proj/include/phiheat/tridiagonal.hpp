/// @file tridiagonal.hpp
/// @brief Tridiagonal and cyclic tridiagonal linear solves and symmetric eigensolvers.
///
/// Row i of a tridiagonal matrix reads sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1]. In the
/// cyclic case sub[0] couples to x[M-1] and sup[M-1] couples to x[0]; otherwise they are ignored.
#pragma once

#include "phiheat/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

namespace phiheat {

struct Tridiagonal {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> sup;
    bool cyclic = false;

    int size() const { return static_cast<int>(diag.size()); }

    std::vector<double> apply(const std::vector<double>& x) const {
        const int M = size();
        std::vector<double> y(M);
        for (int i = 0; i < M; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += sub[i] * x[i - 1];
            else if (cyclic) s += sub[0] * x[M - 1];
            if (i + 1 < M) s += sup[i] * x[i + 1];
            else if (cyclic) s += sup[M - 1] * x[0];
            y[i] = s;
        }
        return y;
    }
};

/// Gaussian elimination without pivoting. For M-matrices every intermediate quantity keeps
/// its sign, so nonnegative right-hand sides give nonnegative solutions exactly.
/// `pivot_floor` > 0 replaces tiny pivots (used by inverse iteration on shifted matrices).
inline std::vector<double> tridiagonal_solve(const Tridiagonal& A, std::vector<double> d, double pivot_floor = 0.0) {
    const int M = A.size();
    if (static_cast<int>(d.size()) != M) throw ConfigError("tridiagonal_solve: size mismatch");
    const auto guard = [&](double p) {
        if (std::abs(p) < pivot_floor) return p < 0 ? -pivot_floor : pivot_floor;
        if (p == 0.0) throw NumericalError("singular tridiagonal system");
        return p;
    };
    std::vector<double> bp(M);
    if (!A.cyclic || M < 3) {
        bp[0] = guard(A.diag[0]);
        for (int i = 1; i < M; ++i) {
            const double m = A.sub[i] / bp[i - 1];
            bp[i] = guard(A.diag[i] - m * A.sup[i - 1]);
            d[i] -= m * d[i - 1];
        }
        std::vector<double> x(M);
        x[M - 1] = d[M - 1] / bp[M - 1];
        for (int i = M - 2; i >= 0; --i) x[i] = (d[i] - A.sup[i] * x[i + 1]) / bp[i];
        return x;
    }
    // Cyclic: eliminate rows 0..M-2 carrying the fill column g (entries in column M-1), then
    // reduce the last row, whose entries h_k sweep from column 0 to column M-2.
    std::vector<double> g(M - 1);
    bp[0] = guard(A.diag[0]);
    g[0] = A.sub[0];
    if (M - 2 == 0) g[0] += A.sup[0];
    for (int i = 1; i <= M - 2; ++i) {
        const double m = A.sub[i] / bp[i - 1];
        const double fill_above = (i - 1 == M - 2) ? 0.0 : A.sup[i - 1];
        bp[i] = guard(A.diag[i] - m * fill_above);
        g[i] = -m * g[i - 1] + (i == M - 2 ? A.sup[i] : 0.0);
        d[i] -= m * d[i - 1];
    }
    double blast = A.diag[M - 1];
    double dlast = d[M - 1];
    double hk = A.sup[M - 1];
    if (M - 2 == 0) hk += A.sub[M - 1];
    for (int k = 0; k <= M - 2; ++k) {
        const double m = hk / bp[k];
        blast -= m * g[k];
        dlast -= m * d[k];
        if (k + 1 <= M - 2) hk = (k + 1 == M - 2 ? A.sub[M - 1] : 0.0) - m * A.sup[k];
    }
    blast = guard(blast);
    std::vector<double> x(M);
    x[M - 1] = dlast / blast;
    x[M - 2] = (d[M - 2] - g[M - 2] * x[M - 1]) / bp[M - 2];
    for (int i = M - 3; i >= 0; --i) x[i] = (d[i] - A.sup[i] * x[i + 1] - g[i] * x[M - 1]) / bp[i];
    return x;
}

/// Eigenpairs of a symmetric tridiagonal matrix, ascending. vectors[k] is Euclidean-normalized.
struct SymEigen {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};

namespace detail {

/// Deterministic sign: first component above 1e-6 of the maximum is positive.
inline void fix_sign(std::vector<double>& v) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    for (double x : v) {
        if (std::abs(x) > 1e-6 * mx) {
            if (x < 0)
                for (double& y : v) y = -y;
            return;
        }
    }
}

inline double gershgorin_radius(const std::vector<double>& d, const std::vector<double>& e, bool cyclic) {
    const int M = static_cast<int>(d.size());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < M; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(e[i - 1]);
        else if (cyclic) r += std::abs(e[M - 1]);
        if (i + 1 < M) r += std::abs(e[i]);
        else if (cyclic) r += std::abs(e[M - 1]);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    return std::max(std::abs(lo), std::abs(hi));
}

} // namespace detail

/// Symmetric tridiagonal eigenpairs via LAPACK dstevr. d: diagonal (M), e: off-diagonal (M-1).
/// Either the `count` smallest eigenpairs, or all eigenvalues <= upper when count < 0.
inline SymEigen tridiagonal_eigen(std::vector<double> d, std::vector<double> e, int count, double upper = 0.0) {
    const lapack_int M = static_cast<lapack_int>(d.size());
    SymEigen out;
    if (M == 0) return out;
    e.resize(std::max<lapack_int>(M, 1));
    if (count < 0) {
        // Count the eigenvalues in (-inf, upper] first so that Z can be sized exactly.
        auto dd = d, ee = e;
        std::vector<double> w(M);
        std::vector<lapack_int> supp(2 * M);
        lapack_int m = 0;
        double dummy = 0.0;
        const double lo = -2.0 * detail::gershgorin_radius(d, e, false) - 1.0;
        const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'V', M, dd.data(), ee.data(), lo, upper, 0, 0,
                                               0.0, &m, w.data(), &dummy, 1, supp.data());
        if (info != 0) {
            std::ostringstream os;
            os << "dstevr failed (count pass), info = " << info;
            throw NumericalError(os.str());
        }
        count = static_cast<int>(m);
        if (count == 0) return out;
    }
    count = std::min<int>(count, M);
    std::vector<double> w(M), z(static_cast<std::size_t>(M) * count);
    std::vector<lapack_int> supp(2 * count);
    lapack_int m = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', M, d.data(), e.data(), 0.0, 0.0, 1, count,
                                           0.0, &m, w.data(), z.data(), M, supp.data());
    if (info != 0 || m != count) {
        std::ostringstream os;
        os << "dstevr failed, info = " << info << ", found " << m << " of " << count << " eigenpairs";
        throw NumericalError(os.str());
    }
    out.values.assign(w.begin(), w.begin() + m);
    out.vectors.resize(m);
    for (lapack_int k = 0; k < m; ++k) {
        out.vectors[k].assign(z.begin() + k * M, z.begin() + (k + 1) * M);
        detail::fix_sign(out.vectors[k]);
    }
    return out;
}

/// Number of eigenvalues < x of the symmetric cyclic tridiagonal matrix (Sylvester inertia of
/// the LDL^T factorization of A - xI). e[M-1] couples the last and first rows.
inline int cyclic_count_below(const std::vector<double>& d, const std::vector<double>& e, double x, double pivmin) {
    const int M = static_cast<int>(d.size());
    int neg = 0;
    const auto piv = [&](double p) {
        if (std::abs(p) < pivmin) p = -pivmin;
        if (p < 0) ++neg;
        return p;
    };
    double b = piv(d[0] - x);
    double g = e[M - 1];
    double last = d[M - 1] - x - g * g / b;
    for (int i = 1; i <= M - 2; ++i) {
        const double m = e[i - 1] / b;
        b = piv(d[i] - x - m * e[i - 1]);
        g = -m * g + (i == M - 2 ? e[M - 2] : 0.0);
        last -= g * g / b;
    }
    piv(last);
    return neg;
}

namespace detail {

/// Solver for a shifted cyclic symmetric tridiagonal system (A - shift I) x = b. The corner
/// couplings are split off as a rank-one update (Sherman-Morrison) so the remaining open
/// tridiagonal part can be factored with partial pivoting (LAPACK dgttrf).
class CyclicShiftedSolver {
public:
    CyclicShiftedSolver(const std::vector<double>& d, const std::vector<double>& e, double shift) {
        const int M = static_cast<int>(d.size());
        M_ = M;
        corner_ = e[M - 1];
        gamma_ = -(d[0] - shift);
        if (gamma_ == 0.0) gamma_ = 1.0;
        dl_.assign(e.begin(), e.begin() + (M - 1));
        du_ = dl_;
        dd_.resize(M);
        for (int i = 0; i < M; ++i) dd_[i] = d[i] - shift;
        dd_[0] -= gamma_;
        dd_[M - 1] -= corner_ * corner_ / gamma_;
        du2_.resize(std::max(M - 2, 1));
        ipiv_.resize(M);
        info_ = LAPACKE_dgttrf(M, dl_.data(), dd_.data(), du_.data(), du2_.data(), ipiv_.data());
        if (info_ == 0) {
            z_.assign(M, 0.0);
            z_[0] = gamma_;
            z_[M - 1] = corner_;
            solve_open(z_);
        }
    }

    bool ok() const { return info_ == 0; }

    std::vector<double> solve(std::vector<double> b) const {
        solve_open(b);
        const double vz = z_[0] + corner_ / gamma_ * z_[M_ - 1];
        const double vb = b[0] + corner_ / gamma_ * b[M_ - 1];
        const double f = vb / (1.0 + vz);
        for (int i = 0; i < M_; ++i) b[i] -= f * z_[i];
        return b;
    }

private:
    void solve_open(std::vector<double>& b) const {
        LAPACKE_dgttrs(LAPACK_COL_MAJOR, 'N', M_, 1, dl_.data(), dd_.data(), du_.data(), du2_.data(), ipiv_.data(),
                       b.data(), M_);
    }

    int M_ = 0;
    double corner_ = 0.0, gamma_ = 1.0;
    std::vector<double> dl_, dd_, du_, du2_, z_;
    std::vector<lapack_int> ipiv_;
    lapack_int info_ = 0;
};

} // namespace detail

/// Eigenpairs of a symmetric cyclic tridiagonal matrix: bisection on the inertia count, then
/// inverse iteration with Gram-Schmidt inside clusters. Returns the `count` smallest pairs, or
/// all eigenvalues <= upper when count < 0.
inline SymEigen cyclic_eigen(const std::vector<double>& d, const std::vector<double>& e, int count, double upper = 0.0) {
    const int M = static_cast<int>(d.size());
    if (M < 3) throw ConfigError("cyclic eigensolver needs at least 3 nodes");
    const double norm = detail::gershgorin_radius(d, e, true);
    const double pivmin = std::numeric_limits<double>::min() * 1e4 + 1e-300;
    const double lo0 = -norm - 1.0, hi0 = norm + 1.0;
    if (count < 0) count = cyclic_count_below(d, e, std::nextafter(upper, hi0), pivmin);
    count = std::min(count, M);
    SymEigen out;
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(norm, 1.0);
    for (int k = 0; k < count; ++k) {
        double lo = lo0, hi = hi0;
        int guard = 0;
        while (hi - lo > tol && guard++ < 200) {
            const double mid = 0.5 * (lo + hi);
            if (cyclic_count_below(d, e, mid, pivmin) > k) hi = mid;
            else lo = mid;
        }
        out.values.push_back(0.5 * (lo + hi));
    }

    Tridiagonal A;
    A.cyclic = true;
    A.diag = d;
    A.sub.resize(M);
    A.sup.resize(M);
    for (int i = 0; i < M; ++i) {
        A.sup[i] = e[i];
        A.sub[i] = i == 0 ? e[M - 1] : e[i - 1];
    }
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double cluster_gap = 1e-7 * std::max(norm, 1.0);
    int cluster_start = 0;
    for (int k = 0; k < count; ++k) {
        if (k > 0 && out.values[k] - out.values[k - 1] > cluster_gap) cluster_start = k;
        // A shift equal to the eigenvalue to working precision can make the rank-one correction
        // singular; such attempts are retried with the shift nudged off the eigenvalue.
        std::vector<double> v(M);
        double resid = std::numeric_limits<double>::infinity();
        for (double nudge : {0.0, 16.0 * tol, -1e-10 * std::max(norm, 1.0), 1e-9 * std::max(norm, 1.0)}) {
            detail::CyclicShiftedSolver solver(d, e, out.values[k] + nudge);
            if (!solver.ok()) continue;
            for (double& x : v) x = uni(rng);
            resid = std::numeric_limits<double>::infinity();
            bool broke = false;
            for (int it = 0; it < 12 && resid > 1e-12 * std::max(norm, 1.0); ++it) {
                v = solver.solve(std::move(v));
                for (int q = cluster_start; q < k; ++q) {
                    double dot = 0.0;
                    for (int i = 0; i < M; ++i) dot += v[i] * out.vectors[q][i];
                    for (int i = 0; i < M; ++i) v[i] -= dot * out.vectors[q][i];
                }
                double nv = 0.0;
                for (double x : v) nv += x * x;
                nv = std::sqrt(nv);
                if (!(nv > 0.0) || !std::isfinite(nv)) {
                    broke = true;
                    break;
                }
                for (double& x : v) x /= nv;
                const auto Av = A.apply(v);
                double r2 = 0.0;
                for (int i = 0; i < M; ++i) r2 += (Av[i] - out.values[k] * v[i]) * (Av[i] - out.values[k] * v[i]);
                resid = std::sqrt(r2);
            }
            if (!broke && resid <= 1e-8 * std::max(norm, 1.0)) break;
            resid = std::numeric_limits<double>::infinity();
        }
        if (resid > 1e-8 * std::max(norm, 1.0)) {
            std::ostringstream os;
            os << "inverse iteration did not converge for eigenvalue " << k << " (residual " << resid << ")";
            throw NumericalError(os.str());
        }
        detail::fix_sign(v);
        out.vectors.push_back(std::move(v));
    }
    return out;
}

} // namespace phiheat
