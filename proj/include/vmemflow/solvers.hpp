#pragma once

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "vmemflow/errors.hpp"
#include "vmemflow/grid.hpp"
#include "vmemflow/operators.hpp"

namespace vmemflow {

enum class EllipticMethod { fast, cg };

namespace detail {

// 1D eigensystem of the minus second difference operator for one boundary
// flavor.  fwd is row-major (mode, point); applying inv undoes fwd exactly
// (orthogonality with per-mode normalization).
struct Transform1D {
    int n = 0;
    std::vector<double> fwd, inv, eig;
};

// Node-centred points with Dirichlet ends (u in x / v in y): n = cells-1 DOFs.
inline Transform1D node_dirichlet_transform(int cells, double h) {
    Transform1D t;
    t.n = cells - 1;
    t.fwd.resize(static_cast<std::size_t>(t.n) * t.n);
    t.inv.resize(static_cast<std::size_t>(t.n) * t.n);
    t.eig.resize(static_cast<std::size_t>(t.n));
    const double pi = 3.14159265358979323846264338328;
    for (int k = 0; k < t.n; ++k) {
        t.eig[static_cast<std::size_t>(k)] =
            (2.0 - 2.0 * std::cos((k + 1) * pi / cells)) / (h * h);
        for (int i = 0; i < t.n; ++i) {
            const double s = std::sin(static_cast<double>(k + 1) * (i + 1) * pi / cells);
            t.fwd[static_cast<std::size_t>(k) * t.n + i] = s;
            t.inv[static_cast<std::size_t>(i) * t.n + k] = s * 2.0 / cells;
        }
    }
    return t;
}

// Cell-centred points with Dirichlet walls via anti-reflection ghosts
// (tangential velocity): n = cells DOFs, modes sin((m+1) pi (j+1/2)/n).
inline Transform1D cell_dirichlet_transform(int cells, double h) {
    Transform1D t;
    t.n = cells;
    t.fwd.resize(static_cast<std::size_t>(t.n) * t.n);
    t.inv.resize(static_cast<std::size_t>(t.n) * t.n);
    t.eig.resize(static_cast<std::size_t>(t.n));
    const double pi = 3.14159265358979323846264338328;
    for (int m = 0; m < t.n; ++m) {
        t.eig[static_cast<std::size_t>(m)] =
            (2.0 - 2.0 * std::cos((m + 1) * pi / t.n)) / (h * h);
        const double norm = (m + 1 == t.n) ? 1.0 / t.n : 2.0 / t.n;
        for (int j = 0; j < t.n; ++j) {
            const double s = std::sin((m + 1) * pi * (j + 0.5) / t.n);
            t.fwd[static_cast<std::size_t>(m) * t.n + j] = s;
            t.inv[static_cast<std::size_t>(j) * t.n + m] = s * norm;
        }
    }
    return t;
}

// Cell-centred points with Neumann walls (pressure): modes cos(m pi (j+1/2)/n),
// first eigenvalue 0 (constants).
inline Transform1D cell_neumann_transform(int cells, double h) {
    Transform1D t;
    t.n = cells;
    t.fwd.resize(static_cast<std::size_t>(t.n) * t.n);
    t.inv.resize(static_cast<std::size_t>(t.n) * t.n);
    t.eig.resize(static_cast<std::size_t>(t.n));
    const double pi = 3.14159265358979323846264338328;
    for (int m = 0; m < t.n; ++m) {
        t.eig[static_cast<std::size_t>(m)] = (2.0 - 2.0 * std::cos(m * pi / t.n)) / (h * h);
        const double norm = (m == 0) ? 1.0 / t.n : 2.0 / t.n;
        for (int j = 0; j < t.n; ++j) {
            const double c = std::cos(m * pi * (j + 0.5) / t.n);
            t.fwd[static_cast<std::size_t>(m) * t.n + j] = c;
            t.inv[static_cast<std::size_t>(j) * t.n + m] = c * norm;
        }
    }
    return t;
}

// out(k, j) = sum_i M(k, i) f(i, j); data stored x-fastest with row length rl.
inline void apply_x(const std::vector<double>& m, int n, const double* f, int rl_in, int ncols,
                    double* out, int rl_out) {
    for (int j = 0; j < ncols; ++j) {
        const double* fj = f + static_cast<std::size_t>(j) * rl_in;
        double* oj       = out + static_cast<std::size_t>(j) * rl_out;
        for (int k = 0; k < n; ++k) {
            const double* mk = m.data() + static_cast<std::size_t>(k) * n;
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += mk[i] * fj[i];
            oj[k] = s;
        }
    }
}

// out(i, m) = sum_j N(m, j) f(i, j)
inline void apply_y(const std::vector<double>& m, int n, const double* f, int rl, int nrows_pts,
                    double* out) {
    for (std::size_t z = 0; z < static_cast<std::size_t>(rl) * n; ++z) out[z] = 0.0;
    for (int mm = 0; mm < n; ++mm) {
        double* om = out + static_cast<std::size_t>(mm) * rl;
        const double* mrow = m.data() + static_cast<std::size_t>(mm) * n;
        for (int j = 0; j < n; ++j) {
            const double c = mrow[j];
            const double* fj = f + static_cast<std::size_t>(j) * rl;
            for (int i = 0; i < nrows_pts; ++i) om[i] += c * fj[i];
        }
    }
}

// Same storage convention but the matrix rows are the inverse (point, mode).
inline void apply_x_inv(const std::vector<double>& minv, int n, const double* f, int rl_in,
                        int ncols, double* out, int rl_out) {
    for (int j = 0; j < ncols; ++j) {
        const double* fj = f + static_cast<std::size_t>(j) * rl_in;
        double* oj       = out + static_cast<std::size_t>(j) * rl_out;
        for (int i = 0; i < n; ++i) {
            const double* mi = minv.data() + static_cast<std::size_t>(i) * n;
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += mi[k] * fj[k];
            oj[i] = s;
        }
    }
}

inline void apply_y_inv(const std::vector<double>& minv, int n, const double* f, int rl,
                        int nrows_pts, double* out) {
    for (std::size_t z = 0; z < static_cast<std::size_t>(rl) * n; ++z) out[z] = 0.0;
    for (int j = 0; j < n; ++j) {
        double* oj = out + static_cast<std::size_t>(j) * rl;
        const double* mrow = minv.data() + static_cast<std::size_t>(j) * n;
        for (int mm = 0; mm < n; ++mm) {
            const double c = mrow[mm];
            const double* fm = f + static_cast<std::size_t>(mm) * rl;
            for (int i = 0; i < nrows_pts; ++i) oj[i] += c * fm[i];
        }
    }
}

// Diagonal solve on a (nxd x nyd) coefficient block stored x-fastest.
inline void divide_by_symbol(double a, double nu, const std::vector<double>& ex,
                             const std::vector<double>& ey, double* f, int nxd, int nyd,
                             bool zero_first_mode) {
    for (int m = 0; m < nyd; ++m)
        for (int k = 0; k < nxd; ++k) {
            double& c = f[static_cast<std::size_t>(m) * nxd + k];
            if (zero_first_mode && m == 0 && k == 0) {
                c = 0.0;
                continue;
            }
            c /= (a + nu * (ex[static_cast<std::size_t>(k)] + ey[static_cast<std::size_t>(m)]));
        }
}

} // namespace detail

/// Precomputed transform diagonalization of the MAC component Laplacians and
/// the cell Neumann Laplacian for one grid.
class FastSolvers {
public:
    explicit FastSolvers(const StaggeredGrid& g)
        : g_(g),
          ux_(detail::node_dirichlet_transform(g.nx, g.hx())),
          uy_(detail::cell_dirichlet_transform(g.ny, g.hy())),
          vx_(detail::cell_dirichlet_transform(g.nx, g.hx())),
          vy_(detail::node_dirichlet_transform(g.ny, g.hy())),
          px_(detail::cell_neumann_transform(g.nx, g.hx())),
          py_(detail::cell_neumann_transform(g.ny, g.hy())) {}

    const StaggeredGrid& grid() const { return g_; }

    /// Solve (a I - nu Laplacian) x = rhs componentwise; exact up to rounding.
    VelocityField helmholtz(double a, double nu, const VelocityField& rhs) const {
        require_same_grid(g_, rhs.grid);
        if (!(a >= 0.0 && nu >= 0.0 && a + nu > 0.0))
            throw std::invalid_argument("helmholtz: need a >= 0, nu >= 0, a + nu > 0");
        VelocityField x = VelocityField::zeros(g_);
        if (nu == 0.0) {
            for (int j = 0; j < g_.ny; ++j)
                for (int i = 1; i < g_.nx; ++i) x.u_at(i, j) = rhs.u_at(i, j) / a;
            for (int j = 1; j < g_.ny; ++j)
                for (int i = 0; i < g_.nx; ++i) x.v_at(i, j) = rhs.v_at(i, j) / a;
            return x;
        }
        solve_component(a, nu, ux_, uy_, rhs, x, /*is_u=*/true);
        solve_component(a, nu, vx_, vy_, rhs, x, /*is_u=*/false);
        return x;
    }

    /// Solve -Laplacian phi = rhs with Neumann walls; the mean of rhs is
    /// removed first (reported via removed_mean) and phi is mean-zero.
    ScalarField poisson_neumann(const ScalarField& rhs, double* removed_mean = nullptr) const {
        require_same_grid(g_, rhs.grid);
        const int nx = g_.nx, ny = g_.ny;
        std::vector<double> work(static_cast<std::size_t>(nx) * ny);
        const double m = mean(rhs);
        if (removed_mean) *removed_mean = m;
        std::vector<double> in(rhs.v);
        for (double& x : in) x -= m;

        std::vector<double> tmp(in.size());
        detail::apply_x(px_.fwd, nx, in.data(), nx, ny, tmp.data(), nx);
        detail::apply_y(py_.fwd, ny, tmp.data(), nx, nx, work.data());
        detail::divide_by_symbol(0.0, 1.0, px_.eig, py_.eig, work.data(), nx, ny,
                                 /*zero_first_mode=*/true);
        detail::apply_y_inv(py_.inv, ny, work.data(), nx, nx, tmp.data());
        ScalarField phi = ScalarField::zeros(g_);
        detail::apply_x_inv(px_.inv, nx, tmp.data(), nx, ny, phi.v.data(), nx);
        subtract_mean(phi);
        return phi;
    }

private:
    void solve_component(double a, double nu, const detail::Transform1D& tx,
                         const detail::Transform1D& ty, const VelocityField& rhs,
                         VelocityField& x, bool is_u) const {
        const int nxd = tx.n, nyd = ty.n;
        std::vector<double> in(static_cast<std::size_t>(nxd) * nyd);
        // gather interior DOFs, x-fastest
        if (is_u) {
            for (int j = 0; j < nyd; ++j)
                for (int i = 0; i < nxd; ++i)
                    in[static_cast<std::size_t>(j) * nxd + i] = rhs.u_at(i + 1, j);
        } else {
            for (int j = 0; j < nyd; ++j)
                for (int i = 0; i < nxd; ++i)
                    in[static_cast<std::size_t>(j) * nxd + i] = rhs.v_at(i, j + 1);
        }
        std::vector<double> t1(in.size()), t2(in.size());
        detail::apply_x(tx.fwd, nxd, in.data(), nxd, nyd, t1.data(), nxd);
        detail::apply_y(ty.fwd, nyd, t1.data(), nxd, nxd, t2.data());
        detail::divide_by_symbol(a, nu, tx.eig, ty.eig, t2.data(), nxd, nyd, false);
        detail::apply_y_inv(ty.inv, nyd, t2.data(), nxd, nxd, t1.data());
        detail::apply_x_inv(tx.inv, nxd, t1.data(), nxd, nyd, in.data(), nxd);
        if (is_u) {
            for (int j = 0; j < nyd; ++j)
                for (int i = 0; i < nxd; ++i)
                    x.u_at(i + 1, j) = in[static_cast<std::size_t>(j) * nxd + i];
        } else {
            for (int j = 0; j < nyd; ++j)
                for (int i = 0; i < nxd; ++i)
                    x.v_at(i, j + 1) = in[static_cast<std::size_t>(j) * nxd + i];
        }
    }

    StaggeredGrid g_;
    detail::Transform1D ux_, uy_, vx_, vy_, px_, py_;
};

/// Shared per-thread transform tables (one simulation per thread).
inline const FastSolvers& cached_solvers(const StaggeredGrid& g) {
    thread_local std::vector<std::unique_ptr<FastSolvers>> cache;
    for (const auto& s : cache)
        if (s->grid() == g) return *s;
    if (cache.size() >= 6) cache.erase(cache.begin());
    cache.push_back(std::make_unique<FastSolvers>(g));
    return *cache.back();
}

// ---- conjugate-gradient fallbacks (generality escape hatch; also the
// cross-check oracle for the transform path) ----

inline VelocityField helmholtz_cg(double a, double nu, const VelocityField& rhs,
                                  double rel_tol = 1e-12, int max_iters = 20000) {
    if (!(a >= 0.0 && nu >= 0.0 && a + nu > 0.0))
        throw std::invalid_argument("helmholtz_cg: need a >= 0, nu >= 0, a + nu > 0");
    auto op = [&](const VelocityField& w) {
        VelocityField l = laplacian(w);
        scale(l, -nu);
        axpy(a, w, l);
        return l;
    };
    VelocityField x = VelocityField::zeros(rhs.grid);
    VelocityField r = rhs;
    enforce_normal_bc(r);
    VelocityField p = r;
    double rr = dot(r, r);
    const double stop = rel_tol * std::sqrt(std::max(rr, 0.0));
    if (std::sqrt(rr) == 0.0) return x;
    for (int it = 0; it < max_iters; ++it) {
        const VelocityField ap = op(p);
        const double alpha = rr / dot(p, ap);
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        const double rr2 = dot(r, r);
        if (std::sqrt(rr2) <= stop) return x;
        const double beta = rr2 / rr;
        rr = rr2;
        VelocityField pn = r;
        axpy(beta, p, pn);
        p = std::move(pn);
    }
    throw SolverError("helmholtz_cg: no convergence within iteration cap", std::sqrt(rr));
}

inline ScalarField poisson_neumann_cg(const ScalarField& rhs, double rel_tol = 1e-12,
                                      int max_iters = 20000, double* removed_mean = nullptr) {
    const double m = mean(rhs);
    if (removed_mean) *removed_mean = m;
    ScalarField b = rhs;
    for (double& x : b.v) x -= m;
    auto op = [&](const ScalarField& q) {
        ScalarField l = divergence(gradient(q)); // Neumann cell Laplacian
        scale(l, -1.0);
        return l;
    };
    ScalarField x = ScalarField::zeros(rhs.grid);
    ScalarField r = b;
    ScalarField p = r;
    double rr = dot(r, r);
    const double stop = rel_tol * std::sqrt(std::max(rr, 0.0));
    if (std::sqrt(rr) == 0.0) return x;
    for (int it = 0; it < max_iters; ++it) {
        const ScalarField ap = op(p);
        const double alpha = rr / dot(p, ap);
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        const double rr2 = dot(r, r);
        if (std::sqrt(rr2) <= stop) {
            subtract_mean(x);
            return x;
        }
        const double beta = rr2 / rr;
        rr = rr2;
        ScalarField pn = r;
        axpy(beta, p, pn);
        p = std::move(pn);
    }
    throw SolverError("poisson_neumann_cg: no convergence within iteration cap", std::sqrt(rr));
}

/// Solve (coeff_a I - coeff_nu Laplacian) x = rhs; residual verified against
/// 1e-11 |rhs|.
inline VelocityField helmholtz_solve(double coeff_a, double coeff_nu, const VelocityField& rhs,
                                     EllipticMethod method = EllipticMethod::fast) {
    VelocityField x = (method == EllipticMethod::fast)
                          ? cached_solvers(rhs.grid).helmholtz(coeff_a, coeff_nu, rhs)
                          : helmholtz_cg(coeff_a, coeff_nu, rhs);
    VelocityField res = laplacian(x);
    scale(res, -coeff_nu);
    axpy(coeff_a, x, res);
    scale(res, -1.0);
    VelocityField r0 = rhs;
    enforce_normal_bc(r0);
    axpy(1.0, r0, res);
    const double rn = l2_norm(res), bn = l2_norm(r0);
    if (rn > 1e-11 * bn && bn > 0.0)
        throw SolverError("helmholtz_solve: residual above tolerance", rn / bn);
    return x;
}

/// Solve the compatible Neumann problem -Laplacian phi = rhs (mean removed and
/// reported); residual verified against 1e-11 |rhs|.
inline ScalarField pressure_poisson_solve(const ScalarField& rhs,
                                          EllipticMethod method = EllipticMethod::fast,
                                          double* removed_mean = nullptr) {
    ScalarField phi = (method == EllipticMethod::fast)
                          ? cached_solvers(rhs.grid).poisson_neumann(rhs, removed_mean)
                          : poisson_neumann_cg(rhs, 1e-12, 20000, removed_mean);
    ScalarField res = divergence(gradient(phi)); // = Laplacian phi
    ScalarField b = rhs;
    subtract_mean(b);
    axpy(1.0, b, res); // res = rhs0 - (-Lap phi)
    const double rn = l2_norm(res), bn = l2_norm(b);
    if (rn > 1e-11 * bn && bn > 0.0)
        throw SolverError("pressure_poisson_solve: residual above tolerance", rn / bn);
    return phi;
}

} // namespace vmemflow
