#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vmemflow/discretization.hpp"
#include "vmemflow/errors.hpp"
#include "vmemflow/grid.hpp"
#include "vmemflow/memory_kernel.hpp"
#include "vmemflow/operators.hpp"
#include "vmemflow/solvers.hpp"

namespace vmemflow {

/// Steady-state coefficient mu + rho Gamma(1-beta)/delta^{1-beta}.
inline double effective_viscosity(double mu, const KernelParams& k) {
    if (!(mu > 0.0)) throw std::invalid_argument("effective_viscosity: mu must be > 0");
    if (k.rho == 0.0) return mu;
    return mu + k.rho * kernel_moment(k);
}

enum class SteadyMethod { stokes_iteration, newton };

struct SteadyConfig {
    double mu = 1.0;
    KernelParams kernel;
    StaggeredGrid grid;
    VelocityField fbar;
    SteadyMethod method = SteadyMethod::stokes_iteration;
    double tol      = 1e-11; ///< relative to |fbar|_0
    int max_iters   = 200;
    int mu0_trials  = 32;
    int nh_samples  = 64;
    std::uint64_t seed = 0;
};

struct SteadyDiagnostics {
    double ubar_h1              = 0.0;
    double fbar_dual            = 0.0;
    bool apriori_ok             = true;
    double mu0_est              = 0.0;
    double uniqueness_indicator = 0.0;
};

struct SteadySolution {
    VelocityField velocity;
    ScalarField pressure;
    double residual = 0.0;
    int iterations  = 0;
    SteadyDiagnostics diagnostics;
};

/// Discrete dual norm |f|_{-1} = sup (f,v)/|v|_1, realized exactly by solving
/// -Laplacian w = f and returning |w|_1.
inline double dual_norm(const VelocityField& fbar) {
    if (l2_norm(fbar) == 0.0) return 0.0;
    const VelocityField w = helmholtz_solve(0.0, 1.0, fbar);
    VelocityField f0 = fbar;
    enforce_normal_bc(f0);
    return std::sqrt(std::max(dot(f0, w), 0.0));
}

namespace detail {

// Inner linear Stokes solve: (eps I + nu (-Lap)) u + grad p = F, div u = 0,
// by preconditioned CG on the Schur complement (Uzawa with Krylov
// acceleration).  Warm start from p0 when given.
struct StokesLinear {
    VelocityField u;
    ScalarField p;
};

inline StokesLinear solve_stokes_linear(const FastSolvers& fs, double nu, const VelocityField& F,
                                        double rel_tol, const ScalarField* p0 = nullptr) {
    const StaggeredGrid& g = fs.grid();
    const double eps = 1e-12;
    auto ainv = [&](const VelocityField& r) { return fs.helmholtz(eps, nu, r); };
    auto schur = [&](const ScalarField& q) {
        ScalarField s = divergence(ainv(gradient(q)));
        scale(s, -1.0);
        subtract_mean(s);
        return s;
    };

    ScalarField rhs = divergence(ainv(F));
    scale(rhs, -1.0);
    subtract_mean(rhs);

    ScalarField p = p0 ? *p0 : ScalarField::zeros(g);
    if (p0) subtract_mean(p);
    ScalarField r = rhs;
    if (p0) axpy(-1.0, schur(p), r);
    const double stop = rel_tol * std::max(l2_norm(rhs), 1e-300);

    if (l2_norm(r) > stop) {
        ScalarField z = r;
        scale(z, nu); // Schur complement is spectrally close to I/nu
        ScalarField d = z;
        double rz = dot(r, z);
        const int cap = 400;
        int it = 0;
        for (; it < cap; ++it) {
            const ScalarField sd = schur(d);
            const double alpha = rz / dot(d, sd);
            axpy(alpha, d, p);
            axpy(-alpha, sd, r);
            if (l2_norm(r) <= stop) break;
            ScalarField z2 = r;
            scale(z2, nu);
            const double rz2 = dot(r, z2);
            const double beta = rz2 / rz;
            rz = rz2;
            ScalarField dn = z2;
            axpy(beta, d, dn);
            d = std::move(dn);
        }
        if (it >= cap)
            throw SolverError("solve_stokes_linear: Schur CG did not converge", l2_norm(r));
        subtract_mean(p);
    }

    VelocityField rhs_u = F;
    axpy(-1.0, gradient(p), rhs_u);
    VelocityField u = ainv(rhs_u);
    u = leray_project(u); // pin the divergence at solver tolerance
    return {std::move(u), std::move(p)};
}

// L2 norm of the full steady residual nu(-Lap)u + advect(u,u) + grad p - f.
inline double steady_residual_norm(double nu, const VelocityField& u, const ScalarField& p,
                                   const VelocityField& fbar, bool with_advection = true) {
    VelocityField r = laplacian(u);
    scale(r, -nu);
    if (with_advection) axpy(1.0, advect(u, u), r);
    axpy(1.0, gradient(p), r);
    VelocityField f0 = fbar;
    enforce_normal_bc(f0);
    axpy(-1.0, f0, r);
    return l2_norm(r);
}

// Measured discrete sup of b over seeded random triples.  Raw white noise has
// enormous H1 norms and grossly underestimates the sup, so the samples are
// smoothed once through the inverse Laplacian.
inline double measure_advection_sup(const StaggeredGrid& g, int samples, std::uint64_t seed) {
    NormalSampler rng(seed + 0x9e3779b97f4a7c15ull);
    const FastSolvers& fs = cached_solvers(g);
    auto draw = [&]() { return fs.helmholtz(0.0, 1.0, random_admissible_velocity(g, rng)); };
    double nh = 0.0;
    for (int s = 0; s < samples; ++s) {
        const VelocityField a = draw();
        const VelocityField b = draw();
        const VelocityField c = draw();
        const double val = std::fabs(dot(advect(a, b), c)) /
                           (h1_semi(a) * h1_semi(b) * h1_semi(c));
        nh = std::max(nh, val);
    }
    return nh;
}

inline void fill_diagnostics(SteadySolution& sol, const SteadyConfig& cfg, double nu) {
    sol.diagnostics.ubar_h1   = h1_semi(sol.velocity);
    sol.diagnostics.fbar_dual = dual_norm(cfg.fbar);
    sol.diagnostics.apriori_ok =
        sol.diagnostics.ubar_h1 <= sol.diagnostics.fbar_dual / nu * 1.05 + 1e-14;
    sol.diagnostics.mu0_est = mu0_estimate(sol.velocity, cfg.mu, cfg.mu0_trials, cfg.seed);
    const double nh = measure_advection_sup(cfg.grid, cfg.nh_samples, cfg.seed);
    sol.diagnostics.uniqueness_indicator = nh * sol.diagnostics.fbar_dual / (nu * nu);
}

} // namespace detail

/// Picard (Stokes) iteration: freeze the advection at the previous iterate and
/// solve the linear Stokes system with the effective viscosity.
inline SteadySolution solve_stokes_iteration(const SteadyConfig& cfg) {
    const double nu = effective_viscosity(cfg.mu, cfg.kernel);
    const FastSolvers& fs = cached_solvers(cfg.grid);
    const double scale_f = std::max(l2_norm(cfg.fbar), 1e-300);

    SteadySolution sol;
    sol.velocity = VelocityField::zeros(cfg.grid);
    sol.pressure = ScalarField::zeros(cfg.grid);
    std::vector<double> history;
    int bad_streak   = 0;
    double inner_tol = cfg.tol / 10.0;
    for (int m = 0; m < cfg.max_iters; ++m) {
        VelocityField F = cfg.fbar;
        enforce_normal_bc(F);
        axpy(-1.0, advect(sol.velocity, sol.velocity), F);
        auto lin = detail::solve_stokes_linear(fs, nu, F, inner_tol, &sol.pressure);
        sol.velocity = std::move(lin.u);
        sol.pressure = std::move(lin.p);
        const double r = detail::steady_residual_norm(nu, sol.velocity, sol.pressure, cfg.fbar);
        history.push_back(r);
        sol.iterations = m + 1;
        sol.residual   = r;
        if (r <= cfg.tol * scale_f) {
            detail::fill_diagnostics(sol, cfg, nu);
            return sol;
        }
        // a stall above target means the inner-solver floor is binding
        if (history.size() >= 2 && r > 0.3 * history[history.size() - 2])
            inner_tol = std::max(inner_tol / 10.0, 1e-14);
        // growth below 10x the target is solver-floor jitter, not divergence
        if (history.size() >= 2 && r > history[history.size() - 2] &&
            r > 10.0 * cfg.tol * scale_f) {
            if (++bad_streak >= 5)
                throw IterationFailure("solve_stokes_iteration: residual grew 5 times in a row",
                                       history);
        } else {
            bad_streak = 0;
        }
        if (r > 1e6 * history.front())
            throw IterationFailure("solve_stokes_iteration: residual blew up", history);
    }
    throw IterationFailure("solve_stokes_iteration: iteration cap reached", history);
}

namespace detail {

// Right-preconditioned restarted GMRES on the divergence-free subspace for the
// Newton correction.  matvec and precond map div-free fields to div-free
// fields.
template <class MatVec, class Precond>
VelocityField gmres_divfree(const MatVec& matvec, const Precond& precond, const VelocityField& rhs,
                            double rel_tol, int restart, int max_outer) {
    const double bnorm = l2_norm(rhs);
    VelocityField x = VelocityField::zeros(rhs.grid);
    if (bnorm == 0.0) return x;
    for (int outer = 0; outer < max_outer; ++outer) {
        VelocityField r = rhs;
        axpy(-1.0, matvec(x), r);
        double beta = l2_norm(r);
        if (beta <= rel_tol * bnorm) return x;

        std::vector<VelocityField> v;
        v.reserve(restart + 1);
        VelocityField v0 = r;
        scale(v0, 1.0 / beta);
        v.push_back(std::move(v0));
        std::vector<std::vector<double>> h(restart + 1, std::vector<double>(restart, 0.0));
        std::vector<double> cs(restart, 0.0), sn(restart, 0.0), gvec(restart + 1, 0.0);
        gvec[0] = beta;
        int k = 0;
        for (; k < restart; ++k) {
            VelocityField w = matvec(precond(v[static_cast<std::size_t>(k)]));
            for (int i = 0; i <= k; ++i) {
                h[i][k] = dot(w, v[static_cast<std::size_t>(i)]);
                axpy(-h[i][k], v[static_cast<std::size_t>(i)], w);
            }
            h[k + 1][k] = l2_norm(w);
            if (h[k + 1][k] > 0.0) {
                scale(w, 1.0 / h[k + 1][k]);
                v.push_back(std::move(w));
            }
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k]    = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k]        = t;
            }
            const double denom = std::hypot(h[k][k], h[k + 1][k]);
            if (denom == 0.0) break;
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            gvec[k + 1] = -sn[k] * gvec[k];
            gvec[k]     = cs[k] * gvec[k];
            if (std::fabs(gvec[k + 1]) <= rel_tol * bnorm) {
                ++k;
                break;
            }
            if (static_cast<std::size_t>(k + 1) >= v.size()) break; // breakdown
        }
        // back substitution
        std::vector<double> ys(static_cast<std::size_t>(k), 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = gvec[i];
            for (int j = i + 1; j < k; ++j) s -= h[i][j] * ys[static_cast<std::size_t>(j)];
            ys[static_cast<std::size_t>(i)] = s / h[i][i];
        }
        VelocityField z = VelocityField::zeros(rhs.grid);
        for (int i = 0; i < k; ++i) axpy(ys[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i)], z);
        axpy(1.0, precond(z), x);
    }
    VelocityField r = rhs;
    axpy(-1.0, matvec(x), r);
    if (l2_norm(r) <= rel_tol * bnorm) return x;
    throw JacobianSolveError("gmres_divfree: no convergence", l2_norm(r) / bnorm);
}

} // namespace detail

/// Newton iteration with a matrix-free Jacobian on the divergence-free
/// subspace, preconditioned by the Stokes solve; starts from two Picard steps.
inline SteadySolution solve_newton(const SteadyConfig& cfg) {
    const double nu = effective_viscosity(cfg.mu, cfg.kernel);
    const FastSolvers& fs = cached_solvers(cfg.grid);
    const double scale_f = std::max(l2_norm(cfg.fbar), 1e-300);

    SteadySolution sol;
    sol.velocity = VelocityField::zeros(cfg.grid);
    sol.pressure = ScalarField::zeros(cfg.grid);
    for (int m = 0; m < 2; ++m) {
        VelocityField F = cfg.fbar;
        enforce_normal_bc(F);
        axpy(-1.0, advect(sol.velocity, sol.velocity), F);
        auto lin = detail::solve_stokes_linear(fs, nu, F, cfg.tol / 10.0, &sol.pressure);
        sol.velocity = std::move(lin.u);
        sol.pressure = std::move(lin.p);
    }

    auto recover_pressure = [&](const VelocityField& u) {
        VelocityField rp = cfg.fbar;
        enforce_normal_bc(rp);
        axpy(-1.0, advect(u, u), rp);
        VelocityField lap = laplacian(u);
        axpy(nu, lap, rp); // rp = f - advect - nu(-lap)u
        ScalarField s = divergence(rp);
        scale(s, -1.0);
        return pressure_poisson_solve(s); // grad p best-approximates rp
    };

    std::vector<double> history;
    int bad_streak = 0;
    for (int m = 0; m < cfg.max_iters; ++m) {
        VelocityField rfield = cfg.fbar;
        enforce_normal_bc(rfield);
        VelocityField lap = laplacian(sol.velocity);
        axpy(nu, lap, rfield);
        axpy(-1.0, advect(sol.velocity, sol.velocity), rfield);
        axpy(-1.0, gradient(sol.pressure), rfield);
        const double r = l2_norm(rfield);
        history.push_back(r);
        sol.iterations = m + 1;
        sol.residual   = r;
        if (r <= cfg.tol * scale_f) {
            detail::fill_diagnostics(sol, cfg, nu);
            return sol;
        }
        if (history.size() >= 2 && r > history[history.size() - 2] &&
            r > 10.0 * cfg.tol * scale_f) {
            if (++bad_streak >= 5)
                throw IterationFailure("solve_newton: residual grew 5 times in a row", history);
        } else {
            bad_streak = 0;
        }
        if (r > 1e6 * history.front())
            throw IterationFailure("solve_newton: residual blew up", history);

        const VelocityField rhs = leray_project(rfield);
        const VelocityField& ubase = sol.velocity;
        auto matvec = [&](const VelocityField& w) {
            VelocityField jw = laplacian(w);
            scale(jw, -nu);
            axpy(1.0, advect(ubase, w), jw);
            axpy(1.0, advect(w, ubase), jw);
            return leray_project(jw);
        };
        auto precond = [&](const VelocityField& z) {
            return leray_project(fs.helmholtz(1e-12, nu, z));
        };
        const double lin_tol = std::min(1e-2, r / scale_f);
        const VelocityField du =
            detail::gmres_divfree(matvec, precond, rhs, std::max(lin_tol, 1e-13), 40, 10);
        axpy(1.0, du, sol.velocity);
        sol.pressure = recover_pressure(sol.velocity);
    }
    throw IterationFailure("solve_newton: iteration cap reached", history);
}

inline SteadySolution solve_steady(const SteadyConfig& cfg) {
    return cfg.method == SteadyMethod::newton ? solve_newton(cfg) : solve_stokes_iteration(cfg);
}

/// Measured small-data indicator N_h |f|_{-1} / nu_eff^2; values below 1 are
/// reported as the small-data regime.
inline double uniqueness_indicator(const SteadyConfig& cfg) {
    const double nu = effective_viscosity(cfg.mu, cfg.kernel);
    const double nh = detail::measure_advection_sup(cfg.grid, cfg.nh_samples, cfg.seed);
    return nh * dual_norm(cfg.fbar) / (nu * nu);
}

} // namespace vmemflow
