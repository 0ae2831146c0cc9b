#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vmemflow/errors.hpp"
#include "vmemflow/grid.hpp"
#include "vmemflow/operators.hpp"
#include "vmemflow/rng.hpp"
#include "vmemflow/solvers.hpp"

namespace vmemflow {

/// Discrete Leray projection onto divergence-free fields with vanishing normal
/// boundary component: w - grad(phi) with Laplacian_N phi = div w.
inline VelocityField leray_project(const VelocityField& w,
                                   EllipticMethod method = EllipticMethod::fast) {
    ScalarField s = divergence(w);
    scale(s, -1.0); // poisson solves -Lap phi = rhs, we need Lap phi = div w
    const ScalarField phi = pressure_poisson_solve(s, method);
    VelocityField out = w;
    axpy(-1.0, gradient(phi), out);
    return out;
}

/// ||A_h w||_0 with A_h the discrete Stokes operator P(-Laplacian).
inline double a_norm(const VelocityField& w, EllipticMethod method = EllipticMethod::fast) {
    VelocityField l = laplacian(w);
    scale(l, -1.0);
    return l2_norm(leray_project(l, method));
}

struct FieldNorms {
    double l2      = 0.0;
    double h1_semi = 0.0;
    double a_norm  = 0.0;
};

inline FieldNorms norms(const VelocityField& w) {
    return FieldNorms{l2_norm(w), h1_semi(w), a_norm(w)};
}

struct ScalarNorms {
    double l2      = 0.0;
    double h1_semi = 0.0;
};

inline ScalarNorms norms(const ScalarField& q) { return ScalarNorms{l2_norm(q), h1_semi(q)}; }

/// Smallest eigenvalue of the discrete Dirichlet velocity Laplacian by inverse
/// power iteration (the discrete Poincare constant gamma_0,h).
inline double poincare_constant(const StaggeredGrid& g, double rel_residual_tol = 1e-10,
                                int max_iters = 500) {
    const FastSolvers& fs = cached_solvers(g);
    VelocityField v = VelocityField::zeros(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) v.u_at(i, j) = 1.0;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.v_at(i, j) = 1.0;
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        VelocityField w = fs.helmholtz(0.0, 1.0, v);
        scale(w, 1.0 / l2_norm(w));
        lambda = h1_inner(w, w) / dot(w, w);
        VelocityField res = laplacian(w);
        scale(res, -1.0);
        axpy(-lambda, w, res);
        if (l2_norm(res) <= rel_residual_tol * lambda * l2_norm(w)) return lambda;
        v = std::move(w);
    }
    throw EigenIterationError("poincare_constant: iteration cap exceeded", lambda);
}

/// Empirical lower estimate of inf_v (mu a(v,v) + b(v, ubar, v)) / |v|_1^2 over
/// seeded random admissible fields plus a few 1D ratio minimizations.  The
/// sample always contains a candidate with quotient exactly mu, so the result
/// never exceeds mu; a nonpositive result flags the configuration as
/// empirically violating the coercivity assumption.
inline double mu0_estimate(const VelocityField& ubar, double mu, int trials, std::uint64_t seed,
                           int refine_iters = 24) {
    if (trials < 1) throw std::invalid_argument("mu0_estimate: trials must be >= 1");
    const StaggeredGrid& g = ubar.grid;
    NormalSampler rng(seed);

    auto bform = [&](const VelocityField& transport, const VelocityField& transported,
                     const VelocityField& test) {
        return dot(advect(transport, transported), test);
    };
    auto quotient = [&](const VelocityField& v) {
        const double den = h1_inner(v, v);
        return mu + dot(advect(v, ubar), v) / den;
    };

    double best = mu; // b(ubar, ubar, ubar) = 0 by skew symmetry
    VelocityField argbest = ubar;
    bool have_argbest = l2_norm(ubar) > 0.0;
    for (int t = 0; t < trials; ++t) {
        VelocityField v = random_admissible_velocity(g, rng);
        const double q = quotient(v);
        if (q < best) {
            best = q;
            argbest = v;
            have_argbest = true;
        }
    }
    if (!have_argbest) return mu; // ubar = 0: the quotient is mu for every v

    // Refine by exact 1D minimization of the ratio along random directions.
    VelocityField v = argbest;
    double a0 = mu * h1_inner(v, v) + bform(v, ubar, v);
    double b0 = h1_inner(v, v);
    for (int it = 0; it < refine_iters; ++it) {
        const VelocityField d = random_admissible_velocity(g, rng);
        const double a1 = mu * 2.0 * h1_inner(v, d) + bform(d, ubar, v) + bform(v, ubar, d);
        const double a2 = mu * h1_inner(d, d) + bform(d, ubar, d);
        const double b1 = 2.0 * h1_inner(v, d);
        const double b2 = h1_inner(d, d);
        // minimize (a0 + a1 t + a2 t^2)/(b0 + b1 t + b2 t^2)
        const double qa = a2 * b1 - a1 * b2;
        const double qb = 2.0 * (a2 * b0 - a0 * b2);
        const double qc = a1 * b0 - a0 * b1;
        std::vector<double> roots;
        if (std::fabs(qa) > 0.0) {
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                roots.push_back((-qb + sq) / (2.0 * qa));
                roots.push_back((-qb - sq) / (2.0 * qa));
            }
        } else if (std::fabs(qb) > 0.0) {
            roots.push_back(-qc / qb);
        }
        double best_t = 0.0, best_q = a0 / b0;
        for (double t : roots) {
            const double den = b0 + b1 * t + b2 * t * t;
            if (!(den > 0.0) || !std::isfinite(t)) continue;
            const double q = (a0 + a1 * t + a2 * t * t) / den;
            if (q < best_q) {
                best_q = q;
                best_t = t;
            }
        }
        if (best_t != 0.0) {
            axpy(best_t, d, v);
            a0 = mu * h1_inner(v, v) + bform(v, ubar, v);
            b0 = h1_inner(v, v);
        }
    }
    return std::min(best, a0 / b0);
}

} // namespace vmemflow
