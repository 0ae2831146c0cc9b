#pragma once

// Polynomial manufactured solution on the unit square:
//   psi  = x^2 (1-x)^2 y^2 (1-y)^2,   u = curl(psi) = (psi_y, -psi_x),
//   p    = (x - 1/2)(y - 1/2),
// all scaled by an amplitude and, for transient runs, by g(t) = e^{-alpha t}.
// The velocity is divergence-free with zero boundary values and zero normal
// derivative at the walls.

#include <cmath>
#include <stdexcept>

#include "vmemflow/grid.hpp"
#include "vmemflow/kernel_params.hpp"
#include "vmemflow/special_functions.hpp"

namespace vmemflow {
namespace manufactured {

inline double P(double x) { return x * x * (1.0 - x) * (1.0 - x); }
inline double P1(double x) { return 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }
inline double P2(double x) { return 2.0 * (1.0 - 6.0 * x + 6.0 * x * x); }
inline double P3(double x) { return 12.0 * (2.0 * x - 1.0); }

inline void require_unit_square(const StaggeredGrid& g) {
    if (std::fabs(g.lx - 1.0) > 1e-14 || std::fabs(g.ly - 1.0) > 1e-14)
        throw std::invalid_argument("manufactured solutions are defined on the unit square");
}

inline double u_exact(double x, double y) { return P(x) * P1(y); }
inline double v_exact(double x, double y) { return -P1(x) * P(y); }
inline double p_exact(double x, double y) { return (x - 0.5) * (y - 0.5); }

// Laplacian of the spatial velocity profile
inline double lap_u(double x, double y) { return P2(x) * P1(y) + P(x) * P3(y); }
inline double lap_v(double x, double y) { return -(P3(x) * P(y) + P1(x) * P2(y)); }

// (u . grad) u of the spatial profile (per unit amplitude^2)
inline double adv_u(double x, double y) {
    return P(x) * P1(x) * (P1(y) * P1(y) - P(y) * P2(y));
}
inline double adv_v(double x, double y) {
    return P(y) * P1(y) * (P1(x) * P1(x) - P(x) * P2(x));
}

/// Face samples of the exact velocity, scaled by amp * gt.
inline VelocityField velocity_field(const StaggeredGrid& g, double amp, double gt = 1.0) {
    require_unit_square(g);
    VelocityField f = VelocityField::zeros(g);
    const double hx = g.hx(), hy = g.hy(), s = amp * gt;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            f.u_at(i, j) = s * u_exact(i * hx, (j + 0.5) * hy);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.v_at(i, j) = s * v_exact((i + 0.5) * hx, j * hy);
    return f;
}

/// Cell samples of the exact pressure (discrete mean removed), amp * gt scale.
inline ScalarField pressure_field(const StaggeredGrid& g, double amp, double gt = 1.0) {
    require_unit_square(g);
    ScalarField f = ScalarField::zeros(g);
    const double hx = g.hx(), hy = g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.at(i, j) = amp * gt * p_exact((i + 0.5) * hx, (j + 0.5) * hy);
    subtract_mean(f);
    return f;
}

/// Face samples of the analytic advection term (a.grad)a for a = amp*curl(psi).
inline VelocityField advection_field(const StaggeredGrid& g, double amp) {
    require_unit_square(g);
    VelocityField f = VelocityField::zeros(g);
    const double hx = g.hx(), hy = g.hy(), s = amp * amp;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            f.u_at(i, j) = s * adv_u(i * hx, (j + 0.5) * hy);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.v_at(i, j) = s * adv_v((i + 0.5) * hx, j * hy);
    return f;
}

/// Forcing that makes (amp * curl psi, amp * p) the steady solution at
/// effective viscosity nu_eff:  f = -nu_eff lap u + (u.grad)u + grad p.
inline VelocityField steady_forcing(const StaggeredGrid& g, double nu_eff, double amp) {
    require_unit_square(g);
    VelocityField f = VelocityField::zeros(g);
    const double hx = g.hx(), hy = g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double x = i * hx, y = (j + 0.5) * hy;
            f.u_at(i, j) = -nu_eff * amp * lap_u(x, y) + amp * amp * adv_u(x, y) +
                           amp * (y - 0.5);
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double x = (i + 0.5) * hx, y = j * hy;
            f.v_at(i, j) = -nu_eff * amp * lap_v(x, y) + amp * amp * adv_v(x, y) +
                           amp * (x - 0.5);
        }
    return f;
}

/// Closed-form memory factor M(t) = int_0^t K(t-s) e^{-alpha s} ds for the
/// g(t) = e^{-alpha t} profile; requires alpha < delta.
inline double memory_factor(const KernelParams& k, double alpha, double t) {
    if (!(alpha < k.delta))
        throw std::invalid_argument("manufactured profile requires alpha < delta");
    if (t == 0.0) return 0.0;
    const KernelParams shifted{k.beta, k.delta - alpha, 0.0};
    return std::exp(-alpha * t) * kernel_primitive(shifted, 0.0, t);
}

/// Transient manufactured forcing: the exact solution is
/// u_ex = amp curl(psi) e^{-alpha t}, p_ex = amp (x-1/2)(y-1/2) e^{-alpha t}.
inline VelocityField transient_forcing(const StaggeredGrid& g, const KernelParams& k, double mu,
                                       double alpha, double amp, double t) {
    require_unit_square(g);
    const double gt = std::exp(-alpha * t);
    const double mem = k.rho * memory_factor(k, alpha, t);
    VelocityField f = VelocityField::zeros(g);
    const double hx = g.hx(), hy = g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const double x = i * hx, y = (j + 0.5) * hy;
            const double us = amp * u_exact(x, y), lap = amp * lap_u(x, y);
            f.u_at(i, j) = -alpha * gt * us - mu * gt * lap + gt * gt * amp * amp * adv_u(x, y) -
                           mem * lap + gt * amp * (y - 0.5);
        }
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double x = (i + 0.5) * hx, y = j * hy;
            const double vs = amp * v_exact(x, y), lap = amp * lap_v(x, y);
            f.v_at(i, j) = -alpha * gt * vs - mu * gt * lap + gt * gt * amp * amp * adv_v(x, y) -
                           mem * lap + gt * amp * (x - 0.5);
        }
    return f;
}

} // namespace manufactured
} // namespace vmemflow
