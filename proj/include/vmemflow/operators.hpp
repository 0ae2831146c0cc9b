#pragma once

#include <cmath>
#include <utility>

#include "vmemflow/grid.hpp"

namespace vmemflow {

/// Discrete divergence at cell centers (central differences of face values).
inline ScalarField divergence(const VelocityField& w) {
    const auto& g = w.grid;
    ScalarField d = ScalarField::zeros(g);
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            d.at(i, j) = (w.u_at(i + 1, j) - w.u_at(i, j)) * ihx +
                         (w.v_at(i, j + 1) - w.v_at(i, j)) * ihy;
    return d;
}

/// Discrete gradient on faces; zero on the normal boundary faces, making it
/// the exact negative adjoint of the divergence.
inline VelocityField gradient(const ScalarField& q) {
    const auto& g = q.grid;
    VelocityField f = VelocityField::zeros(g);
    const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) f.u_at(i, j) = (q.at(i, j) - q.at(i - 1, j)) * ihx;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.v_at(i, j) = (q.at(i, j) - q.at(i, j - 1)) * ihy;
    return f;
}

/// Five-point Laplacian per velocity component.  Tangential wall values enter
/// through ghost reflection (ghost = -interior, zero wall value); output is
/// zero on the normal boundary faces.
inline VelocityField laplacian(const VelocityField& w) {
    const auto& g = w.grid;
    const int nx = g.nx, ny = g.ny;
    VelocityField out = VelocityField::zeros(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    for (int j = 0; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            const double c   = w.u_at(i, j);
            const double top = (j + 1 <= ny - 1) ? w.u_at(i, j + 1) : -w.u_at(i, ny - 1);
            const double bot = (j - 1 >= 0) ? w.u_at(i, j - 1) : -w.u_at(i, 0);
            out.u_at(i, j) = (w.u_at(i + 1, j) - 2.0 * c + w.u_at(i - 1, j)) * ihx2 +
                             (top - 2.0 * c + bot) * ihy2;
        }
    }
    for (int j = 1; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double c     = w.v_at(i, j);
            const double right = (i + 1 <= nx - 1) ? w.v_at(i + 1, j) : -w.v_at(nx - 1, j);
            const double left  = (i - 1 >= 0) ? w.v_at(i - 1, j) : -w.v_at(0, j);
            out.v_at(i, j) = (right - 2.0 * c + left) * ihx2 +
                             (w.v_at(i, j + 1) - 2.0 * c + w.v_at(i, j - 1)) * ihy2;
        }
    }
    return out;
}

namespace detail {

// Enumerate the sparse entries of the centered advection operator A(a):
// (A(a) w)[comp, dst] = sum coeff * w[comp, src].  Contributions that would
// read a pinned boundary face are skipped; ghost reads fold their sign flip
// into the mirrored interior entry.  visit(comp, dst, src, coeff) with linear
// indices in the component's own storage.
template <class Visit>
void for_each_advection_entry(const VelocityField& a, Visit&& visit) {
    const auto& g = a.grid;
    const int nx = g.nx, ny = g.ny;
    const double cx = 0.5 / g.hx(), cy = 0.5 / g.hy();

    auto uidx = [nx](int i, int j) { return j * (nx + 1) + i; };
    auto vidx = [nx](int i, int j) { return j * nx + i; };

    // u component: interior faces i=1..nx-1, j=0..ny-1
    for (int j = 0; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            const int dst   = uidx(i, j);
            const double ax = a.u_at(i, j);
            const double ay = 0.25 * (a.v_at(i - 1, j) + a.v_at(i, j) + a.v_at(i - 1, j + 1) +
                                      a.v_at(i, j + 1));
            if (i + 1 <= nx - 1) visit(0, dst, uidx(i + 1, j), ax * cx);
            if (i - 1 >= 1) visit(0, dst, uidx(i - 1, j), -ax * cx);
            if (j + 1 <= ny - 1)
                visit(0, dst, uidx(i, j + 1), ay * cy);
            else
                visit(0, dst, uidx(i, ny - 1), -ay * cy); // ghost = -mirror
            if (j - 1 >= 0)
                visit(0, dst, uidx(i, j - 1), -ay * cy);
            else
                visit(0, dst, uidx(i, 0), ay * cy); // ghost = -mirror
        }
    }
    // v component: interior faces i=0..nx-1, j=1..ny-1
    for (int j = 1; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int dst   = vidx(i, j);
            const double ax = 0.25 * (a.u_at(i, j - 1) + a.u_at(i + 1, j - 1) + a.u_at(i, j) +
                                      a.u_at(i + 1, j));
            const double ay = a.v_at(i, j);
            if (i + 1 <= nx - 1)
                visit(1, dst, vidx(i + 1, j), ax * cx);
            else
                visit(1, dst, vidx(nx - 1, j), -ax * cx);
            if (i - 1 >= 0)
                visit(1, dst, vidx(i - 1, j), -ax * cx);
            else
                visit(1, dst, vidx(0, j), ax * cx);
            if (j + 1 <= ny - 1) visit(1, dst, vidx(i, j + 1), ay * cy);
            if (j - 1 >= 1) visit(1, dst, vidx(i, j - 1), -ay * cy);
        }
    }
}

inline VelocityField advect_apply(const VelocityField& a, const VelocityField& w) {
    require_same_grid(a.grid, w.grid);
    VelocityField out = VelocityField::zeros(w.grid);
    for_each_advection_entry(a, [&](int comp, int dst, int src, double c) {
        if (comp == 0)
            out.u[static_cast<std::size_t>(dst)] += c * w.u[static_cast<std::size_t>(src)];
        else
            out.v[static_cast<std::size_t>(dst)] += c * w.v[static_cast<std::size_t>(src)];
    });
    return out;
}

inline VelocityField advect_apply_transpose(const VelocityField& a, const VelocityField& w) {
    require_same_grid(a.grid, w.grid);
    VelocityField out = VelocityField::zeros(w.grid);
    for_each_advection_entry(a, [&](int comp, int dst, int src, double c) {
        if (comp == 0)
            out.u[static_cast<std::size_t>(src)] += c * w.u[static_cast<std::size_t>(dst)];
        else
            out.v[static_cast<std::size_t>(src)] += c * w.v[static_cast<std::size_t>(dst)];
    });
    return out;
}

} // namespace detail

/// Skew-symmetrized advection b(a, w, .) = ((a.grad) w, .) + 1/2 ((div a) w, .),
/// realized as (A - A^T)/2 so that <advect(a,w), w> vanishes for all a, w.
inline VelocityField advect(const VelocityField& a, const VelocityField& w) {
    VelocityField out = detail::advect_apply(a, w);
    const VelocityField at = detail::advect_apply_transpose(a, w);
    for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] = 0.5 * (out.u[i] - at.u[i]);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = 0.5 * (out.v[i] - at.v[i]);
    return out;
}

/// H1-seminorm bilinear form on admissible velocity fields, defined so that
/// h1_inner(w, w) = <-laplacian(w), w> exactly (face differences plus wall
/// reflection terms).
inline double h1_inner(const VelocityField& a, const VelocityField& b) {
    require_same_grid(a.grid, b.grid);
    const auto& g = a.grid;
    const int nx = g.nx, ny = g.ny;
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    double s = 0.0;
    // u: x-differences across cells (Dirichlet ends are stored zeros)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            s += (a.u_at(i + 1, j) - a.u_at(i, j)) * (b.u_at(i + 1, j) - b.u_at(i, j)) * ihx2;
    // u: y-differences plus wall reflection terms
    for (int i = 1; i < nx; ++i) {
        for (int j = 0; j + 1 < ny; ++j)
            s += (a.u_at(i, j + 1) - a.u_at(i, j)) * (b.u_at(i, j + 1) - b.u_at(i, j)) * ihy2;
        s += 2.0 * a.u_at(i, 0) * b.u_at(i, 0) * ihy2;
        s += 2.0 * a.u_at(i, ny - 1) * b.u_at(i, ny - 1) * ihy2;
    }
    // v: y-differences
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            s += (a.v_at(i, j + 1) - a.v_at(i, j)) * (b.v_at(i, j + 1) - b.v_at(i, j)) * ihy2;
    // v: x-differences plus wall reflection terms
    for (int j = 1; j < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i)
            s += (a.v_at(i + 1, j) - a.v_at(i, j)) * (b.v_at(i + 1, j) - b.v_at(i, j)) * ihx2;
        s += 2.0 * a.v_at(0, j) * b.v_at(0, j) * ihx2;
        s += 2.0 * a.v_at(nx - 1, j) * b.v_at(nx - 1, j) * ihx2;
    }
    return s * g.cell_volume();
}

inline double h1_semi(const VelocityField& w) { return std::sqrt(std::max(h1_inner(w, w), 0.0)); }

/// H1 seminorm of a cell field (interior differences only; Neumann walls).
inline double h1_semi(const ScalarField& q) {
    const auto& g = q.grid;
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double d = q.at(i + 1, j) - q.at(i, j);
            s += d * d * ihx2;
        }
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double d = q.at(i, j + 1) - q.at(i, j);
            s += d * d * ihy2;
        }
    return std::sqrt(s * g.cell_volume());
}

} // namespace vmemflow
