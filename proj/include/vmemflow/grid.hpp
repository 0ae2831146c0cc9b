#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vmemflow/rng.hpp"

namespace vmemflow {

/// Uniform MAC grid on the rectangle (0,Lx) x (0,Ly).
struct StaggeredGrid {
    double lx = 1.0, ly = 1.0;
    int nx = 0, ny = 0;

    static StaggeredGrid validated(double lx, double ly, int nx, int ny) {
        if (!(lx > 0.0 && ly > 0.0))
            throw std::invalid_argument("grid lengths must be > 0");
        if (nx < 4 || ny < 4)
            throw std::invalid_argument("nx and ny must be >= 4");
        return StaggeredGrid{lx, ly, nx, ny};
    }

    double hx() const { return lx / nx; }
    double hy() const { return ly / ny; }
    double cell_volume() const { return hx() * hy(); }

    bool operator==(const StaggeredGrid&) const = default;
};

inline void require_same_grid(const StaggeredGrid& a, const StaggeredGrid& b) {
    if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

/// Cell-centered scalar (pressure-like) field.
struct ScalarField {
    StaggeredGrid grid;
    std::vector<double> v;

    static ScalarField zeros(const StaggeredGrid& g) {
        ScalarField f;
        f.grid = g;
        f.v.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
        return f;
    }

    double& at(int i, int j) { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
};

/// Face-centered MAC velocity: u on vertical faces ((nx+1) x ny), v on
/// horizontal faces (nx x (ny+1)).  Normal boundary faces are pinned to 0 for
/// admissible fields (homogeneous Dirichlet).
struct VelocityField {
    StaggeredGrid grid;
    std::vector<double> u, v;

    static VelocityField zeros(const StaggeredGrid& g) {
        VelocityField f;
        f.grid = g;
        f.u.assign(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0);
        f.v.assign(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0);
        return f;
    }

    double& u_at(int i, int j) { return u[static_cast<std::size_t>(j) * (grid.nx + 1) + i]; }
    double u_at(int i, int j) const { return u[static_cast<std::size_t>(j) * (grid.nx + 1) + i]; }
    double& v_at(int i, int j) { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
    double v_at(int i, int j) const { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
};

// ---- elementwise helpers ----

inline void scale(ScalarField& f, double a) {
    for (double& x : f.v) x *= a;
}
inline void scale(VelocityField& f, double a) {
    for (double& x : f.u) x *= a;
    for (double& x : f.v) x *= a;
}

inline void axpy(double a, const ScalarField& x, ScalarField& y) {
    require_same_grid(x.grid, y.grid);
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}
inline void axpy(double a, const VelocityField& x, VelocityField& y) {
    require_same_grid(x.grid, y.grid);
    for (std::size_t i = 0; i < y.u.size(); ++i) y.u[i] += a * x.u[i];
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}

inline void add(VelocityField& y, const VelocityField& x) { axpy(1.0, x, y); }
inline void add(ScalarField& y, const ScalarField& x) { axpy(1.0, x, y); }

/// Cell-volume-weighted inner products and norms.
inline double dot(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid);
    double s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
    return s * a.grid.cell_volume();
}
inline double dot(const VelocityField& a, const VelocityField& b) {
    require_same_grid(a.grid, b.grid);
    double s = 0.0;
    for (std::size_t i = 0; i < a.u.size(); ++i) s += a.u[i] * b.u[i];
    for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
    return s * a.grid.cell_volume();
}

inline double l2_norm(const ScalarField& f) { return std::sqrt(dot(f, f)); }
inline double l2_norm(const VelocityField& f) { return std::sqrt(dot(f, f)); }

inline double max_abs(const VelocityField& f) {
    double m = 0.0;
    for (double x : f.u) m = std::max(m, std::fabs(x));
    for (double x : f.v) m = std::max(m, std::fabs(x));
    return m;
}

inline double mean(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s / static_cast<double>(f.v.size());
}
inline void subtract_mean(ScalarField& f) {
    const double m = mean(f);
    for (double& x : f.v) x -= m;
}

/// Zero out the normal boundary faces (admissibility).
inline void enforce_normal_bc(VelocityField& f) {
    const int nx = f.grid.nx, ny = f.grid.ny;
    for (int j = 0; j < ny; ++j) {
        f.u_at(0, j)  = 0.0;
        f.u_at(nx, j) = 0.0;
    }
    for (int i = 0; i < nx; ++i) {
        f.v_at(i, 0)  = 0.0;
        f.v_at(i, ny) = 0.0;
    }
}

/// Seeded standard-normal field with admissible (zero normal) boundary faces.
inline VelocityField random_admissible_velocity(const StaggeredGrid& g, NormalSampler& rng) {
    VelocityField f = VelocityField::zeros(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) f.u_at(i, j) = rng();
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.v_at(i, j) = rng();
    return f;
}

inline ScalarField random_scalar(const StaggeredGrid& g, NormalSampler& rng, bool mean_zero = false) {
    ScalarField f = ScalarField::zeros(g);
    for (double& x : f.v) x = rng();
    if (mean_zero) subtract_mean(f);
    return f;
}

} // namespace vmemflow
