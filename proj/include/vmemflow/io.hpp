#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "vmemflow/analysis.hpp"
#include "vmemflow/grid.hpp"
#include "vmemflow/memory_kernel.hpp"
#include "vmemflow/transient.hpp"

namespace vmemflow {

/// Canonical floating-point rendering: 17 significant digits, round-trip safe.
inline std::string fp17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// FNV-1a hash of a string, rendered as 16 hex digits (config fingerprints).
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void write_weights_csv(std::ostream& os, const QuadratureWeights& w) {
    os << "k,t_left,t_right,omega_k\n";
    for (std::size_t k = 0; k < w.weights.size(); ++k)
        os << k << ',' << fp17(static_cast<double>(k) * w.dt) << ','
           << fp17(static_cast<double>(k + 1) * w.dt) << ',' << fp17(w.weights[k]) << '\n';
}

inline void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& rs) {
    os << "t,l2_sq,h1_sq,a_norm_sq,ut_l2_sq,mem_form,div_residual\n";
    for (const auto& r : rs)
        os << fp17(r.t) << ',' << fp17(r.l2_sq) << ',' << fp17(r.h1_sq) << ','
           << fp17(r.a_norm_sq) << ',' << fp17(r.ut_l2_sq) << ',' << fp17(r.mem_form) << ','
           << fp17(r.div_residual) << '\n';
}

inline void write_fits_csv(std::ostream& os, const DecayStudyReport& rep) {
    os << "series_name,alpha,kappa,r2,window_start,window_end,alpha_expect,pass\n";
    for (const auto& sf : rep.fits)
        os << sf.name << ',' << fp17(sf.fit.alpha) << ',' << fp17(sf.fit.kappa) << ','
           << fp17(sf.fit.r_squared) << ',' << fp17(sf.fit.window_start) << ','
           << fp17(sf.fit.window_end) << ',' << fp17(rep.alpha_expect) << ','
           << (sf.pass ? "true" : "false") << '\n';
}

inline void write_decay_series_csv(std::ostream& os, const DecayStudyReport& rep) {
    os << "t,z_l2,z_h1,z_anorm,eta_l2\n";
    for (std::size_t i = 0; i < rep.t.size(); ++i)
        os << fp17(rep.t[i]) << ',' << fp17(rep.z_l2[i]) << ',' << fp17(rep.z_h1[i]) << ','
           << fp17(rep.z_anorm[i]) << ',' << fp17(rep.eta_l2[i]) << '\n';
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceTable& t) {
    os << "level,resolution,error_l2,observed_order\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        os << i << ',' << fp17(t.rows[i].resolution) << ',' << fp17(t.rows[i].error) << ',';
        if (std::isnan(t.rows[i].observed_order))
            os << "";
        else
            os << fp17(t.rows[i].observed_order);
        os << '\n';
    }
}

// Field snapshots: CSV grid dump with a text header carrying the grid
// dimensions, spacings, field role and time.
inline void write_velocity_snapshot(std::ostream& os, const VelocityField& f,
                                    const std::string& role, double time) {
    const auto& g = f.grid;
    os << "# vmemflow field snapshot\n";
    os << "# role = " << role << "\n";
    os << "# time = " << fp17(time) << "\n";
    os << "# lx = " << fp17(g.lx) << ", ly = " << fp17(g.ly) << "\n";
    os << "# nx = " << g.nx << ", ny = " << g.ny << "\n";
    os << "# hx = " << fp17(g.hx()) << ", hy = " << fp17(g.hy()) << "\n";
    os << "component,i,j,value\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            os << "u," << i << ',' << j << ',' << fp17(f.u_at(i, j)) << '\n';
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            os << "v," << i << ',' << j << ',' << fp17(f.v_at(i, j)) << '\n';
}

inline void write_scalar_snapshot(std::ostream& os, const ScalarField& f, const std::string& role,
                                  double time) {
    const auto& g = f.grid;
    os << "# vmemflow field snapshot\n";
    os << "# role = " << role << "\n";
    os << "# time = " << fp17(time) << "\n";
    os << "# lx = " << fp17(g.lx) << ", ly = " << fp17(g.ly) << "\n";
    os << "# nx = " << g.nx << ", ny = " << g.ny << "\n";
    os << "# hx = " << fp17(g.hx()) << ", hy = " << fp17(g.hy()) << "\n";
    os << "component,i,j,value\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) os << "p," << i << ',' << j << ',' << fp17(f.at(i, j)) << '\n';
}

} // namespace vmemflow
