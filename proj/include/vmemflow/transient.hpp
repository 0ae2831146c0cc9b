#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vmemflow/discretization.hpp"
#include "vmemflow/errors.hpp"
#include "vmemflow/grid.hpp"
#include "vmemflow/manufactured.hpp"
#include "vmemflow/memory_kernel.hpp"
#include "vmemflow/operators.hpp"
#include "vmemflow/solvers.hpp"

namespace vmemflow {

template <>
struct SampleOps<VelocityField> {
    static VelocityField zero_like(const VelocityField& f) { return VelocityField::zeros(f.grid); }
    static void add(VelocityField& y, const VelocityField& x) { axpy(1.0, x, y); }
    static void axpy(double a, const VelocityField& x, VelocityField& y) {
        vmemflow::axpy(a, x, y);
    }
    static void scale(double a, VelocityField& y) { vmemflow::scale(y, a); }
};

enum class HistoryMode { direct, soe };

/// Time-dependent forcing.  The decaying variant f(t) = fbar + g e^{-alpha0 t}
/// satisfies the square-exponential integrability assumption for every rate
/// below alpha0 by construction.
struct ForcingSpec {
    enum class Kind { zero, steady, decaying, manufactured };
    Kind kind = Kind::zero;

    VelocityField fbar;  // steady / decaying
    VelocityField g;     // decaying perturbation shape
    double alpha0 = 0.0; // decaying rate

    double man_alpha     = 0.25; // manufactured profile rate
    double man_amplitude = 1.0;

    VelocityField evaluate(const StaggeredGrid& grid, const KernelParams& kernel, double mu,
                           double t) const {
        switch (kind) {
        case Kind::zero:
            return VelocityField::zeros(grid);
        case Kind::steady:
            return fbar;
        case Kind::decaying: {
            VelocityField f = fbar;
            axpy(std::exp(-alpha0 * t), g, f);
            return f;
        }
        case Kind::manufactured:
            return manufactured::transient_forcing(grid, kernel, mu, man_alpha, man_amplitude, t);
        }
        return VelocityField::zeros(grid);
    }
};

struct FluidConfig {
    double mu = 1.0;
    KernelParams kernel;
    StaggeredGrid grid;
    double dt    = 0.02;
    double t_end = 1.0;
    ForcingSpec forcing;
    VelocityField initial_velocity;
    ScalarField initial_pressure; // empty = zero start
    HistoryMode history_mode = HistoryMode::direct;
    double soe_tol           = 1e-8;
    bool advection           = true;

    /// Treats the run as started from a constant pre-history equal to this
    /// field (the reformulated steady equation's point of view); empty = none.
    bool preload_prehistory = false;
    VelocityField prehistory;

    /// Testing aid: execute the memory path with the weight table zeroed.
    bool zero_weights_reference = false;

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
        if (!(kernel.delta > 0.0))
            throw std::invalid_argument("the flow model requires delta > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
        if (!(t_end >= dt)) throw std::invalid_argument("t_end must be at least dt");
        if (initial_velocity.grid != grid)
            throw std::invalid_argument("initial velocity grid mismatch");
        if (!initial_pressure.v.empty() && initial_pressure.grid != grid)
            throw std::invalid_argument("initial pressure grid mismatch");
        const double un = l2_norm(initial_velocity);
        if (l2_norm(divergence(initial_velocity)) > 1e-10 * std::max(un, 1e-30) / grid.hx())
            throw std::invalid_argument("initial velocity is not discretely divergence-free");
    }

    long total_steps() const { return static_cast<long>(std::llround(t_end / dt)); }
};

/// Per-record run diagnostics; mem_form is the cumulative memory quadratic
/// form (its per-step increment is also carried for monitors).
struct DiagnosticsRecord {
    double t            = 0.0;
    double l2_sq        = 0.0;
    double h1_sq        = 0.0;
    double a_norm_sq    = 0.0;
    double ut_l2_sq     = 0.0;
    double mem_form     = 0.0;
    double div_residual = 0.0;
    double mem_form_increment = 0.0; // not part of the CSV schema
};

struct TransientState {
    long step = 0;
    double t  = 0.0;
    VelocityField velocity;
    ScalarField pressure;
    VelocityField prev_velocity;
    HistoryBuffer<VelocityField> history{};
    double mem_form_cumulative = 0.0;
    double last_mem_increment  = 0.0;
};

/// Semi-implicit projection stepper for the flow with memory: implicit
/// diffusion carrying the newest kernel weight, explicit advection,
/// incremental pressure projection, product-integration history.
class TransientRun {
public:
    explicit TransientRun(FluidConfig cfg) : cfg_(std::move(cfg)), fs_(cfg_.grid) {
        cfg_.validate();
        init_weights();
        st_.velocity      = cfg_.initial_velocity;
        st_.prev_velocity = cfg_.initial_velocity;
        st_.pressure = cfg_.initial_pressure.v.empty() ? ScalarField::zeros(cfg_.grid)
                                                       : cfg_.initial_pressure;
        st_.history       = make_history();
        if (max_abs(cfg_.initial_velocity) * cfg_.dt / std::min(cfg_.grid.hx(), cfg_.grid.hy()) >
            1.0)
            warnings_.push_back("advective CFL exceeds 1 for the initial data");
        if (cfg_.history_mode == HistoryMode::direct && cfg_.total_steps() > 10000)
            warnings_.push_back("direct history above 1e4 steps: quadratic cost");
    }

    /// Resume from a captured state (deterministic continuation).
    TransientRun(FluidConfig cfg, TransientState restored)
        : cfg_(std::move(cfg)), fs_(cfg_.grid), st_(std::move(restored)) {
        cfg_.validate();
        init_weights();
        const bool compressed =
            st_.history.mode == HistoryBuffer<VelocityField>::Mode::compressed;
        if (compressed != (cfg_.history_mode == HistoryMode::soe))
            throw std::invalid_argument("restart: history mode mismatch with config");
        if (cfg_.history_mode == HistoryMode::direct &&
            st_.history.steps != static_cast<long>(st_.history.snapshots.size()))
            throw std::invalid_argument("restart: corrupted direct history");
        if (st_.history.steps != st_.step)
            throw std::invalid_argument("restart: history length does not match step index");
    }

    const FluidConfig& config() const { return cfg_; }
    const TransientState& state() const { return st_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    void step() {
        const long n     = st_.step;
        const double dt  = cfg_.dt;
        const double t1  = static_cast<double>(n + 1) * dt;
        const double rho = cfg_.kernel.rho;

        // (1) memory assembly: lagged weighted history sum (newest weight is
        // reserved for the implicit unknown)
        VelocityField H = lagged_memory_sum(t1);

        // (2) implicit momentum solve
        VelocityField rhs = st_.velocity;
        scale(rhs, 1.0 / dt);
        if (cfg_.advection) axpy(-1.0, advect(st_.velocity, st_.velocity), rhs);
        axpy(rho, laplacian(H), rhs);
        VelocityField f = cfg_.forcing.evaluate(cfg_.grid, cfg_.kernel, cfg_.mu, t1);
        enforce_normal_bc(f);
        axpy(1.0, f, rhs);
        axpy(-1.0, gradient(st_.pressure), rhs);
        const double omega0 = effective_omega0();
        const VelocityField ustar = fs_.helmholtz(1.0 / dt, cfg_.mu + rho * omega0, rhs);

        // (3) incremental pressure projection
        ScalarField s = divergence(ustar);
        scale(s, -1.0 / dt);
        const ScalarField phi = fs_.poisson_neumann(s);
        VelocityField unew = ustar;
        axpy(-dt, gradient(phi), unew);
        ScalarField pnew = st_.pressure;
        axpy(1.0, phi, pnew);

        const double un = l2_norm(unew);
        if (!std::isfinite(un))
            throw NumericalFailure("transient step produced a non-finite velocity", n + 1);
        if (l2_norm(divergence(unew)) > 1e-8 * std::max(un, 1e-30) / cfg_.grid.hx())
            throw NumericalFailure("projection left a large divergence residual", n + 1);
        if (cfg_.advection &&
            max_abs(unew) * dt / std::min(cfg_.grid.hx(), cfg_.grid.hy()) > 1.0 && !cfl_warned_) {
            warnings_.push_back("advective CFL exceeded 1 during the run");
            cfl_warned_ = true;
        }

        // memory quadratic form increment over this step, rho * dt *
        // <grad conv, grad u^{n+1}> with the full convolution at t_{n+1}
        axpy(omega0, unew, H);
        const double inc = rho * dt * h1_inner(H, unew);
        st_.mem_form_cumulative += inc;
        st_.last_mem_increment = inc;

        // (4) history append
        st_.prev_velocity = std::move(st_.velocity);
        st_.velocity      = std::move(unew);
        st_.pressure      = std::move(pnew);
        push_sample(st_.history, st_.velocity);
        st_.step = n + 1;
        st_.t    = t1;
    }

    DiagnosticsRecord energy_record() const {
        DiagnosticsRecord r;
        r.t         = st_.t;
        r.l2_sq     = dot(st_.velocity, st_.velocity);
        r.h1_sq     = h1_inner(st_.velocity, st_.velocity);
        VelocityField l = laplacian(st_.velocity);
        scale(l, -1.0);
        const double an = l2_norm(leray_project(l));
        r.a_norm_sq = an * an;
        if (st_.step > 0) {
            VelocityField du = st_.velocity;
            axpy(-1.0, st_.prev_velocity, du);
            scale(du, 1.0 / cfg_.dt);
            r.ut_l2_sq = dot(du, du);
        }
        r.mem_form           = st_.mem_form_cumulative;
        r.mem_form_increment = st_.last_mem_increment;
        r.div_residual       = l2_norm(divergence(st_.velocity));
        return r;
    }

    /// March to t_end, recording diagnostics every `cadence` steps (plus the
    /// initial and final states).  The optional callback sees every recorded
    /// state (for snapshots).
    std::vector<DiagnosticsRecord>
    run(int cadence, const std::function<void(const TransientState&)>& on_record = {}) {
        if (cadence < 1) throw std::invalid_argument("cadence must be >= 1");
        const long nsteps = cfg_.total_steps();
        std::vector<DiagnosticsRecord> records;
        records.reserve(static_cast<std::size_t>(nsteps / cadence) + 2);
        records.push_back(energy_record());
        if (on_record) on_record(st_);
        while (st_.step < nsteps) {
            step();
            if (st_.step % cadence == 0 || st_.step == nsteps) {
                records.push_back(energy_record());
                if (on_record) on_record(st_);
            }
        }
        return records;
    }

private:
    void init_weights() {
        const long n = cfg_.total_steps() + 1;
        weights_ = make_weights(cfg_.kernel, cfg_.dt, n);
        if (cfg_.zero_weights_reference)
            for (double& w : weights_.weights) w = 0.0;
        if (cfg_.history_mode == HistoryMode::soe)
            soe_ = fit_soe(cfg_.kernel, cfg_.dt, cfg_.t_end + 2.0 * cfg_.dt, cfg_.soe_tol);
    }

    HistoryBuffer<VelocityField> make_history() const {
        if (cfg_.history_mode == HistoryMode::soe) {
            auto b = make_compressed_history<VelocityField>(cfg_.kernel, soe_, cfg_.dt);
            if (cfg_.zero_weights_reference) {
                b.omega0 = 0.0;
                for (double& x : b.mode_weight) x = 0.0;
            }
            return b;
        }
        return make_direct_history<VelocityField>(cfg_.dt);
    }

    double effective_omega0() const {
        if (cfg_.history_mode == HistoryMode::soe) return st_.history.omega0;
        return weights_.weights[0];
    }

    // Sum over completed samples of omega_{n+1-j} u^j, plus the exact
    // pre-history tail when preloading is enabled.
    VelocityField lagged_memory_sum(double t_next) {
        VelocityField H = VelocityField::zeros(cfg_.grid);
        if (cfg_.history_mode == HistoryMode::direct) {
            const auto& snaps = st_.history.snapshots;
            const long n = static_cast<long>(snaps.size());
            for (long j = 0; j < n; ++j)
                axpy(weights_.weights[static_cast<std::size_t>(n - j)],
                     snaps[static_cast<std::size_t>(j)], H);
        } else {
            H = lagged_convolution(st_.history, H);
        }
        if (cfg_.preload_prehistory) {
            const double tail = cfg_.zero_weights_reference
                                    ? 0.0
                                    : kernel_primitive(cfg_.kernel, t_next,
                                                       std::numeric_limits<double>::infinity());
            axpy(tail, cfg_.prehistory, H);
        }
        return H;
    }

    FluidConfig cfg_;
    FastSolvers fs_;
    TransientState st_;
    QuadratureWeights weights_;
    SoeApproximation soe_;
    std::vector<std::string> warnings_;
    bool cfl_warned_ = false;
};

/// One step as a free operation on explicit state (test-facing convenience;
/// rebuilds the workspace each call).
inline TransientState step(const TransientState& st, const FluidConfig& cfg) {
    TransientRun run(cfg, st);
    run.step();
    return run.state();
}

/// Diagnostics of a state under its config.
inline DiagnosticsRecord energy_monitor(const TransientState& st, const FluidConfig& cfg) {
    const TransientRun run(cfg, st);
    return run.energy_record();
}

} // namespace vmemflow
