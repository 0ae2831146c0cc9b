// Acceptance suite: one criterion per check, one PASS/FAIL line each, desk
// scale.  Exit status = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "vmemflow/analysis.hpp"
#include "vmemflow/dense_eigen.hpp"
#include "vmemflow/io.hpp"
#include "vmemflow/steady.hpp"
#include "vmemflow/transient.hpp"

using namespace vmemflow;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Harness {
public:
    void criterion(const std::string& id, const std::string& name,
                   const std::function<Outcome()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = body();
        } catch (const std::exception& e) {
            r.pass   = false;
            r.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("ACCEPTANCE %s %s: %s (%.1fs) %s\n", id.c_str(), name.c_str(),
                    r.pass ? "PASS" : "FAIL", secs, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures_;
    }

    int finish() const {
        std::printf("ACCEPTANCE SUMMARY: %d criterion failure(s)\n", failures_);
        return failures_;
    }

private:
    int failures_ = 0;
};

const std::vector<double> kBetas  = {0.0, 0.25, 0.5, 0.75, 0.9};
const std::vector<double> kDeltas = {0.5, 1.0, 4.0};

Outcome a1_kernel_identities() {
    double worst_partial = 0.0, worst_limit = 0.0;
    for (double beta : kBetas) {
        for (double delta : kDeltas) {
            const auto p    = KernelParams::validated(beta, delta, 1.0);
            const double dt = 0.05;
            const long n    = 400;
            const auto w    = make_weights(p, dt, n);
            double sum = 0.0;
            for (long k = 0; k < n; ++k) {
                sum += w.weights[static_cast<std::size_t>(k)];
                const double closed = kernel_primitive(p, 0.0, dt * static_cast<double>(k + 1));
                worst_partial = std::max(worst_partial, std::fabs(sum - closed) / closed);
            }
            // infinite-sum limit: extend the table until delta*n*dt = 45
            const long nfull = static_cast<long>(std::ceil(45.0 / (delta * dt)));
            const auto wf    = make_weights(p, dt, nfull);
            double full      = 0.0;
            for (double x : wf.weights) full += x;
            const double moment = kernel_moment(p);
            worst_limit = std::max(worst_limit, std::fabs(full - moment) / moment);
        }
    }
    return {worst_partial <= 1e-12 && worst_limit <= 1e-10,
            "max partial-sum rel err " + fp17(worst_partial) + ", max total-mass rel err " +
                fp17(worst_limit)};
}

double convolution_rel_error(long n) {
    const double beta = 0.5, delta = 1.0, alpha = 0.25, t = 2.0;
    const auto p    = KernelParams::validated(beta, delta, 1.0);
    const double dt = t / static_cast<double>(n);
    const auto w    = make_weights(p, dt, n);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (long j = 1; j <= n; ++j)
        y[static_cast<std::size_t>(j - 1)] = std::exp(-alpha * dt * static_cast<double>(j));
    const double lam   = delta - alpha;
    const double exact = std::exp(-alpha * t) * std::pow(lam, beta - 1.0) *
                         lower_incomplete_gamma(1.0 - beta, lam * t);
    return std::fabs(convolve_direct(w, y) - exact) / exact;
}

Outcome a2_convolution_oracle() {
    const double e256 = convolution_rel_error(256), e512 = convolution_rel_error(512),
                 e1024 = convolution_rel_error(1024);
    const double order = std::log2(e256 / e512);
    const bool pass    = order >= 0.85 && e1024 <= 2e-3;
    return {pass,
            "order(256->512) = " + fp17(order) + ", rel err at N=1024 = " + fp17(e1024)};
}

Outcome a3_discrete_positivity() {
    double worst_eig_ratio = 1.0, worst_cert = 1.0;
    const long n = 128;
    for (double beta : kBetas) {
        for (double delta : kDeltas) {
            const auto p = KernelParams::validated(beta, delta, 1.0);
            const auto w = make_weights(p, 0.05, n);
            std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
            for (long i = 0; i < n; ++i)
                for (long j = 0; j <= i; ++j) {
                    const double val = 0.5 * w.dt * w.weights[static_cast<std::size_t>(i - j)];
                    m[static_cast<std::size_t>(i) * n + j] += val;
                    m[static_cast<std::size_t>(j) * n + i] += val;
                }
            const auto ev = jacobi_eigenvalues(m, static_cast<std::size_t>(n));
            double lo = ev[0], hi = ev[0];
            for (double e : ev) {
                lo = std::min(lo, e);
                hi = std::max(hi, e);
            }
            worst_eig_ratio = std::min(worst_eig_ratio, lo / hi);

            double wsum = 0.0;
            for (double x : w.weights) wsum += x;
            const double cert = positivity_certificate(w, 1000, 20260810);
            worst_cert = std::min(worst_cert, cert / (w.dt * wsum));
        }
    }
    return {worst_eig_ratio >= -1e-12 && worst_cert >= -1e-12,
            "min eig / max eig = " + fp17(worst_eig_ratio) +
                ", min certificate (scaled) = " + fp17(worst_cert)};
}

Outcome a4_discretization_algebra() {
    const auto g = StaggeredGrid::validated(1.0, 1.0, 32, 32);
    NormalSampler rng(20260810);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const ScalarField q    = random_scalar(g, rng);
        const VelocityField w  = random_admissible_velocity(g, rng);
        const VelocityField w2 = random_admissible_velocity(g, rng);

        const double adj = std::fabs(dot(gradient(q), w) + dot(q, divergence(w))) /
                           (l2_norm(gradient(q)) * l2_norm(w) + 1e-300);
        const double sym = std::fabs(dot(laplacian(w), w2) - dot(w, laplacian(w2))) /
                           (l2_norm(laplacian(w)) * l2_norm(w2) + 1e-300);
        const VelocityField bw = advect(w, w2);
        const double skew = std::fabs(dot(bw, w2)) / (l2_norm(bw) * l2_norm(w2) + 1e-300);
        const VelocityField pw  = leray_project(w);
        VelocityField ppw = leray_project(pw);
        axpy(-1.0, pw, ppw);
        const double idem = l2_norm(ppw) / (l2_norm(pw) + 1e-300);
        worst = std::max({worst, adj, sym, skew, idem});
    }
    return {worst <= 1e-11, "worst scaled identity violation " + fp17(worst)};
}

Outcome a5_poincare() {
    const auto g = StaggeredGrid::validated(1.0, 1.0, 64, 64);
    const double got = poincare_constant(g);
    const double h = 1.0 / 64.0;
    const double pi = 3.14159265358979323846264338328;
    const double analytic_discrete = (2.0 / (h * h)) * (2.0 - 2.0 * std::cos(pi * h));
    const double continuum = 2.0 * pi * pi;
    const bool pass = std::fabs(got - analytic_discrete) <= 1e-9 &&
                      std::fabs(got - continuum) <= 0.01 * continuum;
    return {pass, "gamma0_h = " + fp17(got) + ", analytic discrete = " + fp17(analytic_discrete)};
}

SteadyConfig manufactured_steady_config(int n, double amp, SteadyMethod method) {
    SteadyConfig cfg;
    cfg.mu     = 1.0;
    cfg.kernel = KernelParams::validated(0.5, 1.0, 0.5);
    cfg.grid   = StaggeredGrid::validated(1.0, 1.0, n, n);
    cfg.fbar   = manufactured::steady_forcing(cfg.grid,
                                              effective_viscosity(cfg.mu, cfg.kernel), amp);
    cfg.method = method;
    cfg.tol    = 1e-11;
    cfg.seed   = 20260810;
    cfg.mu0_trials = 16;
    cfg.nh_samples = 16;
    return cfg;
}

Outcome a6_steady_solver() {
    const double amp = 8.0;
    double e32 = 0.0, e64 = 0.0;
    bool apriori = true;
    for (int n : {32, 64}) {
        const SteadyConfig cfg   = manufactured_steady_config(n, amp, SteadyMethod::stokes_iteration);
        const SteadySolution sol = solve_stokes_iteration(cfg);
        apriori = apriori && sol.diagnostics.apriori_ok;
        VelocityField d = sol.velocity;
        axpy(-1.0, manufactured::velocity_field(cfg.grid, amp), d);
        (n == 32 ? e32 : e64) = l2_norm(d);
    }
    const double order = std::log2(e32 / e64);

    const SteadyConfig c32 = manufactured_steady_config(32, amp, SteadyMethod::stokes_iteration);
    const SteadySolution spicard = solve_stokes_iteration(c32);
    const SteadySolution snewton = solve_newton(c32);
    apriori = apriori && spicard.diagnostics.apriori_ok && snewton.diagnostics.apriori_ok;
    VelocityField dd = spicard.velocity;
    axpy(-1.0, snewton.velocity, dd);
    const double agree = l2_norm(dd) / l2_norm(spicard.velocity);

    const bool pass = order >= 1.8 && order <= 2.2 && agree <= 1e-8 && apriori;
    return {pass, "spatial order " + fp17(order) + ", newton/stokes rel diff " + fp17(agree) +
                      ", apriori_ok " + (apriori ? std::string("true") : std::string("false"))};
}

Outcome a7_transient_reductions() {
    std::ostringstream detail;
    bool pass = true;

    // (a) zero data stays identically zero
    {
        FluidConfig cfg;
        cfg.kernel = KernelParams::validated(0.5, 1.0, 0.5);
        cfg.grid   = StaggeredGrid::validated(1.0, 1.0, 64, 64);
        cfg.dt     = 0.02;
        cfg.t_end  = 1.0;
        cfg.initial_velocity = VelocityField::zeros(cfg.grid);
        TransientRun run(cfg);
        const auto recs = run.run(10);
        double m = 0.0;
        for (const auto& r : recs) m = std::max(m, r.l2_sq);
        pass = pass && m == 0.0;
        detail << "zero-run max |u|^2 = " << fp17(m);
    }

    // (b) rho = 0 matches the zeroed-weights reference per step
    {
        NormalSampler rng(99);
        FluidConfig cfg;
        cfg.kernel = KernelParams::validated(0.5, 1.0, 0.0);
        cfg.grid   = StaggeredGrid::validated(1.0, 1.0, 64, 64);
        cfg.dt     = 0.01;
        cfg.t_end  = 2.0;
        cfg.initial_velocity = leray_project(random_admissible_velocity(cfg.grid, rng));
        cfg.forcing.kind = ForcingSpec::Kind::steady;
        cfg.forcing.fbar = manufactured::steady_forcing(cfg.grid, 1.0, 2.0);
        FluidConfig ref = cfg;
        ref.zero_weights_reference = true;
        TransientRun a(cfg), b(ref);
        double worst = 0.0;
        for (int s = 0; s < 200; ++s) {
            a.step();
            b.step();
            VelocityField d = a.state().velocity;
            axpy(-1.0, b.state().velocity, d);
            worst = std::max(worst, l2_norm(d) / l2_norm(a.state().velocity));
        }
        pass = pass && worst <= 1e-12;
        detail << ", rho0 per-step rel dev " << fp17(worst);
    }

    // (c) temporal order 1 +- 0.2 (non-stiff manufactured configuration)
    {
        ConvergenceStudyConfig c;
        c.mu        = 0.05;
        c.kernel    = KernelParams::validated(0.5, 4.0, 0.1);
        c.amplitude = 10.0;
        c.man_alpha = 3.0;
        c.base_n    = 64;
        c.base_dt   = 0.5 / 128.0;
        c.t_end     = 0.5;
        const ConvergenceTable t = convergence_table(StudyKind::transient_time, 2, c);
        const double order = t.rows.back().observed_order;
        pass = pass && std::fabs(order - 1.0) <= 0.2;
        detail << ", temporal order " << fp17(order);
    }

    // (d) spatial order 2 +- 0.2 (dt locked to h^2)
    {
        ConvergenceStudyConfig c;
        c.mu        = 1.0;
        c.kernel    = KernelParams::validated(0.5, 1.0, 0.5);
        c.amplitude = 10.0;
        c.man_alpha = 0.25;
        c.base_n    = 16;
        c.base_dt   = 0.5 / 32.0;
        c.t_end     = 0.5;
        const ConvergenceTable t = convergence_table(StudyKind::transient_space, 3, c);
        const double order = t.rows.back().observed_order;
        pass = pass && std::fabs(order - 2.0) <= 0.2;
        detail << ", spatial order " << fp17(order);
    }

    return {pass, detail.str()};
}

Outcome a8_exponential_convergence() {
    const auto grid = StaggeredGrid::validated(1.0, 1.0, 64, 64);

    SteadyConfig scfg;
    scfg.mu     = 1.0;
    scfg.kernel = KernelParams::validated(0.5, 1.0, 0.5);
    scfg.grid   = grid;
    scfg.fbar   = manufactured::steady_forcing(
        grid, effective_viscosity(scfg.mu, scfg.kernel), 4.0);
    scfg.tol        = 1e-11;
    scfg.seed       = 20260810;
    scfg.mu0_trials = 24;
    scfg.nh_samples = 24;

    FluidConfig cfg;
    cfg.mu     = scfg.mu;
    cfg.kernel = scfg.kernel;
    cfg.grid   = grid;
    // dt = 0.01: at coarser steps a startup-excited splitting mode (amplitude
    // shrinking like a high power of dt) pollutes the late-time tail
    cfg.dt     = 0.01;
    cfg.t_end  = 20.0;
    cfg.forcing.kind   = ForcingSpec::Kind::decaying;
    cfg.forcing.fbar   = scfg.fbar;
    cfg.forcing.g      = manufactured::velocity_field(grid, 1.0);
    axpy(1.0, gradient(manufactured::pressure_field(grid, 1.0)), cfg.forcing.g);
    cfg.forcing.alpha0 = 0.55;
    cfg.initial_velocity = VelocityField::zeros(grid);

    const DecayStudyReport rep = decay_study(cfg, scfg, 5);

    const double alpha_max = rep.bound.alpha_max();
    bool pass = rep.uniqueness_indicator < 0.5 && cfg.forcing.alpha0 >= alpha_max;
    std::ostringstream detail;
    detail << "alpha_max = " << fp17(alpha_max) << " (mu0 " << fp17(rep.bound.mu0_est)
           << ", gamma0 " << fp17(rep.bound.gamma0_h) << "), indicator "
           << fp17(rep.uniqueness_indicator);
    for (const auto& sf : rep.fits) {
        const bool ok = sf.fit.alpha >= 0.9 * alpha_max * 0.9 && sf.fit.r_squared >= 0.98;
        pass = pass && ok;
        detail << ", " << sf.name << " alpha=" << fp17(sf.fit.alpha)
               << " r2=" << fp17(sf.fit.r_squared);
    }
    return {pass, detail.str()};
}

Outcome a9_reformulation() {
    const SteadyConfig cfg   = manufactured_steady_config(32, 8.0, SteadyMethod::stokes_iteration);
    const SteadySolution sol = solve_stokes_iteration(cfg);
    std::vector<double> times;
    for (int i = 1; i <= 20; ++i) times.push_back(0.35 * i);
    const auto rs = steady_reformulation_residual(sol.velocity, cfg.kernel, 0.05, times);
    const double lap_norm = l2_norm(laplacian(sol.velocity));
    double worst = 0.0;
    for (double r : rs) worst = std::max(worst, r);
    return {worst <= 1e-10 * lap_norm,
            "max residual " + fp17(worst) + " vs bound " + fp17(1e-10 * lap_norm)};
}

Outcome a10_beta_continuity() {
    SteadyConfig cfg = manufactured_steady_config(32, 8.0, SteadyMethod::stokes_iteration);
    cfg.kernel       = KernelParams::validated(0.0, 1.0, 0.5);
    // keep the forcing fixed across the beta sweep
    const VelocityField fbar = cfg.fbar;
    const SteadySolution ref = solve_stokes_iteration(cfg);
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    std::ostringstream detail;
    for (double beta : {0.1, 0.01, 0.001}) {
        cfg.kernel = KernelParams::validated(beta, 1.0, 0.5);
        cfg.fbar   = fbar;
        const SteadySolution sol = solve_stokes_iteration(cfg);
        VelocityField d = sol.velocity;
        axpy(-1.0, ref.velocity, d);
        const double dist = l2_norm(d);
        monotone = monotone && dist < prev;
        detail << " |u(" << beta << ")-u_classical| = " << fp17(dist);
        prev = dist;
    }
    return {monotone, detail.str()};
}

Outcome a11_soe_fidelity() {
    const auto p = KernelParams::validated(0.5, 1.0, 0.5);
    const double dt = 0.02, t_end = 10.24, tol = 1e-8; // 512 steps
    const auto soe = fit_soe(p, dt, t_end + 2.0 * dt, tol);

    // recheck the certificate on a fresh dense grid
    double worst = 0.0;
    for (int i = 0; i <= 12000; ++i) {
        const double t = std::exp(std::log(dt) +
                                  (std::log(t_end) - std::log(dt)) * i / 12000.0);
        const double k = kernel_eval(p, t);
        worst = std::max(worst, std::fabs(soe.eval(t) - k) / k);
    }
    bool pass = worst <= tol;

    NormalSampler rng(4242);
    FluidConfig cfg;
    cfg.kernel = p;
    cfg.grid   = StaggeredGrid::validated(1.0, 1.0, 32, 32);
    cfg.dt     = dt;
    cfg.t_end  = t_end;
    cfg.soe_tol = tol;
    cfg.initial_velocity = leray_project(random_admissible_velocity(cfg.grid, rng));
    cfg.forcing.kind = ForcingSpec::Kind::steady;
    cfg.forcing.fbar = manufactured::steady_forcing(cfg.grid, 1.0, 4.0);

    FluidConfig soecfg  = cfg;
    soecfg.history_mode = HistoryMode::soe;
    TransientRun a(cfg), b(soecfg);
    const auto ra = a.run(4), rb = b.run(4);
    auto col_dev = [&](auto proj) {
        double sup = 0.0, dev = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            sup = std::max(sup, std::fabs(proj(ra[i])));
            dev = std::max(dev, std::fabs(proj(ra[i]) - proj(rb[i])));
        }
        return sup > 0.0 ? dev / sup : 0.0;
    };
    const double d1 = col_dev([](const DiagnosticsRecord& r) { return r.l2_sq; });
    const double d2 = col_dev([](const DiagnosticsRecord& r) { return r.h1_sq; });
    const double d3 = col_dev([](const DiagnosticsRecord& r) { return r.a_norm_sq; });
    const double d4 = col_dev([](const DiagnosticsRecord& r) { return r.ut_l2_sq; });
    const double d5 = col_dev([](const DiagnosticsRecord& r) { return r.mem_form; });
    const double dmax = std::max({d1, d2, d3, d4, d5});
    pass = pass && dmax <= 10.0 * tol;
    return {pass, "certified rel err " + fp17(worst) + " (modes " +
                      std::to_string(soe.modes.size()) + "), max diagnostic deviation " +
                      fp17(dmax) + " vs budget " + fp17(10.0 * tol)};
}

} // namespace

int main() {
    Harness h;
    h.criterion("A1", "kernel weight identities", a1_kernel_identities);
    h.criterion("A2", "convolution order and accuracy", a2_convolution_oracle);
    h.criterion("A3", "discrete kernel positivity", a3_discrete_positivity);
    h.criterion("A4", "discretization algebra", a4_discretization_algebra);
    h.criterion("A5", "poincare constant", a5_poincare);
    h.criterion("A6", "steady solver", a6_steady_solver);
    h.criterion("A7", "transient reductions and orders", a7_transient_reductions);
    h.criterion("A8", "exponential convergence to steady state", a8_exponential_convergence);
    h.criterion("A9", "reformulation exactness", a9_reformulation);
    h.criterion("A10", "beta -> 0 continuity", a10_beta_continuity);
    h.criterion("A11", "sum-of-exponentials fidelity", a11_soe_fidelity);
    return h.finish();
}
