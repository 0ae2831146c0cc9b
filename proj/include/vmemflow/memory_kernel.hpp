#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "vmemflow/dense_eigen.hpp"
#include "vmemflow/errors.hpp"
#include "vmemflow/kernel_params.hpp"
#include "vmemflow/rng.hpp"
#include "vmemflow/special_functions.hpp"

namespace vmemflow {

/// Pointwise kernel value K(t) = t^{-beta} e^{-delta t}.
inline double kernel_eval(const KernelParams& p, double t) {
    if (!(t > 0.0))
        throw std::domain_error("kernel_eval: t must be > 0 (kernel is singular at 0)");
    return std::pow(t, -p.beta) * std::exp(-p.delta * t);
}

/// Total kernel mass Gamma(1-beta)/delta^{1-beta}; rho times this is the
/// steady-state memory coefficient.
inline double kernel_moment(const KernelParams& p) {
    if (!(p.delta > 0.0))
        throw std::invalid_argument("kernel_moment: delta must be > 0");
    return gamma_fn(1.0 - p.beta) * std::pow(p.delta, p.beta - 1.0);
}

/// Product-integration weights omega_k = int_{k dt}^{(k+1) dt} K(tau) dtau,
/// each an exact kernel integral (no numerical quadrature).
struct QuadratureWeights {
    double dt = 0.0;
    std::vector<double> weights;
    /// Index of the first far-tail weight that rounded to exactly 0 (the exact
    /// value is positive but below the floating-point range), or -1 if none.
    std::ptrdiff_t underflow_begin = -1;
};

inline QuadratureWeights make_weights(const KernelParams& p, double dt, long n) {
    if (!(dt > 0.0)) throw std::invalid_argument("make_weights: dt must be > 0");
    if (n < 1) throw std::invalid_argument("make_weights: n must be >= 1");
    QuadratureWeights w;
    w.dt = dt;
    w.weights.resize(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k)
        w.weights[static_cast<std::size_t>(k)] =
            kernel_primitive(p, static_cast<double>(k) * dt, static_cast<double>(k + 1) * dt);
    for (long k = 0; k < n; ++k) {
        const double wk = w.weights[static_cast<std::size_t>(k)];
        if (wk == 0.0) {
            w.underflow_begin = k;
            break;
        }
        if (!(wk > 0.0) || (k > 0 && wk > w.weights[static_cast<std::size_t>(k - 1)]))
            throw std::logic_error("make_weights: weight table lost positivity/monotonicity");
    }
    if (w.underflow_begin >= 0)
        for (long k = w.underflow_begin; k < n; ++k) w.weights[static_cast<std::size_t>(k)] = 0.0;
    return w;
}

/// Right-endpoint product integration of the history against the kernel:
/// returns sum_{j=1}^{n} omega_{n-j} y_j, where y_j is the right-endpoint
/// sample on [t_{j-1}, t_j].
inline double convolve_direct(const QuadratureWeights& w, std::span<const double> history) {
    const std::size_t n = history.size();
    if (n > w.weights.size())
        throw std::invalid_argument("convolve_direct: history longer than weight table");
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += w.weights[n - 1 - j] * history[j];
    return acc;
}

/// Minimum over seeded random vectors phi of the normalized discrete memory
/// quadratic form  dt * sum_n sum_{j<=n} omega_{n-j} phi_j phi_n / |phi|^2.
/// A nonnegative value certifies the discrete kernel-positivity property on
/// those samples.
inline double positivity_certificate(const QuadratureWeights& w, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("positivity_certificate: trials must be >= 1");
    const std::size_t n = w.weights.size();
    NormalSampler rng(seed);
    std::vector<double> phi(n);
    double best = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            phi[i] = rng();
            norm2 += phi[i] * phi[i];
        }
        double q = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            double inner = 0.0;
            for (std::size_t j = 0; j <= m; ++j) inner += w.weights[m - j] * phi[j];
            q += inner * phi[m];
        }
        best = std::min(best, w.dt * q / norm2);
    }
    return best;
}

/// One exponential mode a * exp(-lambda t).
struct SoeMode {
    double amplitude = 0.0;
    double rate      = 0.0;
};

/// Certified sum-of-exponentials approximation of the kernel on
/// [valid_from, horizon].
struct SoeApproximation {
    std::vector<SoeMode> modes;
    double valid_from         = 0.0;
    double horizon            = 0.0;
    double certified_rel_error = 0.0;

    double eval(double t) const {
        double s = 0.0;
        for (const auto& m : modes) s += m.amplitude * std::exp(-m.rate * t);
        return s;
    }
};

namespace detail {

// Gauss nodes/weights for an explicit nonnegative discrete measure
// sum_k c_k delta_{x_k}, by the Stieltjes procedure plus Golub-Welsch.
// Returns at most q (node, weight) pairs with positive weights.
inline std::vector<SoeMode> gauss_of_discrete_measure(const std::vector<double>& mass,
                                                      const std::vector<double>& node, int q) {
    const std::size_t npts = mass.size();
    double m0 = 0.0;
    for (double c : mass) m0 += c;
    if (!(m0 > 0.0) || npts == 0) return {};
    q = std::min<int>(q, static_cast<int>(npts));

    std::vector<double> alpha(q, 0.0), beta(q, 0.0);
    std::vector<double> p_prev(npts, 0.0), p_cur(npts, 1.0 / std::sqrt(m0)), r(npts);
    int built = 0;
    for (int j = 0; j < q; ++j) {
        double aj = 0.0;
        for (std::size_t k = 0; k < npts; ++k) aj += mass[k] * node[k] * p_cur[k] * p_cur[k];
        alpha[j] = aj;
        ++built;
        if (j == q - 1) break;
        const double sb = j > 0 ? std::sqrt(beta[j]) : 0.0;
        double nb = 0.0;
        for (std::size_t k = 0; k < npts; ++k) {
            r[k] = (node[k] - aj) * p_cur[k] - sb * p_prev[k];
            nb += mass[k] * r[k] * r[k];
        }
        if (!(nb > 1e-28 * m0)) break; // measure exhausted
        beta[j + 1] = nb;
        const double inv = 1.0 / std::sqrt(nb);
        for (std::size_t k = 0; k < npts; ++k) {
            p_prev[k] = p_cur[k];
            p_cur[k]  = r[k] * inv;
        }
    }

    const int nq = built;
    std::vector<double> jm(static_cast<std::size_t>(nq) * nq, 0.0);
    for (int i = 0; i < nq; ++i) {
        jm[static_cast<std::size_t>(i) * nq + i] = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < nq) {
            const double off = std::sqrt(beta[static_cast<std::size_t>(i) + 1]);
            jm[static_cast<std::size_t>(i) * nq + i + 1] = off;
            jm[static_cast<std::size_t>(i + 1) * nq + i] = off;
        }
    }
    std::vector<double> vec;
    const std::vector<double> ev = jacobi_eigenvalues(jm, static_cast<std::size_t>(nq), &vec);
    std::vector<SoeMode> out;
    for (int i = 0; i < nq; ++i) {
        const double wgt = m0 * vec[static_cast<std::size_t>(i)] * vec[static_cast<std::size_t>(i)];
        const double nod = std::max(ev[static_cast<std::size_t>(i)], 0.0);
        if (wgt > 0.0) out.push_back({wgt, nod});
    }
    return out;
}

} // namespace detail

/// Build a certified sum-of-exponentials approximation of K on [dt, horizon].
///
/// The power-law factor is written as a Laplace transform,
/// t^{-beta} = (1/Gamma(beta)) int_0^inf s^{beta-1} e^{-st} ds, discretized by
/// the trapezoidal rule in log s.  Trapezoid nodes below the working range are
/// an explicit geometric measure; they are compressed into a few Gauss modes
/// instead of being truncated.  Multiplying by e^{-delta t} shifts every rate
/// by delta.  The result is verified on a dense log-spaced grid and the
/// measured error stored; failure to meet `tol` within `mode_budget` modes
/// raises SoeFitError carrying the achieved error.
inline SoeApproximation fit_soe(const KernelParams& p, double dt, double horizon, double tol,
                                int mode_budget = 128) {
    if (!(dt > 0.0)) throw std::invalid_argument("fit_soe: dt must be > 0");
    if (!(horizon > dt)) throw std::invalid_argument("fit_soe: horizon must exceed dt");
    if (!(tol > 1e-12 && tol < 1e-2))
        throw std::invalid_argument("fit_soe: tol must lie in (1e-12, 1e-2)");
    if (mode_budget < 2) throw std::invalid_argument("fit_soe: mode budget too small");

    SoeApproximation soe;
    soe.valid_from = dt;
    soe.horizon    = horizon;

    if (p.beta == 0.0) {
        soe.modes = {SoeMode{1.0, p.delta}};
    } else {
        const double beta = p.beta;
        const double gb   = gamma_fn(beta);
        const double tolc = tol / 5.0;
        double h          = 9.869604401089358 / (std::log(1.0 / tolc) + 4.0);

        // Upper cutoff: the largest needed rate, where e^{-s dt} kills the terms.
        double y = 30.0;
        for (int i = 0; i < 60; ++i)
            y = std::log(2.0 / (tolc * gb)) + beta * std::log(std::max(y, 1.0)) + std::log(1.0 / h);
        const double x_max = std::log((y + 2.0) / dt);
        // Below s_min the modes are compressed by a small Gauss rule.
        const int q        = 6;
        const double s_min = 1.0 / horizon;
        const double x_min = std::log(s_min);

        long n = static_cast<long>(std::ceil((x_max - x_min) / h)) + 1;
        if (n + q > mode_budget) {
            n = std::max<long>(mode_budget - q, 2);
            h = (x_max - x_min) / static_cast<double>(n - 1);
        }

        soe.modes.reserve(static_cast<std::size_t>(n) + q);
        for (long i = 0; i < n; ++i) {
            const double x = x_min + h * static_cast<double>(i);
            soe.modes.push_back({h * std::exp(beta * x) / gb, std::exp(x)});
        }

        // Geometric tail of trapezoid nodes below x_min.  Nodes whose rate is
        // numerically indistinguishable from 0 on [0, horizon] are lumped into
        // a single atom at 0 with the exact remaining geometric mass.
        const long kstar = static_cast<long>(std::ceil(std::log(1e18) / h)) + 2;
        std::vector<double> tmass, tnode;
        for (long k = 1; k <= kstar; ++k) {
            const double x = x_min - h * static_cast<double>(k);
            tmass.push_back(h * std::exp(beta * x) / gb);
            tnode.push_back(std::exp(x));
        }
        const double rho_ratio = std::exp(-beta * h);
        const double rest = h * std::exp(beta * (x_min - h * static_cast<double>(kstar + 1))) / gb /
                            (1.0 - rho_ratio);
        tmass.push_back(rest);
        tnode.push_back(0.0);
        for (const SoeMode& m : detail::gauss_of_discrete_measure(tmass, tnode, q))
            soe.modes.push_back(m);

        for (SoeMode& m : soe.modes) m.rate += p.delta;
    }

    // Certify on a dense log-spaced grid.
    const int ncheck = 20001;
    double worst     = 0.0;
    const double la = std::log(dt), lb = std::log(horizon);
    for (int i = 0; i < ncheck; ++i) {
        const double t = std::exp(la + (lb - la) * static_cast<double>(i) / (ncheck - 1));
        const double k = kernel_eval(p, t);
        worst = std::max(worst, std::fabs(soe.eval(t) - k) / k);
    }
    soe.certified_rel_error = worst;
    if (static_cast<int>(soe.modes.size()) > mode_budget || worst > tol)
        throw SoeFitError("fit_soe: could not reach tolerance within the mode budget", worst,
                          static_cast<int>(soe.modes.size()));
    return soe;
}

/// Linear operations the history buffer needs from a sample type.
template <class S>
struct SampleOps;

template <>
struct SampleOps<double> {
    static double zero_like(const double&) { return 0.0; }
    static void add(double& y, const double& x) { y += x; }
    static void axpy(double a, const double& x, double& y) { y += a * x; }
    static void scale(double a, double& y) { y *= a; }
};

/// Stored convolution history: either raw snapshots (direct mode) or per-mode
/// exponential accumulators (compressed mode).
template <class Sample>
struct HistoryBuffer {
    enum class Mode { direct, compressed };

    Mode mode = Mode::direct;
    double dt = 0.0;
    long steps = 0;

    std::vector<Sample> snapshots; // direct

    SoeApproximation soe;            // compressed
    double omega0 = 0.0;             // exact newest-interval weight
    std::vector<double> decay;       // e^{-lambda_m dt}
    std::vector<double> mode_weight; // b_m = a_m (1 - e^{-lambda_m dt}) / lambda_m
    std::vector<Sample> accumulators;
};

template <class Sample>
HistoryBuffer<Sample> make_direct_history(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("make_direct_history: dt must be > 0");
    HistoryBuffer<Sample> b;
    b.mode = HistoryBuffer<Sample>::Mode::direct;
    b.dt   = dt;
    return b;
}

template <class Sample>
HistoryBuffer<Sample> make_compressed_history(const KernelParams& p, const SoeApproximation& soe,
                                              double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("make_compressed_history: dt must be > 0");
    HistoryBuffer<Sample> b;
    b.mode   = HistoryBuffer<Sample>::Mode::compressed;
    b.dt     = dt;
    b.soe    = soe;
    b.omega0 = kernel_primitive(p, 0.0, dt);
    b.decay.reserve(soe.modes.size());
    b.mode_weight.reserve(soe.modes.size());
    for (const auto& m : soe.modes) {
        b.decay.push_back(std::exp(-m.rate * dt));
        b.mode_weight.push_back(m.rate > 0.0
                                    ? m.amplitude * (-std::expm1(-m.rate * dt)) / m.rate
                                    : m.amplitude * dt);
    }
    return b;
}

/// Lagged part of the compressed convolution, sum_m b_m s_m (everything except
/// the newest interval).
template <class Sample>
Sample lagged_convolution(const HistoryBuffer<Sample>& b, const Sample& prototype) {
    Sample acc = SampleOps<Sample>::zero_like(prototype);
    if (b.mode != HistoryBuffer<Sample>::Mode::compressed) return acc;
    for (std::size_t m = 0; m < b.accumulators.size(); ++m)
        SampleOps<Sample>::axpy(b.mode_weight[m], b.accumulators[m], acc);
    return acc;
}

/// Append a completed-step sample to the buffer.
template <class Sample>
void push_sample(HistoryBuffer<Sample>& b, const Sample& y) {
    if (b.mode == HistoryBuffer<Sample>::Mode::direct) {
        b.snapshots.push_back(y);
    } else {
        if (b.accumulators.empty())
            b.accumulators.assign(b.decay.size(), SampleOps<Sample>::zero_like(y));
        for (std::size_t m = 0; m < b.accumulators.size(); ++m) {
            SampleOps<Sample>::add(b.accumulators[m], y);
            SampleOps<Sample>::scale(b.decay[m], b.accumulators[m]);
        }
    }
    ++b.steps;
}

/// One step of the O(M) compressed convolution: returns the convolution value
/// at the step whose right-endpoint sample is `y` and folds `y` into the
/// accumulators.
template <class Sample>
Sample convolve_soe_step(HistoryBuffer<Sample>& b, const Sample& y, double dt) {
    if (b.mode != HistoryBuffer<Sample>::Mode::compressed)
        throw std::invalid_argument("convolve_soe_step: buffer not in compressed mode");
    if (!(std::fabs(dt - b.dt) <= 1e-14 * b.dt))
        throw std::invalid_argument("convolve_soe_step: dt mismatch");
    Sample value = lagged_convolution(b, y);
    SampleOps<Sample>::axpy(b.omega0, y, value);
    push_sample(b, y);
    return value;
}

} // namespace vmemflow
