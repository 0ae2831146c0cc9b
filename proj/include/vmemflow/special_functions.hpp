#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "vmemflow/kernel_params.hpp"

namespace vmemflow {

/// Gamma function for positive arguments.
inline double gamma_fn(double z) {
    if (!(z > 0.0))
        throw std::domain_error("gamma_fn: argument must be > 0");
    return std::tgamma(z);
}

namespace detail {

// Series for the lower incomplete gamma, accurate for x < a+1:
//   gamma(a,x) = x^a e^{-x} sum_{n>=0} x^n / (a (a+1) ... (a+n))
inline double lower_gamma_series(double a, double x) {
    if (x == 0.0) return 0.0;
    double term = 1.0 / a;
    double sum  = term;
    for (int n = 1; n < 600; ++n) {
        term *= x / (a + n);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum * std::exp(a * std::log(x) - x);
}

// Modified Lentz continued fraction for the upper incomplete gamma,
// accurate for x >= a+1.
inline double upper_gamma_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 600; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(a * std::log(x) - x);
}

} // namespace detail

/// Lower incomplete gamma gamma(a,x) = int_0^x t^{a-1} e^{-t} dt, not normalized.
/// Series for x < a+1, continued fraction for x >= a+1.
inline double lower_incomplete_gamma(double a, double x) {
    if (!(a > 0.0))
        throw std::domain_error("lower_incomplete_gamma: a must be > 0");
    if (!(x >= 0.0))
        throw std::domain_error("lower_incomplete_gamma: x must be >= 0");
    if (x < a + 1.0) return detail::lower_gamma_series(a, x);
    return gamma_fn(a) - detail::upper_gamma_cf(a, x);
}

/// Upper incomplete gamma Gamma(a,x) = int_x^inf t^{a-1} e^{-t} dt.
inline double upper_incomplete_gamma(double a, double x) {
    if (!(a > 0.0))
        throw std::domain_error("upper_incomplete_gamma: a must be > 0");
    if (!(x >= 0.0))
        throw std::domain_error("upper_incomplete_gamma: x must be >= 0");
    if (x < a + 1.0) return gamma_fn(a) - detail::lower_gamma_series(a, x);
    return detail::upper_gamma_cf(a, x);
}

/// Exact integral of the kernel over [t0, t1]:
///   int_{t0}^{t1} tau^{-beta} e^{-delta tau} dtau
///     = delta^{beta-1} [gamma(1-beta, delta t1) - gamma(1-beta, delta t0)].
/// t1 may be +infinity.  delta == 0 uses the pure power-law closed form and
/// then requires a finite t1.
inline double kernel_primitive(const KernelParams& p, double t0, double t1) {
    if (!(t0 >= 0.0))
        throw std::invalid_argument("kernel_primitive: t0 must be >= 0");
    if (!(t1 >= t0))
        throw std::invalid_argument("kernel_primitive: interval must satisfy t0 <= t1");
    if (t0 == t1) return 0.0;

    const double a = 1.0 - p.beta;
    if (p.delta == 0.0) {
        if (std::isinf(t1))
            throw std::invalid_argument("kernel_primitive: integral diverges for delta = 0, t1 = inf");
        if (p.beta == 0.0) return t1 - t0;
        return (std::pow(t1, a) - std::pow(t0, a)) / a;
    }

    const double scale = std::pow(p.delta, p.beta - 1.0);
    const double x0 = p.delta * t0;
    if (std::isinf(t1)) return scale * upper_incomplete_gamma(a, x0);
    const double x1 = p.delta * t1;
    // Same-branch differences keep small far-tail weights positive.
    if (x0 >= a + 1.0)
        return scale * (detail::upper_gamma_cf(a, x0) - detail::upper_gamma_cf(a, x1));
    return scale * (lower_incomplete_gamma(a, x1) - lower_incomplete_gamma(a, x0));
}

/// Tail mass of the scaled kernel,
///   T(t) = (rho / delta^{1-beta}) int_{delta t}^inf s^{-beta} e^{-s} ds
///        = rho int_t^inf tau^{-beta} e^{-delta tau} dtau.
/// T(0) is the steady-state memory coefficient rho Gamma(1-beta)/delta^{1-beta}.
inline double kernel_tail(const KernelParams& p, double t) {
    if (!(t >= 0.0))
        throw std::invalid_argument("kernel_tail: t must be >= 0");
    if (!(p.delta > 0.0))
        throw std::invalid_argument("kernel_tail: delta must be > 0");
    return p.rho * kernel_primitive(p, t, std::numeric_limits<double>::infinity());
}

} // namespace vmemflow
