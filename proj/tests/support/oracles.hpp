#pragma once

// Test-side oracles, independent of the library code paths they check:
// adaptive Gauss-Kronrod quadrature and small helpers.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace oracles {

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
inline constexpr double kron_x[8] = {
    0.0,
    0.2077849550078984676006894037732449,
    0.4058451513773971669066064120769615,
    0.5860872354676911302941448382587296,
    0.7415311855993944398638647732807884,
    0.8648644233597690727897127886409262,
    0.9491079123427585245261896840478513,
    0.9914553711208126392068546975263285};
inline constexpr double kron_w[8] = {
    0.2094821410847278280129991748917143,
    0.2044329400752988924141619992346491,
    0.1903505780647854099132564024210137,
    0.1690047266392679028265834265985503,
    0.1406532597155259187451895905102379,
    0.1047900103222501838398763225415180,
    0.0630920926299785532907006631892043,
    0.0229353220105292249637320080589695};
inline constexpr double gauss_w[4] = {
    0.4179591836734693877551020408163265,
    0.3818300505051189449503697754889751,
    0.2797053914892766679014677714237796,
    0.1294849661688696932706114326790820};

struct GK {
    double value;
    double err;
};

inline GK gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double f0 = f(c);
    double kron = kron_w[0] * f0;
    double gauss = gauss_w[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double x  = h * kron_x[i];
        const double fp = f(c + x), fm = f(c - x);
        kron += kron_w[i] * (fp + fm);
        if (i % 2 == 0) gauss += gauss_w[i / 2] * (fp + fm);
    }
    kron *= h;
    gauss *= h;
    return {kron, std::fabs(kron - gauss)};
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                       int depth) {
    const GK r = gk15(f, a, b);
    if (r.err <= tol || depth > 52) return r.value;
    const double c = 0.5 * (a + b);
    return adaptive(f, a, c, tol * 0.5, depth + 1) + adaptive(f, c, b, tol * 0.5, depth + 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod quadrature over a finite interval.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
    if (!(b >= a)) throw std::invalid_argument("integrate: bad interval");
    if (a == b) return 0.0;
    const double rough = std::fabs(detail::gk15(f, a, b).value) + 1e-300;
    return detail::adaptive(f, a, b, tol * rough, 0);
}

/// Integral over [a, infinity) via the substitution s = a + u/(1-u).
inline double integrate_to_infinity(const std::function<double(double)>& f, double a,
                                    double tol = 1e-13) {
    auto g = [&](double u) {
        const double om = 1.0 - u;
        const double s  = a + u / om;
        return f(s) / (om * om);
    };
    return integrate(g, 0.0, 1.0 - 1e-9, tol) ;
}

} // namespace oracles
