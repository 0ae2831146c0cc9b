#pragma once

#include <stdexcept>

namespace vmemflow {

/// Parameters of the memory kernel K(t) = t^{-beta} e^{-delta t}, scaled by rho
/// in the flow model.  Single source of truth for every kernel quantity.
///
/// delta == 0 is accepted by the type so that the pure power-law branch can be
/// exercised in isolation; the flow model itself requires delta > 0 and the
/// operations that need it check for themselves.
struct KernelParams {
    double beta  = 0.0; ///< power-law exponent, in [0,1)
    double delta = 1.0; ///< exponential rate, 1/time
    double rho   = 0.0; ///< memory coefficient; rho = 0 disables memory

    static KernelParams validated(double beta, double delta, double rho) {
        if (!(beta >= 0.0 && beta < 1.0))
            throw std::invalid_argument("beta must lie in [0,1)");
        if (!(delta >= 0.0))
            throw std::invalid_argument("delta must be >= 0");
        if (!(rho >= 0.0))
            throw std::invalid_argument("rho must be >= 0");
        return KernelParams{beta, delta, rho};
    }

    /// Build from the physical constants: delta = 1/lambda1,
    /// rho = (mu/lambda1)(lambda1/lambda2 - 1), requiring 0 < lambda2 <= lambda1.
    static KernelParams from_physical(double beta, double mu, double lambda1, double lambda2) {
        if (!(mu > 0.0))
            throw std::invalid_argument("mu must be > 0");
        if (!(lambda2 > 0.0 && lambda2 <= lambda1))
            throw std::invalid_argument("retardation time must satisfy 0 < lambda2 <= lambda1");
        const double delta = 1.0 / lambda1;
        const double rho   = (mu / lambda1) * (lambda1 / lambda2 - 1.0);
        return validated(beta, delta, rho);
    }

    bool operator==(const KernelParams&) const = default;
};

} // namespace vmemflow
