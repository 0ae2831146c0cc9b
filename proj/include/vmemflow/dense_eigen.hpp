#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vmemflow {

/// Eigenvalues (and optionally eigenvectors) of a dense symmetric matrix by
/// cyclic Jacobi rotations.  Intended for small/desk-scale matrices (n <= a few
/// hundred).  `a` is row-major n*n and is destroyed.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n,
                                              std::vector<double>* eigenvectors = nullptr) {
    if (a.size() != n * n) throw std::invalid_argument("jacobi_eigenvalues: bad matrix size");
    std::vector<double> v;
    if (eigenvectors) {
        v.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-300) break;
        double diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) diag += at(i, i) * at(i, i);
        if (off <= 1e-30 * (diag + off)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t     = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
                if (eigenvectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v[k * n + p], vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i);
    if (eigenvectors) *eigenvectors = std::move(v);
    return ev;
}

} // namespace vmemflow
