#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vmemflow {

/// Deterministic standard-normal sampler: mt19937_64 (fully specified by the
/// standard) plus an explicit Box-Muller transform, so sequences do not depend
/// on library-specific distribution internals.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

    double uniform01() {
        // 53-bit mantissa draw in [0,1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r  = std::sqrt(-2.0 * std::log(u1));
        const double a  = 6.283185307179586476925286766559 * u2;
        spare_      = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_    = 0.0;
};

} // namespace vmemflow
