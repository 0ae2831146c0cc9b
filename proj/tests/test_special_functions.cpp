#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "support/oracles.hpp"
#include "vmemflow/special_functions.hpp"

using namespace vmemflow;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrtPi = 1.7724538509055160273;
}

TEST_CASE("gamma function values") {
    CHECK(gamma_fn(1.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_fn(0.5) == Catch::Approx(kSqrtPi).epsilon(1e-13));
    // recurrence oracle: Gamma(2.5) = 1.5 * 0.5 * Gamma(0.5)
    CHECK(gamma_fn(2.5) == Catch::Approx(1.3293403881791370).epsilon(1e-13));
    CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_fn(-1.5), std::domain_error);
}

TEST_CASE("gamma recurrence property") {
    for (int i = 0; i <= 200; ++i) {
        const double z = 0.05 + (10.0 - 0.05) * i / 200.0;
        CHECK(gamma_fn(z + 1.0) == Catch::Approx(z * gamma_fn(z)).epsilon(1e-13));
    }
}

TEST_CASE("lower incomplete gamma basics") {
    CHECK(lower_incomplete_gamma(1.0, 1.0) ==
          Catch::Approx(0.6321205588285577).epsilon(1e-14));
    // series-summation oracle value: gamma(1/2, 1) = sqrt(pi) erf(1)
    CHECK(lower_incomplete_gamma(0.5, 1.0) ==
          Catch::Approx(1.4936482656248540).epsilon(1e-13));
    CHECK(lower_incomplete_gamma(0.5, 0.0) == 0.0);
    CHECK_THROWS_AS(lower_incomplete_gamma(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(lower_incomplete_gamma(-0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(lower_incomplete_gamma(0.5, -1.0), std::domain_error);
}

TEST_CASE("lower incomplete gamma against erf identity") {
    // gamma(1/2, x) = sqrt(pi) erf(sqrt(x)), an independent route
    for (int i = 0; i <= 60; ++i) {
        const double x = std::exp(std::log(1e-6) + (std::log(50.0) - std::log(1e-6)) * i / 60.0);
        CHECK(lower_incomplete_gamma(0.5, x) ==
              Catch::Approx(kSqrtPi * std::erf(std::sqrt(x))).epsilon(1e-12));
    }
}

TEST_CASE("lower incomplete gamma monotone and bounded") {
    for (int ai = 1; ai <= 9; ++ai) {
        const double a = 0.1 * ai;
        const double ga = gamma_fn(a);
        double prev = 0.0;
        for (int i = 0; i <= 80; ++i) {
            const double x =
                std::exp(std::log(1e-6) + (std::log(50.0) - std::log(1e-6)) * i / 80.0);
            const double g = lower_incomplete_gamma(a, x);
            CHECK(g >= prev);
            CHECK(g <= ga * (1.0 + 1e-13));
            prev = g;
        }
        CHECK(lower_incomplete_gamma(a, 60.0) == Catch::Approx(ga).epsilon(1e-12));
    }
}

TEST_CASE("upper incomplete gamma complements the lower") {
    for (double a : {0.1, 0.5, 0.9, 1.5, 2.5}) {
        for (double x : {0.0, 0.2, 1.0, 3.0, 10.0, 40.0}) {
            const double sum = lower_incomplete_gamma(a, x) + upper_incomplete_gamma(a, x);
            CHECK(sum == Catch::Approx(gamma_fn(a)).epsilon(1e-13));
        }
    }
}

TEST_CASE("kernel primitive examples") {
    CHECK(kernel_primitive(KernelParams::validated(0.0, 1.0, 1.0), 0.0, 1.0) ==
          Catch::Approx(0.6321205588285577).epsilon(1e-14));
    // pure power branch (delta = 0): int_0^0.1 tau^{-1/2} = 2 sqrt(0.1)
    CHECK(kernel_primitive(KernelParams::validated(0.5, 0.0, 1.0), 0.0, 0.1) ==
          Catch::Approx(0.6324555320336759).epsilon(1e-14));
    // identity: full integral equals Gamma(1-beta)/delta^{1-beta}
    CHECK(kernel_primitive(KernelParams::validated(0.5, 1.0, 1.0), 0.0, kInf) ==
          Catch::Approx(kSqrtPi).epsilon(1e-13));
    CHECK_THROWS_AS(kernel_primitive(KernelParams::validated(0.5, 1.0, 1.0), 2.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(kernel_primitive(KernelParams::validated(0.5, 0.0, 1.0), 0.0, kInf),
                    std::invalid_argument);
}

TEST_CASE("kernel primitive additivity") {
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double beta : {0.0, 0.25, 0.5, 0.9}) {
        for (double delta : {0.5, 1.0, 4.0}) {
            const auto p = KernelParams::validated(beta, delta, 1.0);
            for (int rep = 0; rep < 50; ++rep) {
                double t0 = 3.0 * uni(eng), t1 = 3.0 * uni(eng), t2 = 3.0 * uni(eng);
                if (t0 > t1) std::swap(t0, t1);
                if (t1 > t2) std::swap(t1, t2);
                if (t0 > t1) std::swap(t0, t1);
                const double whole = kernel_primitive(p, t0, t2);
                const double split = kernel_primitive(p, t0, t1) + kernel_primitive(p, t1, t2);
                CHECK(std::fabs(whole - split) <= 1e-13 * whole + 1e-300);
            }
        }
    }
}

TEST_CASE("scaling identity ties the primitive to the gamma function") {
    for (double beta : {0.0, 0.25, 0.5, 0.75, 0.9}) {
        for (double delta : {0.5, 1.0, 4.0}) {
            const auto p = KernelParams::validated(beta, delta, 1.0);
            const double full = kernel_primitive(p, 0.0, kInf);
            CHECK(full * std::pow(delta, 1.0 - beta) ==
                  Catch::Approx(gamma_fn(1.0 - beta)).epsilon(1e-12));
        }
    }
}

TEST_CASE("kernel primitive against quadrature oracle") {
    const auto p = KernelParams::validated(0.5, 1.0, 1.0);
    const double ref =
        oracles::integrate([](double t) { return std::exp(-t) / std::sqrt(t); }, 0.3, 0.4);
    CHECK(kernel_primitive(p, 0.3, 0.4) == Catch::Approx(ref).epsilon(1e-12));
}

TEST_CASE("kernel tail value and moment") {
    // beta=0: pure exponential tail
    CHECK(kernel_tail(KernelParams::validated(0.0, 1.0, 1.0), 2.0) ==
          Catch::Approx(std::exp(-2.0)).epsilon(1e-13));
    // t=0 gives the kernel moment scaled by rho
    for (double beta : {0.0, 0.3, 0.5, 0.9}) {
        for (double delta : {0.5, 1.0, 4.0}) {
            const auto p = KernelParams::validated(beta, delta, 0.7);
            CHECK(kernel_tail(p, 0.0) ==
                  Catch::Approx(0.7 * gamma_fn(1.0 - beta) * std::pow(delta, beta - 1.0))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("kernel tail against adaptive quadrature oracle") {
    const auto p = KernelParams::validated(0.5, 4.0, 1.0);
    // T(1) = (1/4^{1/2}) int_4^inf s^{-1/2} e^{-s} ds
    const double ref = 0.5 * oracles::integrate_to_infinity(
                                 [](double s) { return std::exp(-s) / std::sqrt(s); }, 4.0);
    const double val = kernel_tail(p, 1.0);
    CHECK(val == Catch::Approx(ref).epsilon(1e-11));
    CHECK(val == Catch::Approx(0.0041455346903363337).epsilon(1e-12));
    // bound with c1 = rho 2^{1-beta} Gamma(1-beta) / delta^{1-beta}
    const double c1 = std::pow(2.0, 0.5) * gamma_fn(0.5) / std::pow(4.0, 0.5);
    CHECK(val <= c1 * std::exp(-2.0));
}

TEST_CASE("kernel tail decreasing and exponentially bounded") {
    for (double beta : {0.0, 0.25, 0.5, 0.75, 0.9}) {
        for (double delta : {0.5, 1.0, 4.0}) {
            const auto p  = KernelParams::validated(beta, delta, 1.3);
            const double c1 =
                1.3 * std::pow(2.0, 1.0 - beta) * gamma_fn(1.0 - beta) * std::pow(delta, beta - 1.0);
            double prev = kernel_tail(p, 0.0);
            for (int i = 1; i <= 200; ++i) {
                const double t = 40.0 / delta * i / 200.0;
                const double v = kernel_tail(p, t);
                CHECK(v < prev);
                CHECK(v <= c1 * std::exp(-0.5 * delta * t) * (1.0 + 1e-12));
                prev = v;
            }
        }
    }
}
