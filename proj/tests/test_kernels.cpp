#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pamfk/kernels.hpp"
#include "pamfk/quadrature.hpp"

using namespace pamfk;

namespace {
const std::vector<double> kOrigin1{0.0};
}

TEST_CASE("heat kernel point values")
{
    CHECK(heat_kernel(1.0, kOrigin1) == doctest::Approx(0.39894228040143268).epsilon(1e-12));
    const std::vector<double> origin2{0.0, 0.0};
    CHECK(heat_kernel(0.5, origin2) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    const std::vector<double> x{2.0};
    CHECK(heat_kernel(2.0, x) == doctest::Approx(0.10377687435514868).epsilon(1e-12));
}

TEST_CASE("heat kernel symmetry and domain")
{
    const std::vector<double> a{0.7, -1.3};
    const std::vector<double> b{-0.7, 1.3};
    CHECK(heat_kernel(0.3, a) == heat_kernel(0.3, b));
    CHECK_THROWS_AS(heat_kernel(0.0, kOrigin1), std::invalid_argument);
    CHECK_THROWS_AS(heat_kernel(-1.0, kOrigin1), std::invalid_argument);
    CHECK(std::exp(log_heat_kernel(0.7, a)) == doctest::Approx(heat_kernel(0.7, a)).epsilon(1e-13));
}

TEST_CASE("heat kernel integrates to one")
{
    // d = 1
    auto f1 = [](double y) {
        const std::vector<double> p{y};
        return heat_kernel(0.7, p);
    };
    CHECK(adaptive_simpson(f1, -12.0, 12.0, 1e-10) == doctest::Approx(1.0).epsilon(1e-8));
    // d = 2 via tensor quadrature
    auto f2 = [](double y1) {
        return adaptive_simpson(
            [y1](double y2) {
                const std::vector<double> p{y1, y2};
                return heat_kernel(0.4, p);
            },
            -9.0, 9.0, 1e-11);
    };
    CHECK(adaptive_simpson(f2, -9.0, 9.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("chapman-kolmogorov in d=1")
{
    const double s = 0.4, t = 0.9;
    const double xz = 0.8;  // x - z
    auto f = [&](double y) {
        const std::vector<double> a{xz - y}, b{y};
        return heat_kernel(s, a) * heat_kernel(t, b);
    };
    const std::vector<double> d{xz};
    CHECK(adaptive_simpson(f, -15.0, 15.0, 1e-11) ==
          doctest::Approx(heat_kernel(s + t, d)).epsilon(1e-8));
}

TEST_CASE("heat_convolve on atoms is exact and linear")
{
    const auto dirac = SignedMeasure::dirac({0.0});
    CHECK(heat_convolve(dirac, 1.0, kOrigin1) ==
          doctest::Approx(0.39894228040143268).epsilon(1e-13));

    const double a = 0.9;
    const auto pair = SignedMeasure::from_atoms(
        1, {Atom{{a}, 1.0}, Atom{{-a}, 1.0}});
    const std::vector<double> x{0.3};
    const std::vector<double> dxa{x[0] - a}, dxb{x[0] + a};
    CHECK(heat_convolve(pair, 0.6, x) ==
          doctest::Approx(heat_kernel(0.6, dxa) + heat_kernel(0.6, dxb)).epsilon(1e-13));

    // signed weights stay linear
    const auto signed_pair = SignedMeasure::from_atoms(1, {Atom{{a}, 2.0}, Atom{{-a}, -1.0}});
    CHECK(heat_convolve(signed_pair, 0.6, x) ==
          doctest::Approx(2.0 * heat_kernel(0.6, dxa) - heat_kernel(0.6, dxb)).epsilon(1e-13));
}

TEST_CASE("heat_convolve of the flat density is one")
{
    const auto one = SignedMeasure::lebesgue(1);
    for (double t : {0.1, 1.0, 3.0}) {
        for (double x : {0.0, -1.7, 2.4}) {
            const std::vector<double> p{x};
            CHECK(heat_convolve(one, t, p) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    const auto one2 = SignedMeasure::lebesgue(2);
    const std::vector<double> p2{0.4, -0.2};
    CHECK(heat_convolve(one2, 0.5, p2) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("admissibility of atoms")
{
    const auto dirac = SignedMeasure::dirac({0.0});
    const auto res = admissibility_check(dirac, 1.0);
    CHECK(res.admissible);
    CHECK(res.value == doctest::Approx(1.0));

    const auto shifted = SignedMeasure::dirac({2.0}, -3.0);
    const auto res2 = admissibility_check(shifted, 0.5);
    CHECK(res2.admissible);
    CHECK(res2.value == doctest::Approx(3.0 * std::exp(-0.5 * 4.0)).epsilon(1e-12));
}

TEST_CASE("admissibility of exp(|x|) density at c = 0.1")
{
    const auto u0 = SignedMeasure::from_density(
        1, [](std::span<const double> x) { return std::exp(std::abs(x[0])); },
        GrowthCertificate{1.0, 1.0, 1.0});
    const auto res = admissibility_check(u0, 0.1);
    CHECK(res.admissible);
    // oracle: adaptive quadrature of exp(-0.1 x^2 + |x|), frozen
    // (2 e^{2.5} sqrt(pi/0.1) (1+erf(sqrt(2.5)))/2 = 134.83475811409734)
    auto oracle_f = [](double x) { return std::exp(-0.1 * x * x + std::abs(x)); };
    const double oracle = adaptive_simpson(oracle_f, -60.0, 60.0, 1e-9);
    CHECK(oracle == doctest::Approx(134.83475811409734).epsilon(1e-9));
    CHECK(res.value == doctest::Approx(134.83475811409734).epsilon(1e-7));
}

TEST_CASE("gaussian-growth density fails for small c")
{
    const auto u0 = SignedMeasure::from_density(
        1, [](std::span<const double> x) { return std::exp(x[0] * x[0]); },
        GrowthCertificate{1.0, 1.0, 2.0});
    CHECK_FALSE(admissibility_check(u0, 0.5).admissible);
    CHECK_FALSE(admissibility_check(u0, 1.0).admissible);
    const auto res = admissibility_check(u0, 1.5);
    CHECK(res.admissible);
    // integral exp(-0.5 x^2) dx = sqrt(2 pi)
    CHECK(res.value == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-7));
}

TEST_CASE("density without certificate is rejected with an explanation")
{
    const auto u0 = SignedMeasure::from_density(
        1, [](std::span<const double>) { return 1.0; }, std::nullopt);
    const auto res = admissibility_check(u0, 1.0);
    CHECK_FALSE(res.admissible);
    CHECK(res.reason.find("certificate") != std::string::npos);
    CHECK_THROWS_AS(heat_convolve(u0, 1.0, kOrigin1), std::invalid_argument);
}

TEST_CASE("heat_convolve atoms plus density")
{
    // u0 = delta_0 + (density 1): convolution = p_t(x) + 1
    const auto mixed = SignedMeasure(
        1, {Atom{{0.0}, 1.0}}, [](std::span<const double>) { return 1.0; },
        GrowthCertificate::bounded(1.0));
    const std::vector<double> x{0.5};
    CHECK(heat_convolve(mixed, 0.8, x) ==
          doctest::Approx(heat_kernel(0.8, x) + 1.0).epsilon(1e-9));
}
