#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pamfk/covariance.hpp"
#include "pamfk/kernels.hpp"

using namespace pamfk;

TEST_CASE("white noise mollification is the heat kernel")
{
    const auto wn = CovarianceModel::create(CovarianceSpec::white_noise(1));
    const std::vector<double> origin{0.0};
    CHECK(wn.covariance_at(0.5, origin) == doctest::Approx(0.39894228040143268).epsilon(1e-12));
    for (double eps : {0.05, 0.2, 1.0})
        for (double x : {-1.5, -0.3, 0.0, 0.4, 2.0}) {
            const std::vector<double> p{x};
            CHECK(wn.covariance_at(eps, p) ==
                  doctest::Approx(heat_kernel(2.0 * eps, p)).epsilon(1e-10));
        }
    CHECK_THROWS_AS(wn.covariance_at(0.0, origin), std::invalid_argument);
}

TEST_CASE("zero model vanishes")
{
    const auto zero = CovarianceModel::create(CovarianceSpec::zero(2));
    const std::vector<double> p{0.3, -0.4};
    CHECK(zero.covariance_at(0.0, p) == 0.0);
    CHECK(zero.covariance_at(1.0, p) == 0.0);
    CHECK(zero.dalang_value() == 0.0);
}

TEST_CASE("riesz mollified covariance, regression and oracle")
{
    const auto riesz = CovarianceModel::create(CovarianceSpec::riesz(1, 0.5));
    const std::vector<double> origin{0.0};
    // closed form 2^-b pi^-1/2 Gamma((1-b)/2) eps^(-b/2); frozen baseline
    CHECK(riesz.covariance_at(0.1, origin) ==
          doctest::Approx(2.5721194936944685).epsilon(1e-8));
    const std::vector<double> x{0.7};
    CHECK(riesz.covariance_at(0.1, x) == doctest::Approx(1.5731306424874957).epsilon(1e-8));
    // eps = 0: the covariance function itself
    CHECK(riesz.covariance_at(0.0, x) == doctest::Approx(std::pow(0.7, -0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(riesz.covariance_at(0.0, origin), std::invalid_argument);
}

TEST_CASE("dalang integral values and divergence verdicts")
{
    CHECK(dalang_integral(CovarianceSpec::white_noise(1)).value ==
          doctest::Approx(std::numbers::pi).epsilon(1e-12));

    const auto d2 = dalang_integral(CovarianceSpec::white_noise(2));
    CHECK_FALSE(d2.finite);
    CHECK(d2.growth_rate == doctest::Approx(0.0));  // logarithmic

    const auto d3 = dalang_integral(CovarianceSpec::white_noise(3));
    CHECK_FALSE(d3.finite);
    CHECK(d3.growth_rate == doctest::Approx(1.0));

    // adaptive-quadrature oracle value, frozen: pi e^{1/2} erfc(1/sqrt(2))
    const auto g = dalang_integral(CovarianceSpec::gaussian(1, 1.0));
    CHECK(g.finite);
    CHECK(g.value == doctest::Approx(1.6435448801240767).epsilon(1e-8));

    // riesz closed form c * 2 * (pi/2) / sin(pi b / 2)
    const auto r = dalang_integral(CovarianceSpec::riesz(1, 0.5));
    CHECK(r.finite);
    CHECK(r.value == doctest::Approx(11.136655993663416).epsilon(1e-7));

    // generic radial engine detects the d=2 logarithmic divergence
    const auto lebesgue2 = dalang_integral(CovarianceSpec::radial(2, [](double) { return 1.0; }));
    CHECK_FALSE(lebesgue2.finite);
    CHECK(std::abs(lebesgue2.growth_rate) < 0.1);
}

TEST_CASE("inadmissible models are rejected at construction")
{
    CHECK_THROWS_AS(CovarianceModel::create(CovarianceSpec::white_noise(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(CovarianceSpec::riesz(1, 1.5), std::invalid_argument);  // beta >= min(2, d)
    CHECK_THROWS_AS(CovarianceSpec::riesz(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(CovarianceSpec::gaussian(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(
        CovarianceModel::create(CovarianceSpec::radial(2, [](double) { return 1.0; })),
        std::invalid_argument);
}

TEST_CASE("radial quadrature agrees with the gaussian closed form")
{
    // mu(dxi) = exp(-sigma xi^2 / 2) dxi fed through the generic radial path
    const double sigma = 0.8;
    const auto generic = CovarianceModel::create(CovarianceSpec::radial(
        1, [sigma](double r) { return std::exp(-0.5 * sigma * r * r); }));
    const auto closed = CovarianceModel::create(CovarianceSpec::gaussian(1, sigma));
    for (double eps : {0.05, 0.3})
        for (double x : {0.0, 0.6, 1.9}) {
            const std::vector<double> p{x};
            CHECK(generic.covariance_at(eps, p) ==
                  doctest::Approx(closed.covariance_at(eps, p)).epsilon(1e-8));
        }
    CHECK(generic.dalang_value() == doctest::Approx(closed.dalang_value()).epsilon(1e-7));
}

TEST_CASE("positive definiteness and monotonicity invariants")
{
    const auto models = {
        CovarianceModel::create(CovarianceSpec::riesz(1, 0.7)),
        CovarianceModel::create(CovarianceSpec::gaussian(1, 1.0)),
        CovarianceModel::create(
            CovarianceSpec::radial(1, [](double r) { return 1.0 / (1.0 + r * r * r * r); })),
    };
    for (const auto& model : models) {
        const std::vector<double> origin{0.0};
        const double at_zero = model.covariance_at(0.2, origin);
        for (double x : {-2.0, -0.5, 0.4, 1.3, 3.1}) {
            const std::vector<double> p{x}, m{-x};
            const double v = model.covariance_at(0.2, p);
            CHECK(v == doctest::Approx(model.covariance_at(0.2, m)).epsilon(1e-9));
            CHECK(v >= -1e-10);
            CHECK(v <= at_zero * (1.0 + 1e-9));
        }
        // Lambda_eps(0) nonincreasing in eps
        double prev = model.covariance_at(0.05, origin);
        for (double eps : {0.1, 0.2, 0.5, 1.0}) {
            const double cur = model.covariance_at(eps, origin);
            CHECK(cur <= prev * (1.0 + 1e-9));
            prev = cur;
        }
    }
}

TEST_CASE("gaussian model closed form")
{
    const auto g = CovarianceModel::create(CovarianceSpec::gaussian(2, 0.7));
    const std::vector<double> p{0.3, -0.2};
    CHECK(g.covariance_at(0.15, p) == doctest::Approx(heat_kernel(0.7 + 0.3, p)).epsilon(1e-13));
    CHECK(g.covariance_at(0.0, p) == doctest::Approx(heat_kernel(0.7, p)).epsilon(1e-13));
}
