#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pamfk/stats.hpp"

using namespace pamfk;

TEST_CASE("kahan summation compensates")
{
    KahanSum sum;
    sum.add(1e16);
    for (int i = 0; i < 10000; ++i) sum.add(1.0);
    sum.add(-1e16);
    CHECK(sum.value() == doctest::Approx(10000.0).epsilon(1e-12));
}

TEST_CASE("log-domain accumulator matches direct formulas")
{
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    std::vector<double> values;
    LogMeanAccumulator acc;
    for (int i = 0; i < 500; ++i) {
        const double v = (i % 7 == 0 ? -1.0 : 1.0) * std::exp(u(gen));
        values.push_back(v);
        acc.add(v > 0 ? 1.0 : -1.0, std::log(std::abs(v)));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0, sum_abs = 0.0, sum_sq = 0.0;
    for (double v : values) {
        var += (v - mean) * (v - mean);
        sum_abs += std::abs(v);
        sum_sq += v * v;
    }
    var /= values.size() - 1;
    CHECK(acc.mean() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(acc.standard_error() ==
          doctest::Approx(std::sqrt(var / values.size())).epsilon(1e-10));
    CHECK(acc.effective_sample_size() ==
          doctest::Approx(sum_abs * sum_abs / sum_sq).epsilon(1e-10));
}

TEST_CASE("log-domain accumulator survives huge shifts")
{
    LogMeanAccumulator acc;
    acc.add(1.0, 1000.0);
    acc.add(1.0, 1002.0);
    acc.add(1.0, 998.0);
    // mean = e^1000 (1 + e^2 + e^-2)/3: log mean = 1000 + log(...)
    const double expected_log = 1000.0 + std::log((1.0 + std::exp(2.0) + std::exp(-2.0)) / 3.0);
    CHECK(acc.log_abs_sum() - std::log(3.0) == doctest::Approx(expected_log).epsilon(1e-12));
    CHECK(std::isinf(acc.mean()));  // overflows double; callers must treat as error
}

TEST_CASE("zero-weight samples are counted but do not pollute")
{
    LogMeanAccumulator acc;
    acc.add(1.0, 0.0);
    acc.add(0.0, -std::numeric_limits<double>::infinity());
    acc.add(1.0, 0.0);
    CHECK(acc.count() == 3);
    CHECK(acc.zero_count() == 1);
    CHECK(acc.mean() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("welford merge equals sequential")
{
    std::mt19937 gen(2);
    std::normal_distribution<double> n(1.0, 3.0);
    Welford all, left, right;
    for (int i = 0; i < 1000; ++i) {
        const double v = n(gen);
        all.add(v);
        (i < 400 ? left : right).add(v);
    }
    left.merge(right);
    CHECK(left.count() == all.count());
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
    CHECK(left.max() == all.max());
}

TEST_CASE("chi-square quantile approximation")
{
    // reference quantiles (R: qchisq(0.995, 100) etc.)
    CHECK(chi_square_quantile(100, kZ995) == doctest::Approx(140.169).epsilon(0.005));
    CHECK(chi_square_quantile(100, -kZ995) == doctest::Approx(67.328).epsilon(0.005));
}

TEST_CASE("log_add_exp")
{
    CHECK(log_add_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)));
    CHECK(log_add_exp(-std::numeric_limits<double>::infinity(), 1.5) == 1.5);
    CHECK(log_add_exp(1000.0, 1001.0) == doctest::Approx(1001.0 + std::log(1.0 + std::exp(-1.0))));
}
