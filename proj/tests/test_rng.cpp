#include <doctest.h>

#include <cmath>
#include <vector>

#include "pamfk/rng.hpp"

using namespace pamfk;

TEST_CASE("same key reproduces the stream exactly")
{
    NormalStream a(StreamKey{42, 7, 3});
    NormalStream b(StreamKey{42, 7, 3});
    for (int i = 0; i < 1000; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("streams differing in one key field are uncorrelated")
{
    const StreamKey base{42, 7, 3};
    const StreamKey variants[] = {{43, 7, 3}, {42, 8, 3}, {42, 7, 4}};
    const int n = 100000;
    for (const auto& other : variants) {
        NormalStream a(base);
        NormalStream b(other);
        double sum_ab = 0.0, sum_a = 0.0, sum_b = 0.0, sum_a2 = 0.0, sum_b2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = a.normal();
            const double y = b.normal();
            sum_ab += x * y;
            sum_a += x;
            sum_b += y;
            sum_a2 += x * x;
            sum_b2 += y * y;
        }
        const double cov = sum_ab / n - (sum_a / n) * (sum_b / n);
        const double corr = cov / std::sqrt((sum_a2 / n) * (sum_b2 / n));
        CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("one stream has standard-normal moments")
{
    NormalStream s(StreamKey{123, 0, 0});
    const int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));         // se of mean
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));  // se of variance
}

TEST_CASE("uniform ranges")
{
    CounterRng rng(StreamKey{5, 5, 5});
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        const double v = rng.uniform_pos();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}
