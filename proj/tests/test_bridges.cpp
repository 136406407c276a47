#include <doctest.h>

#include <cmath>
#include <vector>

#include "pamfk/bridges.hpp"
#include "pamfk/stats.hpp"
#include "support.hpp"

using namespace pamfk;

TEST_CASE("pin schedule validation")
{
    CHECK_NOTHROW(PinSchedule(1, 1.0, {0.0}, {Pin{0.5, {1.0}}, Pin{1.0, {0.0}}}));
    // coincident or decreasing pin times are rejected
    CHECK_THROWS_AS(PinSchedule(1, 1.0, {0.0}, {Pin{0.5, {1.0}}, Pin{0.5, {0.0}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PinSchedule(1, 1.0, {0.0}, {Pin{0.7, {1.0}}, Pin{0.4, {0.0}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PinSchedule(1, 1.0, {0.0}, {Pin{1.2, {1.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(PinSchedule(1, 1.0, {0.0}, {Pin{0.0, {1.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(PinSchedule(2, 1.0, {0.0}, {}), std::invalid_argument);  // start dim
}

TEST_CASE("bridge mean interpolates the pins")
{
    const PinSchedule single(1, 1.0, {0.0}, {Pin{1.0, {2.0}}});
    CHECK(single.bridge_mean(0.25)[0] == doctest::Approx(0.5));
    CHECK(single.bridge_mean(0.0)[0] == 0.0);
    CHECK(single.bridge_mean(1.0)[0] == 2.0);

    const PinSchedule multi(2, 2.0, {1.0, -1.0},
                            {Pin{0.5, {2.0, 0.0}}, Pin{1.5, {-2.0, 4.0}}});
    CHECK(multi.bridge_mean(0.5) == Point{2.0, 0.0});
    CHECK(multi.bridge_mean(1.5) == Point{-2.0, 4.0});
    // segment midpoint is the endpoint average
    CHECK(multi.bridge_mean(1.0)[0] == doctest::Approx(0.0));
    CHECK(multi.bridge_mean(1.0)[1] == doctest::Approx(2.0));
    // constant after the last pin (free tail)
    CHECK(multi.bridge_mean(1.9) == Point{-2.0, 4.0});
    CHECK_THROWS_AS(multi.bridge_mean(2.1), std::invalid_argument);
}

TEST_CASE("sampled paths hit the pins bit-exactly")
{
    const PinSchedule schedule(2, 1.0, {0.25, -0.5},
                               {Pin{0.3, {1.5, 2.5}}, Pin{0.8, {-1.0, 0.0}}, Pin{1.0, {0.5, 0.5}}});
    NormalStream stream(StreamKey{9, 0, 0});
    const SampledPath path = sample_pinned_path(schedule, 16, stream);
    REQUIRE(path.times.size() == 3 * 16 + 1);
    CHECK(path.at(0)[0] == 0.25);
    CHECK(path.at(0)[1] == -0.5);
    CHECK(path.at(16)[0] == 1.5);
    CHECK(path.at(16)[1] == 2.5);
    CHECK(path.at(32)[0] == -1.0);
    CHECK(path.at(32)[1] == 0.0);
    CHECK(path.at(48)[0] == 0.5);
    CHECK(path.at(48)[1] == 0.5);
}

TEST_CASE("sampling is deterministic in the stream key")
{
    const PinSchedule schedule(1, 1.0, {0.0}, {Pin{1.0, {0.0}}});
    NormalStream s1(StreamKey{7, 123, 2});
    NormalStream s2(StreamKey{7, 123, 2});
    const SampledPath a = sample_pinned_path(schedule, 64, s1);
    const SampledPath b = sample_pinned_path(schedule, 64, s2);
    CHECK(a.values == b.values);

    NormalStream s3(StreamKey{7, 124, 2});
    const SampledPath c = sample_pinned_path(schedule, 64, s3);
    CHECK(a.values != c.values);
}

TEST_CASE("unit bridge midpoint variance is 1/4")
{
    const PinSchedule schedule(1, 1.0, {0.0}, {Pin{1.0, {0.0}}});
    const int n = 100000;
    Welford mid;
    for (int i = 0; i < n; ++i) {
        NormalStream stream(StreamKey{11, static_cast<std::uint64_t>(i), 0});
        const SampledPath p = sample_pinned_path(schedule, 8, stream);
        mid.add(p.at(4)[0]);  // s = 1/2
    }
    CHECK(std::abs(mid.mean()) < 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
    const double se_var = 0.25 * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(mid.variance() - 0.25) < 3.0 * se_var);
}

TEST_CASE("empirical mean matches bridge_mean off the pins")
{
    const PinSchedule schedule(1, 1.0, {0.4}, {Pin{0.5, {-1.0}}, Pin{1.0, {2.0}}});
    const int n = 100000;
    const int steps = 8;
    Welford w;  // value at s = 0.3125 (grid index 5 of the first segment)
    for (int i = 0; i < n; ++i) {
        NormalStream stream(StreamKey{12, static_cast<std::uint64_t>(i), 0});
        const SampledPath p = sample_pinned_path(schedule, steps, stream);
        w.add(p.at(5)[0]);
    }
    const double s = 0.3125;
    const double expected = schedule.bridge_mean(s)[0];
    const double se = std::sqrt(w.variance() / n);
    CHECK(std::abs(w.mean() - expected) < 3.0 * se);
}

TEST_CASE("zero-pinned segment covariance passes a whitened chi-square gate")
{
    // Brownian bridge on [0,1] from 0 to 0; interior grid times s_i = i/8.
    const PinSchedule schedule(1, 1.0, {0.0}, {Pin{1.0, {0.0}}});
    const int steps = 8;
    const std::size_t m = steps - 1;
    std::vector<double> cov(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            cov[i * m + j] = testsupport::bridge_cov(0.0, 1.0, (i + 1) / 8.0, (j + 1) / 8.0);
    testsupport::cholesky(cov, m);

    const int n = 100000;
    double stat = 0.0;
    std::vector<double> y(m);
    std::vector<double> colsum(m, 0.0);
    for (int i = 0; i < n; ++i) {
        NormalStream stream(StreamKey{13, static_cast<std::uint64_t>(i), 0});
        const SampledPath p = sample_pinned_path(schedule, steps, stream);
        for (std::size_t j = 0; j < m; ++j) y[j] = p.at(j + 1)[0];
        testsupport::forward_solve(cov, m, y);
        for (std::size_t j = 0; j < m; ++j) {
            stat += y[j] * y[j];
            colsum[j] += y[j];
        }
    }
    const double dof = static_cast<double>(n) * m;
    CHECK(stat > chi_square_quantile(dof, -kZ995));
    CHECK(stat < chi_square_quantile(dof, kZ995));

    // whitened means are iid N(0, 1/n): their squared sum is chi-square_m
    double mean_stat = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean_stat += colsum[j] * colsum[j] / n;
    CHECK(mean_stat < chi_square_quantile(static_cast<double>(m), kZ995));
}

TEST_CASE("disjoint segments are uncorrelated")
{
    const PinSchedule schedule(1, 1.0, {0.0}, {Pin{0.5, {0.0}}, Pin{1.0, {0.0}}});
    const int n = 100000;
    double sum_xy = 0.0, sum_x = 0.0, sum_y = 0.0, sum_x2 = 0.0, sum_y2 = 0.0;
    for (int i = 0; i < n; ++i) {
        NormalStream stream(StreamKey{14, static_cast<std::uint64_t>(i), 0});
        const SampledPath p = sample_pinned_path(schedule, 4, stream);
        const double x = p.at(2)[0];  // s = 0.25
        const double y = p.at(6)[0];  // s = 0.75
        sum_xy += x * y;
        sum_x += x;
        sum_y += y;
        sum_x2 += x * x;
        sum_y2 += y * y;
    }
    const double cov = sum_xy / n - (sum_x / n) * (sum_y / n);
    const double corr = cov / std::sqrt((sum_x2 / n) * (sum_y2 / n));
    CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("free tail after the last pin is Brownian")
{
    // pin at 0.5, free on (0.5, 1]: Var(X_1 - X_0.5) = 0.5
    const PinSchedule schedule(1, 1.0, {0.0}, {Pin{0.5, {1.0}}});
    const int n = 50000;
    Welford inc;
    for (int i = 0; i < n; ++i) {
        NormalStream stream(StreamKey{15, static_cast<std::uint64_t>(i), 0});
        const SampledPath p = sample_pinned_path(schedule, 4, stream);
        inc.add(p.at(8)[0] - 1.0);
    }
    CHECK(std::abs(inc.mean()) < 3.0 * std::sqrt(0.5 / n));
    CHECK(std::abs(inc.variance() - 0.5) < 3.0 * 0.5 * std::sqrt(2.0 / (n - 1.0)));
}

TEST_CASE("grid construction")
{
    const PinSchedule schedule(1, 1.0, {0.0}, {Pin{0.25, {0.0}}, Pin{1.0, {0.0}}});
    const auto grid = make_grid(schedule, 4);
    REQUIRE(grid.size() == 9);
    CHECK(grid[0] == 0.0);
    CHECK(grid[4] == 0.25);
    CHECK(grid[8] == 1.0);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}
