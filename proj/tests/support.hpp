#pragma once

// Test-only numeric helpers, kept independent of the library internals so
// they can serve as oracles for it.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace testsupport {

// In-place dense Cholesky (lower factor) of a positive-definite matrix.
inline void cholesky(std::vector<double>& a, std::size_t n)
{
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t p = 0; p < j; ++p) diag -= a[j * n + p] * a[j * n + p];
        if (diag <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        diag = std::sqrt(diag);
        a[j * n + j] = diag;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t p = 0; p < j; ++p) v -= a[i * n + p] * a[j * n + p];
            a[i * n + j] = v / diag;
        }
        for (std::size_t i = 0; i < j; ++i) a[i * n + j] = 0.0;
    }
}

// Solves L y = b for lower-triangular L.
inline void forward_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& b)
{
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t p = 0; p < i; ++p) v -= l[i * n + p] * b[p];
        b[i] = v / l[i * n + i];
    }
}

// y = L x (lower-triangular multiply), for sampling with a given covariance.
inline void lower_multiply(const std::vector<double>& l, std::size_t n,
                           const std::vector<double>& x, std::vector<double>& y)
{
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t p = 0; p <= i; ++p) v += l[i * n + p] * x[p];
        y[i] = v;
    }
}

// Brownian-bridge covariance on a segment [a, b] at interior times s, s':
// (min - a)(b - max) / (b - a).
inline double bridge_cov(double a, double b, double s, double sp)
{
    const double lo = std::min(s, sp);
    const double hi = std::max(s, sp);
    return (lo - a) * (b - hi) / (b - a);
}

// Time a piecewise-linear path (times, values) spends with |value| <= h.
inline double occupation_time_in_band(const std::vector<double>& times,
                                      const std::vector<double>& values, double h)
{
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double dt = times[i + 1] - times[i];
        const double a = values[i];
        const double b = values[i + 1];
        if (a == b) {
            if (std::abs(a) <= h) total += dt;
            continue;
        }
        double u1 = (-h - a) / (b - a);
        double u2 = (h - a) / (b - a);
        if (u1 > u2) std::swap(u1, u2);
        const double lo = std::max(0.0, u1);
        const double hi = std::min(1.0, u2);
        if (hi > lo) total += (hi - lo) * dt;
    }
    return total;
}

} // namespace testsupport
