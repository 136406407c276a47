#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pamfk/types.hpp"

namespace pamfk {

struct GaussLegendreRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;  // sum to 2
};

// Cached Gauss-Legendre rule of order n (thread-safe).
const GaussLegendreRule& gauss_legendre(int n);

namespace detail {

template <class F>
double adaptive_trapezoid_rec(F& f, double a, double b, double fa, double fb,
                              double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double left = 0.25 * (b - a) * (fa + fm);
    const double right = 0.25 * (b - a) * (fm + fb);
    const double delta = left + right - whole;
    // halving the step scales trapezoid error by ~1/4
    if (depth <= 0 || std::abs(delta) <= 3.0 * tol)
        return left + right + delta / 3.0;
    return adaptive_trapezoid_rec(f, a, m, fa, fm, left, 0.5 * tol, depth - 1)
         + adaptive_trapezoid_rec(f, m, b, fm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Recursive bisection with the trapezoid rule; tol is an absolute target for
// the whole interval.
template <class F>
double adaptive_trapezoid(F&& f, double a, double b, double tol, int max_depth = 26)
{
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double whole = 0.5 * (b - a) * (fa + fb);
    return detail::adaptive_trapezoid_rec(f, a, b, fa, fb, whole, tol, max_depth);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 26)
{
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral over [a, inf) of an eventually decaying integrand. Blocks of
// doubling width are summed until several consecutive blocks fall below the
// relative tail target. Throws NumericError when no decay is observed.
template <class F>
double integrate_to_infinity(F&& f, double a, double rel_tol, double initial_width = 1.0)
{
    double total = 0.0;
    double lo = a;
    double width = initial_width;
    int quiet_blocks = 0;
    for (int iter = 0; iter < 200; ++iter) {
        const double hi = lo + width;
        // rough pass fixes the scale; refinement targets the running total
        const double rough = adaptive_simpson(f, lo, hi, 1e-8, 24);
        const double tol =
            std::max(rel_tol * std::max(std::abs(total), std::abs(rough)), 1e-15);
        const double block = adaptive_simpson(f, lo, hi, tol);
        total += block;
        if (std::abs(block) <= rel_tol * std::abs(total))
            ++quiet_blocks;
        else
            quiet_blocks = 0;
        if (quiet_blocks >= 3) return total;
        lo = hi;
        width *= 2.0;
    }
    throw NumericError("integrate_to_infinity: no decay detected (divergent or too-slow tail)");
}

} // namespace pamfk
