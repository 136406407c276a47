#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pamfk {

// A point in R^d. Dimensions are small (desk scale), so value semantics are fine.
using Point = std::vector<double>;

// Raised when a computation produces a non-finite or uncontrollable value
// (quadrature non-convergence, overflowing moments, ...). Precondition
// violations use std::invalid_argument instead.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double sq_norm(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

inline double sq_dist(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline void check(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace pamfk
