#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pamfk/covariance.hpp"
#include "pamfk/types.hpp"

namespace pamfk {

// One orthogonal-series term of the second moment: value = n! |f_{n,t,x}|^2
// for the flat initial datum u0 == 1.
struct ChaosTerm {
    int order = 0;
    double value = 0.0;
    double quadrature_error = 0.0;
};

// Highest supported order for the given model (closed spectral integrals:
// 20 for white noise d=1, 8 for the gaussian covariance).
int chaos_term_max_order(const CovarianceModel& model);

// Deterministic evaluation of the n-th series term. Supported models are
// those whose spectral integrals collapse in closed form: zero, white noise
// (d = 1) and the gaussian covariance; the remaining time-simplex integral is
// done by nested quadrature.
ChaosTerm chaos_term(int n, double t, std::span<const double> x, const CovarianceModel& model);

struct ChaosSeries {
    double value = 0.0;            // sum of terms up to n_max
    double tail_bound = 0.0;       // certified bound on the discarded remainder
    double quadrature_error = 0.0; // accumulated term error estimates
    double spectral_cutoff = 0.0;  // M
    double c_m = 0.0;              // mass of mu(dxi)/|xi|^2 beyond M
    double d_m = 0.0;              // mu mass inside |xi| <= M
    std::vector<ChaosTerm> terms;
};

// Truncated second-moment series with a certified tail bound. When M is not
// given it is found by doubling until C_M < 1/4 and then refined downward.
ChaosSeries second_moment_series(double t, std::span<const double> x, const CovarianceModel& model,
                                 int n_max, std::optional<double> M = std::nullopt);

} // namespace pamfk
