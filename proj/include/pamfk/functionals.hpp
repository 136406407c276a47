#pragma once

#include <span>
#include <vector>

#include "pamfk/bridges.hpp"
#include "pamfk/covariance.hpp"
#include "pamfk/types.hpp"

namespace pamfk {

// Piecewise-linear deterministic offset alpha(s), used to carry pin/endpoint
// differences between two path copies through the interaction integral.
class OffsetFunction {
public:
    OffsetFunction(int dimension, std::vector<double> node_times, std::vector<double> node_values);

    static OffsetFunction zero(int dimension);
    // Linear from value p0 at t0 to p1 at t1.
    static OffsetFunction linear(double t0, Point p0, double t1, Point p1);

    int dimension() const { return dimension_; }
    bool is_zero() const { return node_times_.empty(); }
    void eval_into(double s, std::span<double> out) const;

private:
    int dimension_;
    std::vector<double> node_times_;
    std::vector<double> node_values_;  // row-major, d per node
};

// Symmetric table of pairwise offsets for k path copies.
class PairOffsets {
public:
    explicit PairOffsets(int k, int dimension);

    int copies() const { return k_; }
    void set(int j, int l, OffsetFunction offset);  // j < l
    const OffsetFunction& at(int j, int l) const;   // j < l

private:
    int k_;
    std::vector<OffsetFunction> table_;
};

// Trapezoidal quadrature of s -> Lambda_eps(A(s) - B(s) + alpha(s)) over the
// shared grid of the two paths.
double pair_interaction(const SampledPath& a, const SampledPath& b, const OffsetFunction& offset,
                        const CovarianceModel& model, double eps);

// Sum over ordered pairs j < l of pair interactions; this is the log of the
// Feynman-Kac weight. Exponentiation is deferred to the aggregating
// estimator.
double interaction_log_weight(std::span<const SampledPath> paths, const PairOffsets& offsets,
                              const CovarianceModel& model, double eps);

// Polynomial extrapolation to h = 0 of values sampled at h_i = sqrt(eps_i)
// (Neville tableau). residual is the magnitude of the last correction.
struct SqrtExtrapolation {
    double value = 0.0;
    double residual = 0.0;
    bool diverged = false;
};
SqrtExtrapolation extrapolate_in_sqrt_eps(std::span<const double> eps_ladder,
                                          std::span<const double> values);

// White-noise (d=1) pair interaction: evaluates the mollified functional along
// a decreasing eps ladder and extrapolates the eps -> 0 limit in sqrt(eps).
struct WhiteNoiseInteraction {
    std::vector<double> eps;
    std::vector<double> values;
    double extrapolated = 0.0;
    double residual = 0.0;
    bool diverged = false;
};
WhiteNoiseInteraction whitenoise_pair_interaction(const SampledPath& a, const SampledPath& b,
                                                  const OffsetFunction& offset,
                                                  std::span<const double> eps_ladder);

} // namespace pamfk
