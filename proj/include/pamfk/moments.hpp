#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pamfk/covariance.hpp"
#include "pamfk/kernels.hpp"
#include "pamfk/types.hpp"

namespace pamfk {

enum class Representation {
    free_bm,
    bridge_conditioned,
    derivative,
    spde_direct,
};

const char* to_string(Representation r);

struct LogWeightStats {
    double max = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::int64_t count = 0;
};

struct MomentEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::int64_t samples = 0;
    LogWeightStats log_weights;
    double ess = 0.0;
    Representation representation = Representation::free_bm;

    // heavy-tail degeneracy flag
    bool low_ess() const { return samples > 0 && ess < 0.01 * static_cast<double>(samples); }
};

struct McConfig {
    std::int64_t samples = 10000;
    int steps_per_segment = 128;
    std::uint64_t seed = 1;
    int workers = 1;
    std::int64_t max_atom_tuples = 4096;  // cap on (#atom choices)^k
};

// Pin data for the iterated-derivative estimator: order N, interior pin
// times r_1 < ... < r_N and points z_1..z_N, and the moment order k >= 2.
struct DerivativeSpec {
    int order = 1;       // N
    int moment_k = 2;    // k
    std::vector<double> r;
    std::vector<Point> z;

    void validate(double t, int dimension) const;
};

// E[u(t,x)^k] with k independent free Brownian paths (density-only u0).
MomentEstimate moment_u_free(int k, double t, std::span<const double> x, const SignedMeasure& u0,
                             const CovarianceModel& model, double eps, const McConfig& mc);

// E[u(t,x)^k] in the bridge-conditioned form: exact sum / importance sampling
// over the endpoint measure, with zero-to-zero bridges carrying the pairwise
// linear drift offsets.
MomentEstimate moment_u_bridge(int k, double t, std::span<const double> x, const SignedMeasure& u0,
                               const CovarianceModel& model, double eps, const McConfig& mc);

// E[(D^N u(t,x))^k] via multi-pinned Brownian motions; heat-kernel prefactors
// are carried in log-domain.
MomentEstimate moment_derivative(const DerivativeSpec& spec, double t, std::span<const double> x,
                                 const SignedMeasure& u0, const CovarianceModel& model, double eps,
                                 const McConfig& mc);

// C^{1/k} * (p_{r1} * |u0|)(z1) * prod p_{r_{m+1}-r_m}(z_{m+1}-z_m) * p_{t-rN}(x-zN)
double corollary_bound(const DerivativeSpec& spec, double t, std::span<const double> x,
                       const SignedMeasure& u0, double C);

// moment_u_free evaluated along a decreasing eps ladder on shared paths, with
// the eps -> 0 limit extrapolated in sqrt(eps). Used for white-noise chains.
struct LadderMoment {
    std::vector<double> eps;
    std::vector<MomentEstimate> levels;
    double extrapolated = 0.0;
    double residual = 0.0;
    bool diverged = false;
};
LadderMoment moment_u_free_ladder(int k, double t, std::span<const double> x,
                                  const SignedMeasure& u0, const CovarianceModel& model,
                                  std::span<const double> eps_ladder, const McConfig& mc);

} // namespace pamfk
