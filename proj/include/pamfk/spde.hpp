#pragma once

#include <cstdint>
#include <vector>

#include "pamfk/moments.hpp"
#include "pamfk/rng.hpp"
#include "pamfk/types.hpp"

namespace pamfk {

// Explicit-Euler discretization parameters for the d=1 stochastic heat
// equation with space-time white noise on a periodic domain [-L/2, L/2).
struct SpdeScheme {
    double dx = 0.05;
    double dt = 0.001;
    double domain_width = 4.0;  // L

    int nodes() const;
    void validate() const;  // stability dt <= dx^2/2, geometry
};

enum class SpdeInitial {
    constant_one,
    discrete_dirac,  // mass 1/dx at the node nearest zero
};

struct GridField {
    SpdeScheme scheme;
    double time = 0.0;
    std::vector<double> values;

    double node_position(int i) const { return -0.5 * scheme.domain_width + i * scheme.dx; }
    int nearest_node(double x) const;
};

// One explicit-Euler trajectory up to time t (t must be a multiple of dt).
// zeta == 0 when with_noise is false, which gives the deterministic heat
// scheme used by the consistency tests.
GridField simulate_she_1d(const SpdeScheme& scheme, double t, SpdeInitial initial,
                          NormalStream& stream, bool with_noise = true);

// Sample k-th moment (k in {1,2,3}) of the simulated field at (t, nearest
// node to x) over independent replications.
MomentEstimate direct_moment(int k, double t, double x, const SpdeScheme& scheme,
                             SpdeInitial initial, std::int64_t replications, std::uint64_t seed,
                             int workers = 1);

} // namespace pamfk
