#pragma once

#include <functional>
#include <span>
#include <string>

#include "pamfk/types.hpp"

namespace pamfk {

enum class CovarianceKind {
    zero,             // no noise interaction
    white_noise,      // Lambda = delta_0, mu = Lebesgue (d = 1 only)
    riesz,            // Lambda(x) = |x|^-beta, 0 < beta < min(2, d)
    gaussian,         // Lambda = p_sigma, mu(dxi) = exp(-sigma |xi|^2 / 2) dxi
    radial_spectral,  // user-supplied radial density for mu
};

// Plain description of a covariance structure. Admissibility (Dalang's
// integral) is checked when promoting a spec to a CovarianceModel, so the
// spec itself may describe inadmissible noises for diagnostic purposes.
struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::zero;
    int dimension = 1;
    double beta = 0.0;   // riesz exponent
    double sigma = 0.0;  // gaussian scale
    std::function<double(double)> radial_density;  // mu(dxi) = g(|xi|) dxi

    static CovarianceSpec zero(int dimension);
    static CovarianceSpec white_noise(int dimension);
    static CovarianceSpec riesz(int dimension, double beta);
    static CovarianceSpec gaussian(int dimension, double sigma);
    static CovarianceSpec radial(int dimension, std::function<double(double)> density);
};

struct DalangResult {
    bool finite = false;
    double value = 0.0;        // integral of mu(dxi) / (1 + |xi|^2) when finite
    double growth_rate = 0.0;  // detected power of the divergent octave sums (0 = log)
    std::string note;
};

// Numeric evaluation of Dalang's integral, or a divergence verdict with the
// detected growth rate. Never throws on divergence.
DalangResult dalang_integral(const CovarianceSpec& spec);

// Fourier-pair constant for |x|^-beta <-> c * |xi|^(beta-d), with the
// convention F(nu)(xi) = integral exp(-i xi.x) nu(dx). With this constant the
// mollified covariance converges to |x|^-beta as epsilon -> 0.
// c = 2^(d-beta) * pi^(d/2) * Gamma((d-beta)/2) / Gamma(beta/2)
// (tables of Riesz potentials, e.g. Stein, "Singular Integrals", Ch. V).
double riesz_spectral_constant(int dimension, double beta);

// A validated covariance structure. Immutable; evaluation is pure.
class CovarianceModel {
public:
    // Throws std::invalid_argument when the parameters are out of range or
    // Dalang's condition fails (e.g. white noise with d >= 2).
    static CovarianceModel create(const CovarianceSpec& spec);

    CovarianceKind kind() const { return spec_.kind; }
    int dimension() const { return spec_.dimension; }
    const CovarianceSpec& spec() const { return spec_; }
    double dalang_value() const { return dalang_value_; }

    // Lambda_eps(x) = (2 pi)^-d * integral exp(i x.xi - eps |xi|^2) mu(dxi).
    // eps = 0 is allowed only where Lambda itself is a function.
    double covariance_at(double eps, std::span<const double> x) const;

    // Lambda_eps(0); used for variance identities and diagnostics.
    double mollified_at_zero(double eps) const;

private:
    explicit CovarianceModel(CovarianceSpec spec, double dalang_value)
        : spec_(std::move(spec)), dalang_value_(dalang_value) {}

    double radial_transform(double eps, double radius) const;

    CovarianceSpec spec_;
    double dalang_value_ = 0.0;
};

} // namespace pamfk
