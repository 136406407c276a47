#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pamfk/types.hpp"

namespace pamfk {

// Gaussian heat kernel p_t(x) = (2 pi t)^(-d/2) exp(-|x|^2 / (2t)).
double heat_kernel(double t, std::span<const double> x);
double log_heat_kernel(double t, std::span<const double> x);

// Declared envelope |f(x)| <= amplitude * exp(rate * |x|^gamma). The class is
// declared by the caller, not inferred: integrability of a black-box density
// cannot be decided numerically.
struct GrowthCertificate {
    double amplitude = 1.0;
    double rate = 0.0;
    double exponent = 0.0;  // gamma

    static GrowthCertificate bounded(double amplitude = 1.0)
    {
        return {amplitude, 0.0, 0.0};
    }

    // True when integrating |f| against exp(-c |x|^2) converges.
    bool integrable_against_gaussian(double c) const
    {
        if (rate <= 0.0 || exponent <= 0.0) return true;
        if (exponent < 2.0) return true;
        if (exponent == 2.0) return rate < c;
        return false;
    }

    double envelope(double radius) const
    {
        return amplitude * std::exp(rate * std::pow(radius, exponent));
    }
};

struct Atom {
    Point location;
    double weight = 0.0;
};

using DensityFn = std::function<double(std::span<const double>)>;

// Initial datum u0: finitely many signed atoms plus an optional density with
// a declared growth certificate.
class SignedMeasure {
public:
    SignedMeasure(int dimension, std::vector<Atom> atoms, DensityFn density,
                  std::optional<GrowthCertificate> certificate);

    static SignedMeasure dirac(Point location, double weight = 1.0);
    static SignedMeasure from_atoms(int dimension, std::vector<Atom> atoms);
    static SignedMeasure from_density(int dimension, DensityFn density,
                                      std::optional<GrowthCertificate> certificate);
    // u0 == 1 (Lebesgue density one)
    static SignedMeasure lebesgue(int dimension);

    int dimension() const { return dimension_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    bool has_density() const { return static_cast<bool>(density_); }
    const DensityFn& density() const { return density_; }
    const std::optional<GrowthCertificate>& certificate() const { return certificate_; }

    double density_at(std::span<const double> x) const { return density_(x); }

    // Total-variation counterpart |u0| (atom weights and density in absolute value).
    SignedMeasure absolute() const;

private:
    int dimension_;
    std::vector<Atom> atoms_;
    DensityFn density_;
    std::optional<GrowthCertificate> certificate_;
};

// (p_t * u0)(x): exact over atoms, truncated-box adaptive trapezoid over the
// density part. Truncation radius is chosen from the Gaussian tail and the
// growth certificate so the discarded mass is below 1e-10 of the result.
double heat_convolve(const SignedMeasure& u0, double t, std::span<const double> x);

struct AdmissibilityResult {
    bool admissible = false;
    double value = 0.0;  // integral of exp(-c|x|^2) against |u0| when admissible
    std::string reason;
};

// Checks the Gaussian-moment condition at a fixed c > 0 and evaluates the
// integral when the certificate permits.
AdmissibilityResult admissibility_check(const SignedMeasure& u0, double c);

} // namespace pamfk
