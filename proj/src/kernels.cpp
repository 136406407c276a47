#include "pamfk/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pamfk/quadrature.hpp"
#include "pamfk/stats.hpp"

namespace pamfk {

double heat_kernel(double t, std::span<const double> x)
{
    check(t > 0.0, "heat_kernel: t must be positive");
    const double d = static_cast<double>(x.size());
    return std::pow(2.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-sq_norm(x) / (2.0 * t));
}

double log_heat_kernel(double t, std::span<const double> x)
{
    check(t > 0.0, "heat_kernel: t must be positive");
    const double d = static_cast<double>(x.size());
    return -0.5 * d * std::log(2.0 * std::numbers::pi * t) - sq_norm(x) / (2.0 * t);
}

SignedMeasure::SignedMeasure(int dimension, std::vector<Atom> atoms, DensityFn density,
                             std::optional<GrowthCertificate> certificate)
    : dimension_(dimension),
      atoms_(std::move(atoms)),
      density_(std::move(density)),
      certificate_(certificate)
{
    check(dimension_ >= 1, "SignedMeasure: dimension must be positive");
    for (const auto& a : atoms_) {
        check(static_cast<int>(a.location.size()) == dimension_,
              "SignedMeasure: atom dimension mismatch");
        check(std::isfinite(a.weight) && a.weight != 0.0,
              "SignedMeasure: atom weights must be finite and nonzero");
        for (double v : a.location)
            check(std::isfinite(v), "SignedMeasure: atom locations must be finite");
    }
}

SignedMeasure SignedMeasure::dirac(Point location, double weight)
{
    const int d = static_cast<int>(location.size());
    return SignedMeasure(d, {Atom{std::move(location), weight}}, nullptr, std::nullopt);
}

SignedMeasure SignedMeasure::from_atoms(int dimension, std::vector<Atom> atoms)
{
    return SignedMeasure(dimension, std::move(atoms), nullptr, std::nullopt);
}

SignedMeasure SignedMeasure::from_density(int dimension, DensityFn density,
                                          std::optional<GrowthCertificate> certificate)
{
    return SignedMeasure(dimension, {}, std::move(density), certificate);
}

SignedMeasure SignedMeasure::lebesgue(int dimension)
{
    return from_density(
        dimension, [](std::span<const double>) { return 1.0; }, GrowthCertificate::bounded(1.0));
}

SignedMeasure SignedMeasure::absolute() const
{
    std::vector<Atom> abs_atoms = atoms_;
    for (auto& a : abs_atoms) a.weight = std::abs(a.weight);
    DensityFn abs_density;
    if (density_) {
        auto f = density_;
        abs_density = [f](std::span<const double> x) { return std::abs(f(x)); };
    }
    return SignedMeasure(dimension_, std::move(abs_atoms), std::move(abs_density), certificate_);
}

namespace {

// Truncation radius R (around the Gaussian center) such that the tail of
// amplitude * exp(rate*(|x|+R)^gamma) * p_t beyond R is below `target` of the
// certificate's central envelope. Doubling search; the growth classes we
// admit are always eventually dominated.
double truncation_radius(double t, const GrowthCertificate& cert, double center_norm,
                         double target)
{
    double radius = 8.0 * std::sqrt(t) + 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double growth = cert.rate <= 0.0
            ? 1.0
            : std::exp(cert.rate * std::pow(radius + center_norm, cert.exponent));
        // crude but safe one-dimensional tail bound per axis, union over axes
        const double tail = growth * std::exp(-radius * radius / (2.0 * t));
        if (tail <= target) return radius;
        radius *= 1.5;
    }
    throw NumericError("heat_convolve: could not bound the quadrature truncation tail");
}

// Recursive tensor quadrature of f over the box [lo_i, hi_i]^d with adaptive
// trapezoid in each axis.
double integrate_box(const std::function<double(std::span<const double>)>& f, int dim,
                     std::span<const double> lo, std::span<const double> hi,
                     std::vector<double>& point, int axis, double tol)
{
    if (axis == dim) return f(point);
    auto slice = [&](double v) {
        point[axis] = v;
        return integrate_box(f, dim, lo, hi, point, axis + 1, tol / (hi[axis] - lo[axis] + 1.0));
    };
    return adaptive_trapezoid(slice, lo[axis], hi[axis], tol);
}

} // namespace

double heat_convolve(const SignedMeasure& u0, double t, std::span<const double> x)
{
    check(t > 0.0, "heat_convolve: t must be positive");
    check(static_cast<int>(x.size()) == u0.dimension(), "heat_convolve: point dimension mismatch");

    KahanSum sum;
    std::vector<double> diff(x.size());
    for (const auto& atom : u0.atoms()) {
        for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - atom.location[i];
        sum.add(atom.weight * heat_kernel(t, diff));
    }

    if (u0.has_density()) {
        check(u0.certificate().has_value(),
              "heat_convolve: density without a growth certificate cannot be truncated");
        const auto& cert = *u0.certificate();
        check(cert.integrable_against_gaussian(1.0 / (2.0 * t)),
              "heat_convolve: density growth defeats the heat kernel at this t");
        const int d = u0.dimension();
        const double radius = truncation_radius(t, cert, std::sqrt(sq_norm(x)), 1e-12);

        std::vector<double> lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
            lo[i] = x[i] - radius;
            hi[i] = x[i] + radius;
        }
        auto integrand = [&](std::span<const double> y) {
            std::vector<double> z(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) z[i] = x[i] - y[i];
            return heat_kernel(t, z) * u0.density_at(y);
        };
        std::vector<double> point(d);
        const double scale = std::max(1.0, cert.envelope(radius + std::sqrt(sq_norm(x))));
        const double part =
            integrate_box(integrand, d, lo, hi, point, 0, 1e-10 * scale);
        if (!std::isfinite(part))
            throw NumericError("heat_convolve: density quadrature did not converge");
        sum.add(part);
    }
    return sum.value();
}

AdmissibilityResult admissibility_check(const SignedMeasure& u0, double c)
{
    check(c > 0.0, "admissibility_check: c must be positive");

    AdmissibilityResult result;
    KahanSum sum;
    for (const auto& atom : u0.atoms())
        sum.add(std::abs(atom.weight) * std::exp(-c * sq_norm(atom.location)));

    if (u0.has_density()) {
        if (!u0.certificate().has_value()) {
            result.admissible = false;
            result.value = std::numeric_limits<double>::quiet_NaN();
            result.reason = "density carries no growth certificate; integrability undecidable";
            return result;
        }
        const auto& cert = *u0.certificate();
        if (!cert.integrable_against_gaussian(c)) {
            result.admissible = false;
            result.value = std::numeric_limits<double>::infinity();
            result.reason = "certificate exp(" + std::to_string(cert.rate) + "*|x|^" +
                            std::to_string(cert.exponent) + ") is not integrable against exp(-" +
                            std::to_string(c) + "*|x|^2)";
            return result;
        }
        const int d = u0.dimension();
        // radius where the integrand envelope drops below 1e-12
        double radius = 1.0;
        for (int iter = 0; iter < 300; ++iter) {
            const double env = cert.envelope(radius * std::sqrt(static_cast<double>(d))) *
                               std::exp(-c * radius * radius);
            if (env < 1e-14) break;
            radius *= 1.25;
        }
        auto integrand = [&](std::span<const double> y) {
            return std::exp(-c * sq_norm(y)) * std::abs(u0.density_at(y));
        };
        std::vector<double> lo(d, -radius), hi(d, radius), point(d);
        const double part = integrate_box(integrand, d, lo, hi, point, 0, 1e-10);
        if (!std::isfinite(part))
            throw NumericError("admissibility_check: quadrature did not converge");
        sum.add(part);
    }

    result.admissible = true;
    result.value = sum.value();
    return result;
}

} // namespace pamfk
