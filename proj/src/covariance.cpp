#include "pamfk/covariance.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "pamfk/kernels.hpp"
#include "pamfk/quadrature.hpp"
#include "pamfk/stats.hpp"

namespace pamfk {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_area(int d)  // |S^{d-1}|
{
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

// Surface integral of exp(i u <w,e>) over the unit sphere S^{d-1}.
double sphere_kernel(int d, double u)
{
    switch (d) {
        case 1:
            return 2.0 * std::cos(u);
        case 2:
            return 2.0 * kPi * std::cyl_bessel_j(0.0, std::abs(u));
        case 3:
            return std::abs(u) < 1e-8 ? 4.0 * kPi * (1.0 - u * u / 6.0)
                                      : 4.0 * kPi * std::sin(u) / u;
        default:
            throw std::invalid_argument("spectral quadrature supports d <= 3");
    }
}

} // namespace

CovarianceSpec CovarianceSpec::zero(int dimension)
{
    check(dimension >= 1, "CovarianceSpec: dimension must be positive");
    CovarianceSpec s;
    s.kind = CovarianceKind::zero;
    s.dimension = dimension;
    return s;
}

CovarianceSpec CovarianceSpec::white_noise(int dimension)
{
    check(dimension >= 1, "CovarianceSpec: dimension must be positive");
    CovarianceSpec s;
    s.kind = CovarianceKind::white_noise;
    s.dimension = dimension;
    return s;
}

CovarianceSpec CovarianceSpec::riesz(int dimension, double beta)
{
    check(dimension >= 1, "CovarianceSpec: dimension must be positive");
    check(beta > 0.0 && beta < std::min(2.0, static_cast<double>(dimension)),
          "CovarianceSpec: riesz exponent must satisfy 0 < beta < min(2, d)");
    CovarianceSpec s;
    s.kind = CovarianceKind::riesz;
    s.dimension = dimension;
    s.beta = beta;
    return s;
}

CovarianceSpec CovarianceSpec::gaussian(int dimension, double sigma)
{
    check(dimension >= 1, "CovarianceSpec: dimension must be positive");
    check(sigma > 0.0, "CovarianceSpec: gaussian scale must be positive");
    CovarianceSpec s;
    s.kind = CovarianceKind::gaussian;
    s.dimension = dimension;
    s.sigma = sigma;
    return s;
}

CovarianceSpec CovarianceSpec::radial(int dimension, std::function<double(double)> density)
{
    check(dimension >= 1, "CovarianceSpec: dimension must be positive");
    check(static_cast<bool>(density), "CovarianceSpec: radial density is required");
    CovarianceSpec s;
    s.kind = CovarianceKind::radial_spectral;
    s.dimension = dimension;
    s.radial_density = std::move(density);
    return s;
}

double riesz_spectral_constant(int dimension, double beta)
{
    const double d = static_cast<double>(dimension);
    return std::pow(2.0, d - beta) * std::pow(kPi, 0.5 * d) *
           std::tgamma(0.5 * (d - beta)) / std::tgamma(0.5 * beta);
}

namespace {

// Octave analysis of integral g(r) r^{d-1} / (1+r^2) dr over [1, inf).
// Contributions that stop decaying flag divergence; the fitted slope of the
// octave sums gives the growth rate (0 means logarithmic).
DalangResult radial_dalang_tail(const std::function<double(double)>& integrand)
{
    DalangResult result;
    KahanSum total;
    double prev = -1.0;
    int flat_or_growing = 0;
    double lo = 1.0;
    for (int octave = 0; octave < 64; ++octave) {
        const double hi = 2.0 * lo;
        const double block = adaptive_simpson(integrand, lo, hi, 1e-12 + 1e-10 * std::abs(total.value()));
        total.add(block);
        if (prev >= 0.0 && block >= 0.999 * prev && block > 1e-14) {
            ++flat_or_growing;
            if (flat_or_growing >= 4) {
                result.finite = false;
                result.growth_rate = std::log2(std::max(block, 1e-300) / std::max(prev, 1e-300));
                if (std::abs(result.growth_rate) < 0.05) result.growth_rate = 0.0;
                result.note = result.growth_rate == 0.0
                    ? "octave contributions constant: logarithmic divergence"
                    : "octave contributions growing: polynomial divergence";
                return result;
            }
        } else {
            flat_or_growing = 0;
        }
        if (std::abs(block) < 1e-13 * (std::abs(total.value()) + 1.0) && octave > 4) break;
        prev = block;
        lo = hi;
    }
    result.finite = true;
    result.value = total.value();
    return result;
}

} // namespace

DalangResult dalang_integral(const CovarianceSpec& spec)
{
    const int d = spec.dimension;
    DalangResult result;
    switch (spec.kind) {
        case CovarianceKind::zero:
            result.finite = true;
            result.value = 0.0;
            return result;

        case CovarianceKind::white_noise: {
            if (d == 1) {
                result.finite = true;
                result.value = kPi;  // integral of dxi / (1 + xi^2)
                return result;
            }
            result.finite = false;
            result.growth_rate = static_cast<double>(d - 2);
            result.note = d == 2 ? "Lebesgue spectral measure in d=2: logarithmic divergence"
                                 : "Lebesgue spectral measure grows like r^(d-2)";
            return result;
        }

        case CovarianceKind::riesz: {
            const double beta = spec.beta;
            const double c = riesz_spectral_constant(d, beta) * sphere_area(d);
            // integral r^{beta-1} / (1+r^2) dr, split at 1 with the
            // singularity substituted away (r = u^{1/beta} on [0,1]).
            auto head = [&](double u) {
                const double r = std::pow(u, 1.0 / beta);
                return 1.0 / (beta * (1.0 + r * r));
            };
            auto tail = [&](double r) {
                return std::pow(r, beta - 1.0) / (1.0 + r * r);
            };
            const double i0 = adaptive_simpson(head, 0.0, 1.0, 1e-12);
            const double i1 = integrate_to_infinity(tail, 1.0, 1e-11);
            result.finite = true;
            result.value = c * (i0 + i1);
            return result;
        }

        case CovarianceKind::gaussian: {
            const double sigma = spec.sigma;
            auto f = [&](double r) {
                return std::exp(-0.5 * sigma * r * r) * std::pow(r, d - 1.0) / (1.0 + r * r);
            };
            result.finite = true;
            result.value = sphere_area(d) * integrate_to_infinity(f, 0.0, 1e-11);
            return result;
        }

        case CovarianceKind::radial_spectral: {
            auto f = [&](double r) {
                return spec.radial_density(r) * std::pow(r, d - 1.0) / (1.0 + r * r);
            };
            const double head = adaptive_simpson(f, 0.0, 1.0, 1e-12);
            DalangResult tail = radial_dalang_tail(f);
            if (!tail.finite) return tail;
            result.finite = true;
            result.value = sphere_area(d) * (head + tail.value);
            return result;
        }
    }
    throw std::logic_error("dalang_integral: unknown covariance kind");
}

CovarianceModel CovarianceModel::create(const CovarianceSpec& spec)
{
    if (spec.kind == CovarianceKind::white_noise)
        check(spec.dimension == 1,
              "CovarianceModel: white noise violates Dalang's condition for d >= 2");
    const DalangResult dalang = dalang_integral(spec);
    if (!dalang.finite)
        throw std::invalid_argument("CovarianceModel: Dalang's condition fails: " + dalang.note);
    return CovarianceModel(spec, dalang.value);
}

double CovarianceModel::radial_transform(double eps, double rho) const
{
    const int d = spec_.dimension;
    std::function<double(double)> g;
    double beta = 0.0;
    if (spec_.kind == CovarianceKind::riesz) {
        beta = spec_.beta;
        const double c = riesz_spectral_constant(d, beta);
        g = [c, beta, d](double r) { return c * std::pow(r, beta - d); };
    } else {
        g = spec_.radial_density;
    }

    auto full = [&](double r) {
        return g(r) * std::exp(-eps * r * r) * std::pow(r, d - 1.0) * sphere_kernel(d, r * rho);
    };

    // Head [0,1]: for riesz substitute r = u^{1/beta} to remove the r^{beta-1}
    // endpoint singularity.
    double head;
    if (spec_.kind == CovarianceKind::riesz) {
        const double c = riesz_spectral_constant(d, beta);
        auto sub = [&](double u) {
            const double r = std::pow(u, 1.0 / beta);
            return (c / beta) * std::exp(-eps * r * r) * sphere_kernel(d, r * rho);
        };
        head = adaptive_simpson(sub, 0.0, 1.0, 1e-11);
    } else {
        head = adaptive_simpson(full, 0.0, 1.0, 1e-11);
    }

    // Tail: the Gaussian damping makes everything beyond R negligible.
    double radius = 1.0;
    while (std::exp(-eps * radius * radius) * (1.0 + std::abs(g(radius))) *
               std::pow(radius, d - 1.0) > 1e-16 && radius < 1e9)
        radius *= 2.0;
    double tail = adaptive_simpson(full, 1.0, radius, 1e-11);

    double value = (head + tail) * std::pow(2.0 * kPi, -static_cast<double>(d));
    // second pass at the target relative tolerance
    const double scale = std::abs(value);
    if (scale > 0.0) {
        if (spec_.kind == CovarianceKind::riesz) {
            const double c = riesz_spectral_constant(d, beta);
            auto sub = [&](double u) {
                const double r = std::pow(u, 1.0 / beta);
                return (c / beta) * std::exp(-eps * r * r) * sphere_kernel(d, r * rho);
            };
            head = adaptive_simpson(sub, 0.0, 1.0, 1e-9 * scale * std::pow(2.0 * kPi, d));
        } else {
            head = adaptive_simpson(full, 0.0, 1.0, 1e-9 * scale * std::pow(2.0 * kPi, d));
        }
        tail = adaptive_simpson(full, 1.0, radius, 1e-9 * scale * std::pow(2.0 * kPi, d));
        value = (head + tail) * std::pow(2.0 * kPi, -static_cast<double>(d));
    }
    if (!std::isfinite(value))
        throw NumericError("covariance_at: spectral quadrature did not converge");
    return value;
}

double CovarianceModel::covariance_at(double eps, std::span<const double> x) const
{
    check(eps >= 0.0, "covariance_at: eps must be nonnegative");
    check(static_cast<int>(x.size()) == spec_.dimension, "covariance_at: dimension mismatch");

    switch (spec_.kind) {
        case CovarianceKind::zero:
            return 0.0;

        case CovarianceKind::white_noise:
            check(eps > 0.0, "covariance_at: white noise has no pointwise covariance at eps = 0");
            return heat_kernel(2.0 * eps, x);

        case CovarianceKind::gaussian:
            return heat_kernel(spec_.sigma + 2.0 * eps, x);

        case CovarianceKind::riesz: {
            if (eps == 0.0) {
                const double r = std::sqrt(sq_norm(x));
                check(r > 0.0, "covariance_at: riesz covariance is singular at x = 0 with eps = 0");
                return std::pow(r, -spec_.beta);
            }
            return radial_transform(eps, std::sqrt(sq_norm(x)));
        }

        case CovarianceKind::radial_spectral:
            check(eps > 0.0, "covariance_at: radial spectral model requires eps > 0");
            return radial_transform(eps, std::sqrt(sq_norm(x)));
    }
    throw std::logic_error("covariance_at: unknown covariance kind");
}

double CovarianceModel::mollified_at_zero(double eps) const
{
    const std::vector<double> origin(spec_.dimension, 0.0);
    return covariance_at(eps, origin);
}

} // namespace pamfk
