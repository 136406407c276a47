#include "pamfk/chaos.hpp"

#include <cmath>
#include <numbers>

#include "pamfk/quadrature.hpp"
#include "pamfk/stats.hpp"

namespace pamfk {

namespace {

constexpr double kPi = std::numbers::pi;

// Gap-coordinate quadratic form for the gaussian model: with gaps w_1..w_n
// the spectral integral is (pi^n / det A)^{d/2}, where
// A_{ab} = sum_{i >= max(a,b)} w_i + (sigma/2) delta_{ab}.
double log_det_gap_form(std::span<const double> w, double sigma)
{
    const int n = static_cast<int>(w.size());
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    std::vector<double> suffix(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + w[i];
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            a[r * n + c] = suffix[std::max(r, c)] + (r == c ? 0.5 * sigma : 0.0);

    // Cholesky log-determinant
    double log_det = 0.0;
    for (int j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (int p = 0; p < j; ++p) diag -= a[j * n + p] * a[j * n + p];
        diag = std::sqrt(std::max(diag, 1e-300));
        log_det += 2.0 * std::log(diag);
        a[j * n + j] = diag;
        for (int i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (int p = 0; p < j; ++p) v -= a[i * n + p] * a[j * n + p];
            a[i * n + j] = v / diag;
        }
    }
    return log_det;
}

// Nested Gauss-Legendre integration over the gap simplex {w >= 0, sum <= t}.
double simplex_quadrature(int n, double t, int order,
                          const std::function<double(std::span<const double>)>& f)
{
    const GaussLegendreRule& rule = gauss_legendre(order);
    std::vector<double> w(n, 0.0);
    std::function<double(int, double)> recurse = [&](int level, double remaining) -> double {
        if (level == n) return f(w);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            w[level] = 0.5 * remaining * (rule.nodes[q] + 1.0);
            acc += 0.5 * remaining * rule.weights[q] * recurse(level + 1, remaining - w[level]);
        }
        return acc;
    };
    return recurse(0, t);
}

// per-level order chosen so the total point count stays at desk scale
int gaussian_term_order(int n)
{
    static constexpr int orders[] = {0, 48, 40, 28, 20, 14, 10, 8, 7};
    return orders[n];
}

ChaosTerm gaussian_chaos_term(int n, double t, double sigma, int dimension)
{
    const double half_d = 0.5 * static_cast<double>(dimension);
    auto integrand = [&](std::span<const double> w) {
        const double log_val = static_cast<double>(n) * std::log(kPi) - log_det_gap_form(w, sigma);
        return std::exp(half_d * log_val);
    };
    const int order = gaussian_term_order(n);
    const double scale =
        std::pow(2.0 * kPi, -static_cast<double>(n) * static_cast<double>(dimension));
    const double v1 = scale * simplex_quadrature(n, t, order, integrand);
    const double v0 = scale * simplex_quadrature(n, t, std::max(4, (2 * order) / 3), integrand);

    ChaosTerm term;
    term.order = n;
    term.value = v1;
    term.quadrature_error = std::abs(v1 - v0);
    return term;
}

} // namespace

int chaos_term_max_order(const CovarianceModel& model)
{
    switch (model.kind()) {
        case CovarianceKind::zero: return 64;
        case CovarianceKind::white_noise: return 20;
        case CovarianceKind::gaussian: return 8;
        default:
            throw std::invalid_argument(
                "chaos oracle supports models with Gaussian-closed spectral integrals "
                "(zero, white noise d=1, gaussian covariance)");
    }
}

ChaosTerm chaos_term(int n, double t, std::span<const double> x, const CovarianceModel& model)
{
    check(n >= 0, "chaos_term: order must be nonnegative");
    check(t > 0.0, "chaos_term: t must be positive");
    check(static_cast<int>(x.size()) == model.dimension(), "chaos_term: dimension mismatch");
    if (n == 0) return ChaosTerm{0, 1.0, 0.0};  // (p_t * 1)(x)^2

    const int cap = chaos_term_max_order(model);
    check(n <= cap, "chaos_term: order " + std::to_string(n) + " above the supported maximum " +
                        std::to_string(cap) + " for this model");

    switch (model.kind()) {
        case CovarianceKind::zero:
            return ChaosTerm{n, 0.0, 0.0};

        case CovarianceKind::white_noise: {
            // spectral integrals collapse (partial-sum substitution), the time
            // simplex is a Dirichlet integral: (t/4)^(n/2) / Gamma(n/2 + 1)
            ChaosTerm term;
            term.order = n;
            term.value = std::exp(0.5 * n * std::log(0.25 * t) - std::lgamma(0.5 * n + 1.0));
            term.quadrature_error = 0.0;
            return term;
        }

        case CovarianceKind::gaussian:
            return gaussian_chaos_term(n, t, model.spec().sigma, model.dimension());

        default:
            break;
    }
    throw std::invalid_argument("chaos_term: unsupported model kind");
}

namespace {

struct SpectralMass {
    double c_m = 0.0;  // integral of mu(dxi)/|xi|^2 over |xi| >= M
    double d_m = 0.0;  // mu(|xi| <= M)
};

SpectralMass spectral_mass(const CovarianceModel& model, double M)
{
    SpectralMass out;
    switch (model.kind()) {
        case CovarianceKind::zero:
            return out;
        case CovarianceKind::white_noise:
            out.c_m = 2.0 / M;
            out.d_m = 2.0 * M;
            return out;
        case CovarianceKind::gaussian: {
            const double sigma = model.spec().sigma;
            auto tail = [&](double r) { return std::exp(-0.5 * sigma * r * r) / (r * r); };
            out.c_m = 2.0 * integrate_to_infinity(tail, M, 1e-10);
            out.d_m = std::sqrt(2.0 * kPi / sigma) * std::erf(M * std::sqrt(0.5 * sigma));
            return out;
        }
        default:
            throw std::invalid_argument("second_moment_series: unsupported model kind");
    }
}

// exp of log-binomial for exact-enough tail terms
double binom(int n, int k)
{
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

} // namespace

ChaosSeries second_moment_series(double t, std::span<const double> x, const CovarianceModel& model,
                                 int n_max, std::optional<double> M)
{
    check(n_max >= 0, "second_moment_series: n_max must be nonnegative");
    check(n_max <= chaos_term_max_order(model),
          "second_moment_series: n_max above the supported order for this model");

    ChaosSeries series;

    // spectral cutoff: double until C_M < 1/4, then tighten downward
    double cutoff = M.value_or(1.0);
    SpectralMass mass = spectral_mass(model, cutoff);
    int doublings = 0;
    while (mass.c_m >= 0.25) {
        cutoff *= 2.0;
        mass = spectral_mass(model, cutoff);
        if (++doublings > 60)
            throw NumericError("second_moment_series: no cutoff with C_M < 1/4 found");
    }
    if (!M.has_value() && model.kind() != CovarianceKind::zero) {
        double lo = cutoff / 2.0, hi = cutoff;
        for (int iter = 0; iter < 30; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (spectral_mass(model, mid).c_m < 0.24)
                hi = mid;
            else
                lo = mid;
        }
        cutoff = hi;
        mass = spectral_mass(model, cutoff);
    }
    series.spectral_cutoff = cutoff;
    series.c_m = mass.c_m;
    series.d_m = mass.d_m;

    KahanSum value;
    for (int n = 0; n <= n_max; ++n) {
        series.terms.push_back(chaos_term(n, t, x, model));
        value.add(series.terms.back().value);
        series.quadrature_error += series.terms.back().quadrature_error;
    }
    series.value = value.value();

    // Tail certificate: per-coordinate normalized masses; each discarded
    // order n contributes at most sum_k C(n,k) (t^k/k!) Dn^k (2Cn)^(n-k).
    const double norm = std::pow(2.0 * kPi, -static_cast<double>(model.dimension()));
    const double dn = mass.d_m * norm;
    const double cn = mass.c_m * norm;
    KahanSum tail;
    double prev = -1.0;
    int shrinking = 0;
    const int hard_cap = n_max + 2000;
    for (int n = n_max + 1; n <= hard_cap; ++n) {
        KahanSum bn;
        for (int k = 0; k <= n; ++k)
            bn.add(binom(n, k) * std::exp(k * std::log(t * dn + 1e-300) - std::lgamma(k + 1.0)) *
                   std::pow(2.0 * cn, n - k));
        const double b = bn.value();
        tail.add(b);
        if (prev >= 0.0 && b < 0.5 * prev)
            ++shrinking;
        else
            shrinking = 0;
        if ((b < 1e-30 && shrinking >= 3) || b == 0.0) {
            // geometric remainder at the observed ratio
            const double r = prev > 0.0 ? std::min(0.5, b / prev) : 0.0;
            tail.add(b * r / (1.0 - r));
            series.tail_bound = tail.value();
            return series;
        }
        prev = b;
    }
    throw NumericError("second_moment_series: tail certificate did not converge");
}

} // namespace pamfk
