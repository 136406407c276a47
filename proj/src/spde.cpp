#include "pamfk/spde.hpp"

#include <cmath>

#include "pamfk/parallel.hpp"
#include "pamfk/stats.hpp"

namespace pamfk {

int SpdeScheme::nodes() const
{
    return static_cast<int>(std::lround(domain_width / dx));
}

void SpdeScheme::validate() const
{
    check(dx > 0.0 && dt > 0.0 && domain_width > 0.0, "SpdeScheme: all parameters must be positive");
    check(dt <= 0.5 * dx * dx * (1.0 + 1e-12),
          "SpdeScheme: explicit scheme needs dt <= dx^2 / 2");
    check(nodes() >= 4, "SpdeScheme: domain too small for the grid");
    check(std::abs(nodes() * dx - domain_width) < 1e-9 * domain_width,
          "SpdeScheme: domain width must be a multiple of dx");
}

int GridField::nearest_node(double x) const
{
    check(std::abs(x) <= 0.5 * scheme.domain_width, "GridField: point outside the domain");
    const int m = scheme.nodes();
    int i = static_cast<int>(std::lround((x + 0.5 * scheme.domain_width) / scheme.dx));
    return ((i % m) + m) % m;
}

GridField simulate_she_1d(const SpdeScheme& scheme, double t, SpdeInitial initial,
                          NormalStream& stream, bool with_noise)
{
    scheme.validate();
    check(t > 0.0, "simulate_she_1d: t must be positive");
    const std::int64_t steps = std::llround(t / scheme.dt);
    check(steps >= 1 && std::abs(steps * scheme.dt - t) <= 1e-9 * std::max(t, 1.0),
          "simulate_she_1d: t must be a multiple of dt");

    const int m = scheme.nodes();
    GridField field;
    field.scheme = scheme;
    field.time = t;
    field.values.assign(m, 0.0);

    if (initial == SpdeInitial::constant_one) {
        std::fill(field.values.begin(), field.values.end(), 1.0);
    } else {
        field.values[field.nearest_node(0.0)] = 1.0 / scheme.dx;
    }

    const double diffusion = 0.5 * scheme.dt / (scheme.dx * scheme.dx);
    const double noise_scale = std::sqrt(scheme.dt / scheme.dx);
    std::vector<double> next(m);
    for (std::int64_t step = 0; step < steps; ++step) {
        auto& u = field.values;
        for (int i = 0; i < m; ++i) {
            const double left = u[(i + m - 1) % m];
            const double right = u[(i + 1) % m];
            double v = u[i] + diffusion * (left - 2.0 * u[i] + right);
            if (with_noise) v += u[i] * noise_scale * stream.normal();
            next[i] = v;
        }
        field.values.swap(next);
    }
    return field;
}

MomentEstimate direct_moment(int k, double t, double x, const SpdeScheme& scheme,
                             SpdeInitial initial, std::int64_t replications, std::uint64_t seed,
                             int workers)
{
    check(k >= 1 && k <= 3, "direct_moment: k must be 1, 2 or 3");
    check(replications >= 2, "direct_moment: need at least two replications");
    scheme.validate();

    struct Record {
        double sign;
        double log_abs;
    };
    LogMeanAccumulator acc;
    Welford logw;
    run_indexed_samples<Record>(
        replications, workers, [] { return 0; },
        [&](int&, std::int64_t rep) -> Record {
            NormalStream stream(StreamKey{seed, static_cast<std::uint64_t>(rep), 0});
            const GridField field = simulate_she_1d(scheme, t, initial, stream, true);
            const double u = field.values[field.nearest_node(x)];
            if (u == 0.0) return {0.0, -std::numeric_limits<double>::infinity()};
            const double sign = (k % 2 == 0 || u > 0.0) ? 1.0 : -1.0;
            return {sign, k * std::log(std::abs(u))};
        },
        [&](const Record& r) {
            acc.add(r.sign, r.log_abs);
            if (r.sign != 0.0) logw.add(r.log_abs);
        });

    MomentEstimate est;
    est.mean = acc.mean();
    est.standard_error = acc.standard_error();
    est.samples = acc.count();
    est.ess = acc.effective_sample_size();
    est.log_weights.count = logw.count();
    est.log_weights.max = logw.count() ? logw.max() : 0.0;
    est.log_weights.mean = logw.mean();
    est.log_weights.variance = logw.variance();
    est.representation = Representation::spde_direct;
    if (!std::isfinite(est.mean) || !std::isfinite(est.standard_error))
        throw NumericError("direct_moment: non-finite estimate (scheme unstable?)");
    return est;
}

} // namespace pamfk
