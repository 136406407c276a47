#include "pamfk/moments.hpp"

#include <array>
#include <cmath>

#include "pamfk/bridges.hpp"
#include "pamfk/functionals.hpp"
#include "pamfk/parallel.hpp"
#include "pamfk/rng.hpp"
#include "pamfk/stats.hpp"

namespace pamfk {

const char* to_string(Representation r)
{
    switch (r) {
        case Representation::free_bm: return "free_bm";
        case Representation::bridge_conditioned: return "bridge_conditioned";
        case Representation::derivative: return "derivative";
        case Representation::spde_direct: return "spde_direct";
    }
    return "unknown";
}

void DerivativeSpec::validate(double t, int dimension) const
{
    check(order >= 1, "DerivativeSpec: order must be >= 1");
    check(moment_k >= 2, "DerivativeSpec: moment order k must be >= 2");
    check(static_cast<int>(r.size()) == order && static_cast<int>(z.size()) == order,
          "DerivativeSpec: need exactly N pin times and N pin points");
    double prev = 0.0;
    for (double ri : r) {
        check(ri > prev, "DerivativeSpec: pin times must satisfy 0 < r_1 < ... < r_N");
        prev = ri;
    }
    check(prev < t, "DerivativeSpec: pin times must lie strictly inside (0, t)");
    for (const auto& zi : z)
        check(static_cast<int>(zi.size()) == dimension, "DerivativeSpec: pin point dimension mismatch");
}

namespace {

constexpr int kMaxLadder = 8;

struct SampleRecord {
    double sign = 1.0;
    double log_abs = 0.0;
};

struct LadderRecord {
    double sign = 1.0;
    std::array<double, kMaxLadder> log_abs{};
};

struct Aggregation {
    LogMeanAccumulator acc;
    Welford log_weights;

    void add(const SampleRecord& r)
    {
        acc.add(r.sign, r.log_abs);
        if (r.sign != 0.0) log_weights.add(r.log_abs);
    }
};

LogWeightStats stats_of(const Welford& w)
{
    LogWeightStats s;
    s.count = w.count();
    if (w.count() > 0) {
        s.max = w.max();
        s.mean = w.mean();
        s.variance = w.variance();
    }
    return s;
}

MomentEstimate finalize(const Aggregation& agg, Representation rep)
{
    MomentEstimate est;
    est.mean = agg.acc.mean();
    est.standard_error = agg.acc.standard_error();
    est.samples = agg.acc.count();
    est.ess = agg.acc.effective_sample_size();
    est.log_weights = stats_of(agg.log_weights);
    est.representation = rep;
    if (!std::isfinite(est.mean) || !std::isfinite(est.standard_error))
        throw NumericError("moment estimate is non-finite (max log weight " +
                           std::to_string(est.log_weights.max) + ", mean log weight " +
                           std::to_string(est.log_weights.mean) + ")");
    return est;
}

// Multiplies v into a running signed log-magnitude pair.
inline void fold_factor(double v, double& sign, double& log_abs)
{
    if (v == 0.0 || sign == 0.0) {
        sign = 0.0;
        log_abs = -std::numeric_limits<double>::infinity();
        return;
    }
    if (v < 0.0) {
        sign = -sign;
        v = -v;
    }
    log_abs += std::log(v);
}

void require_free_form_u0(const SignedMeasure& u0)
{
    check(u0.atoms().empty(),
          "moment_u_free: atomic u0 is not evaluable along paths; use moment_u_bridge");
    check(u0.has_density(), "moment_u_free: u0 must provide a density");
    check(u0.certificate().has_value() &&
              (u0.certificate()->rate <= 0.0 || u0.certificate()->exponent <= 0.0),
          "moment_u_free: free-Brownian form requires a bounded density");
}

// Shared core of moment_u_free and its eps ladder: k free paths per sample,
// one interaction weight per ladder level on the same paths.
std::vector<Aggregation> run_free_levels(int k, double t, std::span<const double> x,
                                         const SignedMeasure& u0, const CovarianceModel& model,
                                         std::span<const double> eps_levels, const McConfig& mc)
{
    check(k >= 1, "moment_u_free: k must be >= 1");
    check(t > 0.0, "moment_u_free: t must be positive");
    check(static_cast<int>(x.size()) == model.dimension(), "moment_u_free: dimension mismatch");
    check(u0.dimension() == model.dimension(), "moment_u_free: u0 dimension mismatch");
    check(mc.samples >= 1, "moment_u_free: need at least one sample");
    require_free_form_u0(u0);
    const int n_levels = static_cast<int>(eps_levels.size());
    check(n_levels >= 1 && n_levels <= kMaxLadder, "moment_u_free: unsupported ladder size");

    const int d = model.dimension();
    const bool needs_paths = k >= 2 && model.kind() != CovarianceKind::zero;
    if (needs_paths && model.kind() == CovarianceKind::white_noise)
        for (double e : eps_levels)
            check(e > 0.0, "moment_u_free: white noise requires eps > 0");

    const PinSchedule schedule(d, t, Point(x.begin(), x.end()), {});
    const std::vector<double> grid = make_grid(schedule, mc.steps_per_segment);
    const PairOffsets no_offsets(k, d);
    const double sqrt_t = std::sqrt(t);

    struct Ctx {
        std::vector<SampledPath> paths;
        std::vector<double> endpoint;
    };
    auto make_ctx = [&] {
        Ctx c;
        c.paths.resize(k);
        c.endpoint.resize(d);
        return c;
    };

    auto eval = [&](Ctx& ctx, std::int64_t i) -> LadderRecord {
        LadderRecord rec;
        double sign = 1.0, base = 0.0;
        if (needs_paths) {
            for (int j = 0; j < k; ++j) {
                NormalStream stream(StreamKey{mc.seed, static_cast<std::uint64_t>(i),
                                              static_cast<std::uint32_t>(j)});
                sample_pinned_path_on_grid(schedule, grid, stream, ctx.paths[j]);
            }
            for (int j = 0; j < k; ++j)
                fold_factor(u0.density_at(ctx.paths[j].at(grid.size() - 1)), sign, base);
            for (int l = 0; l < n_levels; ++l) {
                rec.log_abs[l] = sign == 0.0
                    ? base
                    : base + interaction_log_weight(ctx.paths, no_offsets, model, eps_levels[l]);
            }
        } else {
            // only the endpoints enter: sample them directly
            for (int j = 0; j < k; ++j) {
                NormalStream stream(StreamKey{mc.seed, static_cast<std::uint64_t>(i),
                                              static_cast<std::uint32_t>(j)});
                for (int c = 0; c < d; ++c) ctx.endpoint[c] = x[c] + sqrt_t * stream.normal();
                fold_factor(u0.density_at(ctx.endpoint), sign, base);
            }
            for (int l = 0; l < n_levels; ++l) rec.log_abs[l] = base;
        }
        rec.sign = sign;
        return rec;
    };

    std::vector<Aggregation> agg(n_levels);
    run_indexed_samples<LadderRecord>(mc.samples, mc.workers, make_ctx, eval,
                                      [&](const LadderRecord& rec) {
                                          for (int l = 0; l < n_levels; ++l)
                                              agg[l].add({rec.sign, rec.log_abs[l]});
                                      });
    return agg;
}

// Choice of endpoint measure component for one path copy: a specific atom or
// the density part (handled by importance sampling from the heat proposal).
struct EndpointChoice {
    bool is_density = false;
    const Atom* atom = nullptr;
};

std::vector<EndpointChoice> endpoint_choices(const SignedMeasure& u0)
{
    std::vector<EndpointChoice> choices;
    for (const auto& a : u0.atoms()) choices.push_back({false, &a});
    if (u0.has_density()) choices.push_back({true, nullptr});
    check(!choices.empty(), "u0 must carry atoms or a density");
    return choices;
}

std::int64_t tuple_count(std::size_t n_choices, int k, std::int64_t cap)
{
    std::int64_t count = 1;
    for (int j = 0; j < k; ++j) {
        count *= static_cast<std::int64_t>(n_choices);
        if (count > cap)
            throw std::invalid_argument(
                "endpoint tuple count " + std::to_string(n_choices) + "^" + std::to_string(k) +
                " exceeds the configured cap (" + std::to_string(cap) +
                "); reduce the atom count or raise max_atom_tuples");
    }
    return count;
}

// Combines per-tuple inner estimates: mean = sum coef * inner_mean,
// var = sum coef^2 * inner_se^2, plus pooled weight diagnostics.
struct TupleCombiner {
    KahanSum mean;
    KahanSum var;
    Welford log_weights;
    double log_sum_abs = -std::numeric_limits<double>::infinity();
    double log_sum_sq = -std::numeric_limits<double>::infinity();
    std::int64_t samples = 0;

    void add_direct(double coef, const Aggregation& agg)
    {
        mean.add(coef * agg.acc.mean());
        const double se = agg.acc.standard_error();
        var.add(coef * coef * se * se);
        absorb_diagnostics(std::log(std::abs(coef)), agg);
    }

    void add_log(double sign_coef, double log_coef, const Aggregation& agg)
    {
        if (sign_coef != 0.0 && agg.acc.sum_sign() != 0.0) {
            const double contrib = sign_coef * agg.acc.sum_sign() *
                std::exp(log_coef + agg.acc.log_abs_sum() - std::log(static_cast<double>(agg.acc.count())));
            mean.add(contrib);
        }
        const double se = agg.acc.standard_error();
        if (se > 0.0) var.add(std::exp(2.0 * (log_coef + std::log(se))));
        absorb_diagnostics(log_coef, agg);
    }

    void absorb_diagnostics(double log_abs_coef, const Aggregation& agg)
    {
        samples += agg.acc.count();
        log_weights.merge(agg.log_weights);
        if (agg.acc.count() > agg.acc.zero_count()) {
            log_sum_abs = log_add_exp(log_sum_abs, log_abs_coef + agg.acc.log_abs_total());
            log_sum_sq = log_add_exp(log_sum_sq, 2.0 * log_abs_coef + agg.acc.log_sq_total());
        }
    }

    MomentEstimate estimate(Representation rep) const
    {
        MomentEstimate est;
        est.mean = mean.value();
        est.standard_error = std::sqrt(std::max(0.0, var.value()));
        est.samples = samples;
        est.ess = log_sum_sq == -std::numeric_limits<double>::infinity()
            ? static_cast<double>(samples)
            : std::exp(2.0 * log_sum_abs - log_sum_sq);
        est.log_weights = stats_of(log_weights);
        est.representation = rep;
        if (!std::isfinite(est.mean) || !std::isfinite(est.standard_error))
            throw NumericError("moment estimate is non-finite (max log weight " +
                               std::to_string(est.log_weights.max) + ")");
        return est;
    }
};

} // namespace

MomentEstimate moment_u_free(int k, double t, std::span<const double> x, const SignedMeasure& u0,
                             const CovarianceModel& model, double eps, const McConfig& mc)
{
    const double levels[1] = {eps};
    auto agg = run_free_levels(k, t, x, u0, model, levels, mc);
    return finalize(agg[0], Representation::free_bm);
}

LadderMoment moment_u_free_ladder(int k, double t, std::span<const double> x,
                                  const SignedMeasure& u0, const CovarianceModel& model,
                                  std::span<const double> eps_ladder, const McConfig& mc)
{
    check(eps_ladder.size() >= 3, "moment_u_free_ladder: ladder needs at least 3 levels");
    for (std::size_t i = 1; i < eps_ladder.size(); ++i)
        check(eps_ladder[i] < eps_ladder[i - 1] && eps_ladder[i] > 0.0,
              "moment_u_free_ladder: ladder must be strictly decreasing and positive");

    auto agg = run_free_levels(k, t, x, u0, model, eps_ladder, mc);
    LadderMoment out;
    out.eps.assign(eps_ladder.begin(), eps_ladder.end());
    std::vector<double> means;
    for (const auto& a : agg) {
        out.levels.push_back(finalize(a, Representation::free_bm));
        means.push_back(out.levels.back().mean);
    }
    const SqrtExtrapolation ex = extrapolate_in_sqrt_eps(eps_ladder, means);
    out.extrapolated = ex.value;
    out.residual = ex.residual;
    out.diverged = ex.diverged;
    return out;
}

MomentEstimate moment_u_bridge(int k, double t, std::span<const double> x, const SignedMeasure& u0,
                               const CovarianceModel& model, double eps, const McConfig& mc)
{
    check(k >= 1, "moment_u_bridge: k must be >= 1");
    check(t > 0.0, "moment_u_bridge: t must be positive");
    check(static_cast<int>(x.size()) == model.dimension(), "moment_u_bridge: dimension mismatch");
    check(u0.dimension() == model.dimension(), "moment_u_bridge: u0 dimension mismatch");
    check(mc.samples >= 1, "moment_u_bridge: need at least one sample");

    const int d = model.dimension();
    const bool needs_paths = k >= 2 && model.kind() != CovarianceKind::zero;
    if (needs_paths && model.kind() == CovarianceKind::white_noise)
        check(eps > 0.0, "moment_u_bridge: white noise requires eps > 0");

    const auto choices = endpoint_choices(u0);
    const std::int64_t n_tuples = tuple_count(choices.size(), k, mc.max_atom_tuples);

    // zero-to-zero bridges on [0, t]; endpoint differences ride on the offsets
    const Point zeros(d, 0.0);
    const PinSchedule schedule(d, t, zeros, {Pin{t, zeros}});
    const std::vector<double> grid = make_grid(schedule, mc.steps_per_segment);
    const double sqrt_t = std::sqrt(t);

    std::vector<double> diff(d);
    TupleCombiner combiner;
    std::vector<const EndpointChoice*> tuple(k);

    for (std::int64_t tuple_idx = 0; tuple_idx < n_tuples; ++tuple_idx) {
        std::int64_t rem = tuple_idx;
        bool any_density = false;
        for (int j = 0; j < k; ++j) {
            tuple[j] = &choices[rem % choices.size()];
            rem /= choices.size();
            any_density |= tuple[j]->is_density;
        }

        // exact outer factor from the atom choices
        double coef = 1.0;
        for (int j = 0; j < k; ++j) {
            if (tuple[j]->is_density) continue;
            const auto& a = *tuple[j]->atom;
            for (int c = 0; c < d; ++c) diff[c] = x[c] - a.location[c];
            coef *= a.weight * heat_kernel(t, diff);
        }

        // offsets are tuple constants when every choice is an atom
        PairOffsets fixed_offsets(k, d);
        if (!any_density && needs_paths) {
            for (int j = 0; j < k; ++j)
                for (int l = j + 1; l < k; ++l) {
                    Point delta(d);
                    for (int c = 0; c < d; ++c)
                        delta[c] = tuple[j]->atom->location[c] - tuple[l]->atom->location[c];
                    fixed_offsets.set(j, l, OffsetFunction::linear(0.0, zeros, t, std::move(delta)));
                }
        }

        struct Ctx {
            std::vector<SampledPath> paths;
            std::vector<Point> theta;
        };
        auto make_ctx = [&] {
            Ctx c;
            c.paths.resize(k);
            c.theta.assign(k, Point(d, 0.0));
            return c;
        };

        auto eval = [&](Ctx& ctx, std::int64_t i) -> SampleRecord {
            SampleRecord rec;
            if (any_density) {
                NormalStream theta_stream(
                    StreamKey{mc.seed, static_cast<std::uint64_t>(i),
                              static_cast<std::uint32_t>(tuple_idx * (k + 1) + k)});
                for (int j = 0; j < k; ++j) {
                    if (tuple[j]->is_density) {
                        for (int c = 0; c < d; ++c)
                            ctx.theta[j][c] = x[c] + sqrt_t * theta_stream.normal();
                        fold_factor(u0.density_at(ctx.theta[j]), rec.sign, rec.log_abs);
                    } else {
                        ctx.theta[j] = tuple[j]->atom->location;
                    }
                }
            }
            if (needs_paths && rec.sign != 0.0) {
                for (int j = 0; j < k; ++j) {
                    NormalStream stream(
                        StreamKey{mc.seed, static_cast<std::uint64_t>(i),
                                  static_cast<std::uint32_t>(tuple_idx * (k + 1) + j)});
                    sample_pinned_path_on_grid(schedule, grid, stream, ctx.paths[j]);
                }
                if (any_density) {
                    PairOffsets offsets(k, d);
                    for (int j = 0; j < k; ++j)
                        for (int l = j + 1; l < k; ++l) {
                            Point delta(d);
                            for (int c = 0; c < d; ++c)
                                delta[c] = ctx.theta[j][c] - ctx.theta[l][c];
                            offsets.set(j, l,
                                        OffsetFunction::linear(0.0, zeros, t, std::move(delta)));
                        }
                    rec.log_abs += interaction_log_weight(ctx.paths, offsets, model, eps);
                } else {
                    rec.log_abs += interaction_log_weight(ctx.paths, fixed_offsets, model, eps);
                }
            }
            return rec;
        };

        Aggregation agg;
        run_indexed_samples<SampleRecord>(mc.samples, mc.workers, make_ctx, eval,
                                          [&](const SampleRecord& r) { agg.add(r); });
        combiner.add_direct(coef, agg);
    }
    return combiner.estimate(Representation::bridge_conditioned);
}

MomentEstimate moment_derivative(const DerivativeSpec& spec, double t, std::span<const double> x,
                                 const SignedMeasure& u0, const CovarianceModel& model, double eps,
                                 const McConfig& mc)
{
    const int d = model.dimension();
    const int k = spec.moment_k;
    const int n_pins = spec.order;
    spec.validate(t, d);
    check(t > 0.0, "moment_derivative: t must be positive");
    check(static_cast<int>(x.size()) == d, "moment_derivative: dimension mismatch");
    check(u0.dimension() == d, "moment_derivative: u0 dimension mismatch");
    check(mc.samples >= 1, "moment_derivative: need at least one sample");

    const bool needs_paths = model.kind() != CovarianceKind::zero;
    if (needs_paths && model.kind() == CovarianceKind::white_noise)
        check(eps > 0.0, "moment_derivative: white noise requires eps > 0");

    // log prefactor: k * [sum of inter-pin heat kernels + final segment kernel]
    double log_prefactor = 0.0;
    std::vector<double> diff(d);
    for (int m = 0; m + 1 < n_pins; ++m) {
        for (int c = 0; c < d; ++c) diff[c] = spec.z[m + 1][c] - spec.z[m][c];
        log_prefactor += log_heat_kernel(spec.r[m + 1] - spec.r[m], diff);
    }
    for (int c = 0; c < d; ++c) diff[c] = x[c] - spec.z[n_pins - 1][c];
    log_prefactor += log_heat_kernel(t - spec.r[n_pins - 1], diff);
    log_prefactor *= static_cast<double>(k);

    // pins at t - r_N < ... < t - r_1 with values z_N ... z_1; theta rides on
    // the final pin at time t
    std::vector<Pin> base_pins;
    for (int m = n_pins - 1; m >= 0; --m) base_pins.push_back(Pin{t - spec.r[m], spec.z[m]});
    base_pins.push_back(Pin{t, Point(d, 0.0)});
    const Point start(x.begin(), x.end());
    const PinSchedule template_schedule(d, t, start, base_pins);
    const std::vector<double> grid = make_grid(template_schedule, mc.steps_per_segment);
    const PairOffsets no_offsets(k, d);

    const double r1 = spec.r[0];
    const Point& z1 = spec.z[0];
    const double sqrt_r1 = std::sqrt(r1);

    const auto choices = endpoint_choices(u0);
    const std::int64_t n_tuples = tuple_count(choices.size(), k, mc.max_atom_tuples);

    TupleCombiner combiner;
    std::vector<const EndpointChoice*> tuple(k);

    for (std::int64_t tuple_idx = 0; tuple_idx < n_tuples; ++tuple_idx) {
        std::int64_t rem = tuple_idx;
        bool any_density = false;
        for (int j = 0; j < k; ++j) {
            tuple[j] = &choices[rem % choices.size()];
            rem /= choices.size();
            any_density |= tuple[j]->is_density;
        }

        double sign_coef = 1.0;
        double log_coef = log_prefactor;
        for (int j = 0; j < k; ++j) {
            if (tuple[j]->is_density) continue;
            const auto& a = *tuple[j]->atom;
            for (int c = 0; c < d; ++c) diff[c] = z1[c] - a.location[c];
            if (a.weight < 0.0) sign_coef = -sign_coef;
            log_coef += std::log(std::abs(a.weight)) + log_heat_kernel(r1, diff);
        }

        struct Ctx {
            std::vector<SampledPath> paths;
            std::vector<Pin> pins;
            Point theta;
        };
        auto make_ctx = [&] {
            Ctx c;
            c.paths.resize(k);
            c.pins = base_pins;
            c.theta.assign(d, 0.0);
            return c;
        };

        auto eval = [&](Ctx& ctx, std::int64_t i) -> SampleRecord {
            SampleRecord rec;
            if (!needs_paths) {
                // interaction weight is identically one
                if (any_density) {
                    NormalStream theta_stream(
                        StreamKey{mc.seed, static_cast<std::uint64_t>(i),
                                  static_cast<std::uint32_t>(tuple_idx * (k + 1) + k)});
                    for (int j = 0; j < k; ++j) {
                        if (!tuple[j]->is_density) continue;
                        for (int c = 0; c < d; ++c)
                            ctx.theta[c] = z1[c] + sqrt_r1 * theta_stream.normal();
                        fold_factor(u0.density_at(ctx.theta), rec.sign, rec.log_abs);
                    }
                }
                return rec;
            }
            NormalStream theta_stream(
                StreamKey{mc.seed, static_cast<std::uint64_t>(i),
                          static_cast<std::uint32_t>(tuple_idx * (k + 1) + k)});
            for (int j = 0; j < k; ++j) {
                if (tuple[j]->is_density) {
                    for (int c = 0; c < d; ++c)
                        ctx.theta[c] = z1[c] + sqrt_r1 * theta_stream.normal();
                    fold_factor(u0.density_at(ctx.theta), rec.sign, rec.log_abs);
                    ctx.pins.back().value = ctx.theta;
                } else {
                    ctx.pins.back().value = tuple[j]->atom->location;
                }
                if (rec.sign == 0.0) return rec;
                const PinSchedule schedule(d, t, start, ctx.pins);
                NormalStream stream(
                    StreamKey{mc.seed, static_cast<std::uint64_t>(i),
                              static_cast<std::uint32_t>(tuple_idx * (k + 1) + j)});
                sample_pinned_path_on_grid(schedule, grid, stream, ctx.paths[j]);
            }
            rec.log_abs += interaction_log_weight(ctx.paths, no_offsets, model, eps);
            return rec;
        };

        Aggregation agg;
        run_indexed_samples<SampleRecord>(mc.samples, mc.workers, make_ctx, eval,
                                          [&](const SampleRecord& r) { agg.add(r); });
        combiner.add_log(sign_coef, log_coef, agg);
    }
    return combiner.estimate(Representation::derivative);
}

double corollary_bound(const DerivativeSpec& spec, double t, std::span<const double> x,
                       const SignedMeasure& u0, double C)
{
    const int d = static_cast<int>(x.size());
    spec.validate(t, d);
    check(C > 0.0, "corollary_bound: C must be positive");
    check(u0.dimension() == d, "corollary_bound: u0 dimension mismatch");

    const SignedMeasure abs_u0 = u0.absolute();
    double value = std::pow(C, 1.0 / static_cast<double>(spec.moment_k));
    value *= heat_convolve(abs_u0, spec.r[0], spec.z[0]);
    std::vector<double> diff(d);
    for (int m = 0; m + 1 < spec.order; ++m) {
        for (int c = 0; c < d; ++c) diff[c] = spec.z[m + 1][c] - spec.z[m][c];
        value *= heat_kernel(spec.r[m + 1] - spec.r[m], diff);
    }
    for (int c = 0; c < d; ++c) diff[c] = x[c] - spec.z[spec.order - 1][c];
    value *= heat_kernel(t - spec.r[spec.order - 1], diff);
    return value;
}

} // namespace pamfk
