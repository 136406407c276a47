#include "pamfk/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "pamfk/kernels.hpp"
#include "pamfk/stats.hpp"

namespace pamfk {

OffsetFunction::OffsetFunction(int dimension, std::vector<double> node_times,
                               std::vector<double> node_values)
    : dimension_(dimension), node_times_(std::move(node_times)), node_values_(std::move(node_values))
{
    check(dimension_ >= 1, "OffsetFunction: dimension must be positive");
    check(node_values_.size() == node_times_.size() * static_cast<std::size_t>(dimension_),
          "OffsetFunction: node value size mismatch");
    for (std::size_t i = 1; i < node_times_.size(); ++i)
        check(node_times_[i] > node_times_[i - 1], "OffsetFunction: node times must increase");
}

OffsetFunction OffsetFunction::zero(int dimension)
{
    return OffsetFunction(dimension, {}, {});
}

OffsetFunction OffsetFunction::linear(double t0, Point p0, double t1, Point p1)
{
    check(t1 > t0, "OffsetFunction: node times must increase");
    const int d = static_cast<int>(p0.size());
    check(p1.size() == p0.size(), "OffsetFunction: node dimension mismatch");
    std::vector<double> values;
    values.reserve(2 * d);
    values.insert(values.end(), p0.begin(), p0.end());
    values.insert(values.end(), p1.begin(), p1.end());
    return OffsetFunction(d, {t0, t1}, std::move(values));
}

void OffsetFunction::eval_into(double s, std::span<double> out) const
{
    if (node_times_.empty()) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    check(s >= node_times_.front() && s <= node_times_.back(),
          "OffsetFunction: evaluation outside the covered window");
    const auto it = std::upper_bound(node_times_.begin(), node_times_.end(), s);
    std::size_t hi = std::min<std::size_t>(node_times_.size() - 1,
                                           static_cast<std::size_t>(it - node_times_.begin()));
    if (hi == 0) hi = 1;
    const std::size_t lo = hi - 1;
    const double w = (s - node_times_[lo]) / (node_times_[hi] - node_times_[lo]);
    for (int c = 0; c < dimension_; ++c)
        out[c] = (1.0 - w) * node_values_[lo * dimension_ + c] + w * node_values_[hi * dimension_ + c];
}

PairOffsets::PairOffsets(int k, int dimension) : k_(k)
{
    check(k >= 1, "PairOffsets: k must be >= 1");
    table_.assign(static_cast<std::size_t>(k) * k, OffsetFunction::zero(dimension));
}

void PairOffsets::set(int j, int l, OffsetFunction offset)
{
    check(0 <= j && j < l && l < k_, "PairOffsets: need 0 <= j < l < k");
    table_[static_cast<std::size_t>(j) * k_ + l] = std::move(offset);
}

const OffsetFunction& PairOffsets::at(int j, int l) const
{
    check(0 <= j && j < l && l < k_, "PairOffsets: need 0 <= j < l < k");
    return table_[static_cast<std::size_t>(j) * k_ + l];
}

double pair_interaction(const SampledPath& a, const SampledPath& b, const OffsetFunction& offset,
                        const CovarianceModel& model, double eps)
{
    check(a.dimension == b.dimension, "pair_interaction: path dimension mismatch");
    check(a.times == b.times, "pair_interaction: paths must share one grid");
    if (model.kind() == CovarianceKind::zero) return 0.0;

    const int d = a.dimension;
    std::vector<double> diff(d), alpha(d);
    const std::size_t n = a.times.size();

    KahanSum sum;
    double prev_val = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto xa = a.at(i);
        const auto xb = b.at(i);
        if (!offset.is_zero()) {
            offset.eval_into(a.times[i], alpha);
            for (int c = 0; c < d; ++c) diff[c] = xa[c] - xb[c] + alpha[c];
        } else {
            for (int c = 0; c < d; ++c) diff[c] = xa[c] - xb[c];
        }
        const double val = model.covariance_at(eps, diff);
        if (i > 0) sum.add(0.5 * (prev_val + val) * (a.times[i] - a.times[i - 1]));
        prev_val = val;
    }
    return sum.value();
}

double interaction_log_weight(std::span<const SampledPath> paths, const PairOffsets& offsets,
                              const CovarianceModel& model, double eps)
{
    const int k = static_cast<int>(paths.size());
    check(k >= 1, "interaction_log_weight: need at least one path");
    check(offsets.copies() == k, "interaction_log_weight: offset table size mismatch");
    KahanSum sum;
    for (int j = 0; j < k; ++j)
        for (int l = j + 1; l < k; ++l)
            sum.add(pair_interaction(paths[j], paths[l], offsets.at(j, l), model, eps));
    return sum.value();
}

SqrtExtrapolation extrapolate_in_sqrt_eps(std::span<const double> eps_ladder,
                                          std::span<const double> values)
{
    const std::size_t n = eps_ladder.size();
    check(n >= 3, "extrapolate_in_sqrt_eps: ladder needs at least 3 levels");
    check(values.size() == n, "extrapolate_in_sqrt_eps: size mismatch");
    for (std::size_t i = 1; i < n; ++i)
        check(eps_ladder[i] < eps_ladder[i - 1] && eps_ladder[i] > 0.0,
              "extrapolate_in_sqrt_eps: ladder must be strictly decreasing and positive");

    SqrtExtrapolation out;

    // Divergence screen: successive differences of a convergent sqrt(eps)
    // family shrink along the ladder; growing differences (or huge values)
    // mean there is no finite limit to extrapolate.
    double prev_diff = -1.0;
    int growing = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double diff = std::abs(values[i + 1] - values[i]);
        if (prev_diff >= 0.0 && diff >= prev_diff && diff > 1e-12) ++growing;
        prev_diff = diff;
    }
    if (growing >= static_cast<int>(n) - 2 ||
        std::abs(values[n - 1]) > 1e12) {
        out.diverged = true;
        out.value = values[n - 1];
        out.residual = prev_diff;
        return out;
    }

    // Neville tableau in h = sqrt(eps), evaluated at h = 0.
    std::vector<double> h(n), p(values.begin(), values.end());
    for (std::size_t i = 0; i < n; ++i) h[i] = std::sqrt(eps_ladder[i]);
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = 0; i + level < n; ++i)
            p[i] = (h[i] * p[i + 1] - h[i + level] * p[i]) / (h[i] - h[i + level]);

    // residual: difference between the full-tableau value and the value
    // obtained without the coarsest level
    std::vector<double> p2(values.begin() + 1, values.end());
    std::vector<double> h2(h.begin() + 1, h.end());
    for (std::size_t level = 1; level < n - 1; ++level)
        for (std::size_t i = 0; i + level < n - 1; ++i)
            p2[i] = (h2[i] * p2[i + 1] - h2[i + level] * p2[i]) / (h2[i] - h2[i + level]);

    out.value = p[0];
    out.residual = std::abs(p[0] - p2[0]);
    return out;
}

WhiteNoiseInteraction whitenoise_pair_interaction(const SampledPath& a, const SampledPath& b,
                                                  const OffsetFunction& offset,
                                                  std::span<const double> eps_ladder)
{
    check(a.dimension == 1, "whitenoise_pair_interaction: d = 1 only");
    static const CovarianceModel wn = CovarianceModel::create(CovarianceSpec::white_noise(1));

    WhiteNoiseInteraction out;
    out.eps.assign(eps_ladder.begin(), eps_ladder.end());
    out.values.reserve(eps_ladder.size());
    for (double eps : eps_ladder)
        out.values.push_back(pair_interaction(a, b, offset, wn, eps));

    const SqrtExtrapolation ex = extrapolate_in_sqrt_eps(eps_ladder, out.values);
    out.extrapolated = ex.value;
    out.residual = ex.residual;
    out.diverged = ex.diverged;
    return out;
}

} // namespace pamfk
