#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "pamfk/types.hpp"

namespace pamfk {

// Two-sided 99% / 99.9% normal quantiles, used by the statistical gates.
inline constexpr double kZ995  = 2.5758293035489004;
inline constexpr double kZ9995 = 3.2905267314919255;

// Neumaier compensated summation. Deterministic for a fixed add order.
class KahanSum {
public:
    void add(double v)
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    void scale(double a)
    {
        sum_ *= a;
        comp_ *= a;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Streaming mean/variance (Welford).
class Welford {
public:
    void add(double v)
    {
        ++n_;
        const double d = v - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (v - mean_);
        if (v > max_) max_ = v;
    }

    void merge(const Welford& other)
    {
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double delta = other.mean_ - mean_;
        const std::int64_t n = n_ + other.n_;
        m2_ += other.m2_ +
               delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) /
                   static_cast<double>(n);
        mean_ += delta * static_cast<double>(other.n_) / static_cast<double>(n);
        n_ = n;
        if (other.max_ > max_) max_ = other.max_;
    }

    std::int64_t count() const { return n_; }
    double mean() const { return n_ > 0 ? mean_ : 0.0; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double max() const { return max_; }

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double max_ = -std::numeric_limits<double>::infinity();
};

// Streaming accumulator for signed values given as (sign, log|value|).
// All sums are kept max-shifted so that exp() never overflows while
// accumulating; only the final mean/se may overflow, which callers treat
// as an error state. Deterministic for a fixed add order.
class LogMeanAccumulator {
public:
    // sign in {-1, 0, +1}; log_abs may be -inf only when sign == 0.
    void add(double sign, double log_abs)
    {
        ++n_;
        if (sign == 0.0 || log_abs == -std::numeric_limits<double>::infinity()) {
            ++n_zero_;
            return;
        }
        if (log_abs > shift_) rescale(log_abs);
        const double e = std::exp(log_abs - shift_);
        signed_.add(sign * e);
        abs_.add(e);
        sq_.add(e * e);
    }

    std::int64_t count() const { return n_; }
    std::int64_t zero_count() const { return n_zero_; }

    // log |sum of values| and its sign
    double sum_sign() const
    {
        const double s = signed_.value();
        return s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
    }
    double log_abs_sum() const
    {
        const double s = std::abs(signed_.value());
        return s > 0 ? shift_ + std::log(s) : -std::numeric_limits<double>::infinity();
    }

    double mean() const
    {
        if (n_ == 0) return 0.0;
        const double s = signed_.value();
        if (s == 0.0) return 0.0;
        return sum_sign() * std::exp(log_abs_sum() - std::log(static_cast<double>(n_)));
    }

    // sqrt(sample variance / n)
    double standard_error() const
    {
        if (n_ < 2) return 0.0;
        const double nf = static_cast<double>(n_);
        const double a = signed_.value();
        double q = sq_.value() - a * a / nf;  // shifted sum of squared deviations
        if (q < 0.0) q = 0.0;                 // roundoff; variance is nonnegative
        if (q == 0.0) return 0.0;
        return std::exp(shift_ + 0.5 * std::log(q / (nf - 1.0)) - 0.5 * std::log(nf));
    }

    // (sum |v|)^2 / sum v^2, the usual weighted-sample diagnostic.
    double effective_sample_size() const
    {
        const double c = abs_.value();
        const double b = sq_.value();
        if (b <= 0.0) return static_cast<double>(n_ - n_zero_);
        return c * c / b;
    }

    // log(sum |v|) and log(sum v^2), for pooling diagnostics across runs
    double log_abs_total() const
    {
        const double c = abs_.value();
        return c > 0 ? shift_ + std::log(c) : -std::numeric_limits<double>::infinity();
    }
    double log_sq_total() const
    {
        const double b = sq_.value();
        return b > 0 ? 2.0 * shift_ + std::log(b) : -std::numeric_limits<double>::infinity();
    }

private:
    void rescale(double new_shift)
    {
        if (shift_ == -std::numeric_limits<double>::infinity()) {
            shift_ = new_shift;
            return;
        }
        const double f = std::exp(shift_ - new_shift);
        signed_.scale(f);
        abs_.scale(f);
        sq_.scale(f * f);
        shift_ = new_shift;
    }

    double shift_ = -std::numeric_limits<double>::infinity();
    KahanSum signed_, abs_, sq_;
    std::int64_t n_ = 0;
    std::int64_t n_zero_ = 0;
};

// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = a > b ? a : b;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Wilson-Hilferty approximation to the chi-square quantile; accurate to a
// fraction of a percent for the degrees of freedom used in the tests.
inline double chi_square_quantile(double dof, double z)
{
    const double a = 2.0 / (9.0 * dof);
    const double c = 1.0 - a + z * std::sqrt(a);
    return dof * c * c * c;
}

} // namespace pamfk
