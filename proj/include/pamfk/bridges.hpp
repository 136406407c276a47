#pragma once

#include <span>
#include <vector>

#include "pamfk/rng.hpp"
#include "pamfk/types.hpp"

namespace pamfk {

struct Pin {
    double time = 0.0;
    Point value;
};

// A d-dimensional Brownian motion on [0, horizon] started at `start` and
// conditioned on finitely many pins at strictly increasing times. An empty
// pin list describes a free Brownian motion; when the last pin lies before
// the horizon the remainder of the path is unconditioned.
class PinSchedule {
public:
    PinSchedule(int dimension, double horizon, Point start, std::vector<Pin> pins);

    int dimension() const { return dimension_; }
    double horizon() const { return horizon_; }
    const Point& start() const { return start_; }
    const std::vector<Pin>& pins() const { return pins_; }

    // Conditional mean at time s: piecewise-linear through (0, start) and the
    // pins, constant after the last pin.
    Point bridge_mean(double s) const;

private:
    int dimension_;
    double horizon_;
    Point start_;
    std::vector<Pin> pins_;
};

// One realized path on a fixed grid. Values are stored row-major, d per
// grid time.
struct SampledPath {
    std::vector<double> times;
    std::vector<double> values;
    int dimension = 1;

    std::size_t size() const { return times.size(); }
    std::span<const double> at(std::size_t i) const
    {
        return {values.data() + i * dimension, static_cast<std::size_t>(dimension)};
    }
    std::span<double> at(std::size_t i)
    {
        return {values.data() + i * dimension, static_cast<std::size_t>(dimension)};
    }

    // Sub-path on grid indices [i0, i1] (inclusive); used by window tests.
    SampledPath slice(std::size_t i0, std::size_t i1) const;
};

// Uniform grid with `steps_per_segment` intervals between consecutive pins
// (and over the trailing free segment, if any). Pin times are grid points.
std::vector<double> make_grid(const PinSchedule& schedule, int steps_per_segment);

// Exact finite-dimensional sampling by sequential Gaussian conditioning:
// within each inter-pin segment every step draws from the exact conditional
// law given the current value and the segment endpoint. Pin values are
// assigned, not sampled, so they are bit-exact.
SampledPath sample_pinned_path(const PinSchedule& schedule, int steps_per_segment,
                               NormalStream& stream);

// Same, writing into a preallocated path whose `times` match `grid`.
void sample_pinned_path_on_grid(const PinSchedule& schedule, const std::vector<double>& grid,
                                NormalStream& stream, SampledPath& out);

} // namespace pamfk
