#include "pamfk/bridges.hpp"

#include <algorithm>
#include <cmath>

namespace pamfk {

PinSchedule::PinSchedule(int dimension, double horizon, Point start, std::vector<Pin> pins)
    : dimension_(dimension), horizon_(horizon), start_(std::move(start)), pins_(std::move(pins))
{
    check(dimension_ >= 1, "PinSchedule: dimension must be positive");
    check(horizon_ > 0.0, "PinSchedule: horizon must be positive");
    check(static_cast<int>(start_.size()) == dimension_, "PinSchedule: start dimension mismatch");
    double prev = 0.0;
    for (const auto& pin : pins_) {
        check(pin.time > prev, "PinSchedule: pin times must be strictly increasing in (0, horizon]");
        check(pin.time <= horizon_, "PinSchedule: pin time beyond horizon");
        check(static_cast<int>(pin.value.size()) == dimension_,
              "PinSchedule: pin value dimension mismatch");
        prev = pin.time;
    }
}

Point PinSchedule::bridge_mean(double s) const
{
    check(s >= 0.0 && s <= horizon_, "bridge_mean: time outside [0, horizon]");
    const Point* left = &start_;
    double t_left = 0.0;
    for (const auto& pin : pins_) {
        if (s <= pin.time) {
            const double w = (s - t_left) / (pin.time - t_left);
            Point out(dimension_);
            for (int i = 0; i < dimension_; ++i)
                out[i] = (1.0 - w) * (*left)[i] + w * pin.value[i];
            return out;
        }
        left = &pin.value;
        t_left = pin.time;
    }
    return *left;  // conditional mean is constant after the last pin
}

SampledPath SampledPath::slice(std::size_t i0, std::size_t i1) const
{
    SampledPath out;
    out.dimension = dimension;
    out.times.assign(times.begin() + i0, times.begin() + i1 + 1);
    out.values.assign(values.begin() + i0 * dimension, values.begin() + (i1 + 1) * dimension);
    return out;
}

std::vector<double> make_grid(const PinSchedule& schedule, int steps_per_segment)
{
    check(steps_per_segment >= 1, "make_grid: steps_per_segment must be >= 1");
    std::vector<double> grid;
    grid.push_back(0.0);
    double prev = 0.0;
    auto extend = [&](double next) {
        for (int i = 1; i < steps_per_segment; ++i)
            grid.push_back(prev + (next - prev) * i / steps_per_segment);
        grid.push_back(next);
        prev = next;
    };
    for (const auto& pin : schedule.pins()) extend(pin.time);
    if (prev < schedule.horizon()) extend(schedule.horizon());
    return grid;
}

void sample_pinned_path_on_grid(const PinSchedule& schedule, const std::vector<double>& grid,
                                NormalStream& stream, SampledPath& out)
{
    const int d = schedule.dimension();
    const std::size_t n = grid.size();
    out.dimension = d;
    out.times = grid;
    out.values.resize(n * d);

    std::copy(schedule.start().begin(), schedule.start().end(), out.values.begin());

    std::size_t i = 0;  // index of the segment's left endpoint in the grid
    for (const auto& pin : schedule.pins()) {
        // locate the pin in the grid
        std::size_t j = i;
        while (grid[j] < pin.time) ++j;

        const double b = pin.time;
        for (std::size_t m = i; m + 1 < j; ++m) {
            const double s = grid[m];
            const double s_next = grid[m + 1];
            const double dt = s_next - s;
            const double rem = b - s;
            const double w = dt / rem;
            const double sd = std::sqrt(dt * (b - s_next) / rem);
            for (int c = 0; c < d; ++c) {
                const double cur = out.values[m * d + c];
                out.values[(m + 1) * d + c] =
                    cur + w * (pin.value[c] - cur) + sd * stream.normal();
            }
        }
        // the pin itself is assigned exactly
        std::copy(pin.value.begin(), pin.value.end(), out.values.begin() + j * d);
        i = j;
    }

    // free Brownian tail after the last pin (or the whole path without pins)
    for (std::size_t m = i; m + 1 < n; ++m) {
        const double sd = std::sqrt(grid[m + 1] - grid[m]);
        for (int c = 0; c < d; ++c)
            out.values[(m + 1) * d + c] = out.values[m * d + c] + sd * stream.normal();
    }
}

SampledPath sample_pinned_path(const PinSchedule& schedule, int steps_per_segment,
                               NormalStream& stream)
{
    const std::vector<double> grid = make_grid(schedule, steps_per_segment);
    SampledPath out;
    sample_pinned_path_on_grid(schedule, grid, stream, out);
    return out;
}

} // namespace pamfk
