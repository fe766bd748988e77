// rk4.hpp: fixed-step integration helpers shared by the solvers.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace d1ent {

/// Classical fourth-order Runge-Kutta step for y' = rhs(y). The systems here
/// are autonomous, so no time argument is threaded through.
template <class Vec, class Rhs>
Vec rk4_step(const Vec& y, double dt, Rhs&& rhs) {
    const Vec k1 = rhs(y);
    const Vec k2 = rhs(Vec(y + (0.5 * dt) * k1));
    const Vec k3 = rhs(Vec(y + (0.5 * dt) * k2));
    const Vec k4 = rhs(Vec(y + dt * k3));
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Output grid 0, every, 2*every, ... up to t_max (inclusive within rounding).
inline std::vector<double> make_output_grid(double t_max, double every) {
    if (!(every > 0.0) || !(t_max >= 0.0)) throw std::invalid_argument("make_output_grid: bad spacing");
    const auto n = static_cast<std::size_t>(std::floor(t_max / every + 1e-9));
    std::vector<double> times(n + 1);
    for (std::size_t k = 0; k <= n; ++k) times[k] = static_cast<double>(k) * every;
    return times;
}

/// Converts output times into step counts of size dt; throws when a time is
/// not an integer multiple of dt or the grid is not strictly increasing.
inline std::vector<std::size_t> steps_for_grid(const std::vector<double>& times, double dt) {
    std::vector<std::size_t> steps;
    steps.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (t < 0.0) throw std::invalid_argument("output grid: negative time");
        if (i > 0 && !(t > times[i - 1])) throw std::invalid_argument("output grid: times must be strictly increasing");
        const double k = std::round(t / dt);
        if (std::abs(k * dt - t) > 1e-9 * std::max(1.0, t))
            throw std::invalid_argument("output grid: times must be integer multiples of dt");
        steps.push_back(static_cast<std::size_t>(k));
    }
    return steps;
}

}  // namespace d1ent
