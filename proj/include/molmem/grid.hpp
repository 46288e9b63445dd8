#pragma once

#include <cmath>
#include <cstddef>

namespace molmem {

// Uniform sampling t_k = t0 + k*dt, k = 0..size-1 (atomic units).
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t size = 0;

    double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
    double t_end() const { return size == 0 ? t0 : time(size - 1); }

    static TimeGrid spanning(double t_begin, double t_end, double dt_max) {
        const auto steps = static_cast<std::size_t>(std::ceil((t_end - t_begin) / dt_max - 1e-9));
        const std::size_t n = steps == 0 ? 1 : steps;
        return TimeGrid{t_begin, (t_end - t_begin) / static_cast<double>(n), n + 1};
    }
};

}  // namespace molmem
