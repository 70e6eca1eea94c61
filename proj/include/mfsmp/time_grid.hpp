#pragma once

// ===== Uniform time grid =====

#include <cstddef>
#include <stdexcept>

namespace mfsmp {

/// Uniform grid 0 = t_0 < t_1 < ... < t_K = T with step dt = T / K.
/// Trajectories carry K + 1 node values; increments carry K entries.
struct TimeGrid {
    double T = 1.0;
    std::size_t K = 1;

    TimeGrid() = default;
    TimeGrid(double horizon, std::size_t steps) : T(horizon), K(steps) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (K < 1) throw std::invalid_argument("TimeGrid: need at least one step");
    }

    double dt() const { return T / static_cast<double>(K); }
    double node(std::size_t k) const { return dt() * static_cast<double>(k); }
    std::size_t nodes() const { return K + 1; }

    bool operator==(const TimeGrid&) const = default;
};

}  // namespace mfsmp
