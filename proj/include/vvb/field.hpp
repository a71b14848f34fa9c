#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "vvb/grid.hpp"

namespace vvb {

/// Transverse Jones field in the circular basis: per-pixel complex pair
/// (E_L, E_R), stored as two row-major planes matching a GridSpec.
struct JonesField {
    GridSpec grid;
    std::vector<std::complex<double>> left;  // E_L, resolution^2 entries
    std::vector<std::complex<double>> right; // E_R

    JonesField() = default;
    explicit JonesField(const GridSpec& g)
        : grid(g), left(g.pixel_count()), right(g.pixel_count()) {}

    int resolution() const { return grid.resolution; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * grid.resolution + j;
    }

    bool is_finite() const {
        for (const auto& v : left)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        for (const auto& v : right)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    /// Total power sum(|E_L|^2 + |E_R|^2) * pixel_area.
    double total_power() const {
        double acc = 0.0;
        for (std::size_t k = 0; k < left.size(); ++k)
            acc += std::norm(left[k]) + std::norm(right[k]);
        return acc * grid.pixel_area();
    }
};

} // namespace vvb
