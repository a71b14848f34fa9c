#pragma once

#include <cstdint>

#include "vvb/errors.hpp"

namespace vvb {

/// Square sampling grid in the transverse plane. Coordinates are measured in
/// the same units as the beam waist (default: waist units, w = 1).
///
/// Pixel (i, j) is centered at
///   x = -half_extent + (j + 0.5) * (2 * half_extent / resolution)
///   y = -half_extent + (i + 0.5) * (2 * half_extent / resolution)
/// so row 0 holds the most negative y and y increases with the row index.
struct GridSpec {
    int resolution = 64;
    double half_extent = 4.0;
    double waist = 1.0;

    GridSpec() = default;
    GridSpec(int res, double half_ext, double w)
        : resolution(res), half_extent(half_ext), waist(w) {
        validate();
    }

    void validate() const {
        if (resolution < 8)
            throw DomainError("GridSpec: resolution must be >= 8");
        if (!(half_extent > 0.0))
            throw DomainError("GridSpec: half_extent must be > 0");
        if (!(waist > 0.0))
            throw DomainError("GridSpec: waist must be > 0");
    }

    double step() const { return 2.0 * half_extent / resolution; }
    double pixel_area() const { return step() * step(); }
    double x(int j) const { return -half_extent + (j + 0.5) * step(); }
    double y(int i) const { return -half_extent + (i + 0.5) * step(); }
    int pixel_count() const { return resolution * resolution; }

    bool operator==(const GridSpec&) const = default;
};

} // namespace vvb
