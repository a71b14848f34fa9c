#pragma once

#include <cstdint>
#include <vector>

#include "vvb/field.hpp"

namespace vvb {

/// Per-pixel normalized Stokes parameters plus total intensity.
/// Planes are row-major float arrays of resolution^2 entries; intensity is
/// rescaled so its maximum is 1. Pixels below the dark threshold carry the
/// unpolarized convention (0, 0, 0). At every lit pixel
/// s1^2 + s2^2 + s3^2 <= 1 + 1e-9 by construction.
struct StokesImage {
    int resolution = 0;
    std::vector<float> s1, s2, s3;
    std::vector<float> intensity;

    StokesImage() = default;
    explicit StokesImage(int res)
        : resolution(res),
          s1(static_cast<std::size_t>(res) * res, 0.0f),
          s2(static_cast<std::size_t>(res) * res, 0.0f),
          s3(static_cast<std::size_t>(res) * res, 0.0f),
          intensity(static_cast<std::size_t>(res) * res, 0.0f) {}

    std::size_t pixel_count() const { return s1.size(); }

    bool operator==(const StokesImage&) const = default;
};

/// 8-bit RGB view of a Stokes image.
struct RGBImage {
    int resolution = 0;
    std::vector<std::uint8_t> rgb; // interleaved r,g,b, row-major

    bool operator==(const RGBImage&) const = default;
};

/// Fraction of the peak intensity below which a pixel counts as dark.
inline constexpr double kDarkThresholdClean = 1e-6;
/// Post-noise replacement threshold (masks the injected noise floor).
inline constexpr double kDarkThresholdNoisy = 1e-2;

/// Project the Jones field onto the H/V, D/A, L/R analyzer pairs and form
/// the three normalized intensity differences. Basis convention (frozen):
///   H = (e_L + e_R)/sqrt(2),  V = -i (e_L - e_R)/sqrt(2),
///   D = (H + V)/sqrt(2),      A = (H - V)/sqrt(2).
StokesImage stokes(const JonesField& field, double dark_threshold = kDarkThresholdClean);

/// Affine color map channel = round(255 * (s + 1) / 2); unpolarized-convention
/// pixels land exactly on grey (128, 128, 128).
RGBImage to_rgb(const StokesImage& img);

/// Clamp a Stokes triple into the closed unit ball and round to float such
/// that the rounded values still satisfy s1^2+s2^2+s3^2 <= 1 + 1e-9.
void store_stokes_triple(double s1, double s2, double s3, std::size_t k,
                         StokesImage& out);

} // namespace vvb
