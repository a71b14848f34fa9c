#pragma once

#include <cstdint>

#include "vvb/grid.hpp"
#include "vvb/optics.hpp"
#include "vvb/stokes.hpp"

namespace vvb {

/// Experimental-imperfection model. All draws are keyed by
/// (seed, sample_index, stage), so a dataset is reproducible regardless of
/// generation order. A default-constructed config is the identity.
struct NoiseConfig {
    std::uint64_t seed = 0;
    double center_jitter_sigma = 0.0; // beam-center displacement std, waist units
    double waist_jitter_rel = 0.0;    // relative waist std
    double impurity_eps = 0.0;        // p=1 radial admixture amplitude, [0, 1)
    double pol_crosstalk_rad = 0.0;   // global polarization-rotation std, radians
    double intensity_noise_rel = 0.0; // relative Gaussian noise on basis intensities
    double background_rel = 0.0;      // uniform background relative to peak intensity

    void validate() const {
        if (center_jitter_sigma < 0.0 || waist_jitter_rel < 0.0 ||
            pol_crosstalk_rad < 0.0 || intensity_noise_rel < 0.0 ||
            background_rel < 0.0)
            throw DomainError("NoiseConfig: sigmas must be >= 0");
        if (!(impurity_eps >= 0.0 && impurity_eps < 1.0))
            throw DomainError("NoiseConfig: impurity_eps must lie in [0, 1)");
    }

    bool is_identity() const {
        return center_jitter_sigma == 0.0 && waist_jitter_rel == 0.0 &&
               impurity_eps == 0.0 && pol_crosstalk_rad == 0.0 &&
               intensity_noise_rel == 0.0 && background_rel == 0.0;
    }

    bool perturbs_intensities() const {
        return intensity_noise_rel > 0.0 || background_rel > 0.0;
    }

    /// Stand-in for lab conditions; every noisy acceptance threshold is
    /// calibrated against this preset.
    static NoiseConfig labproxy(std::uint64_t seed = 0) {
        NoiseConfig cfg;
        cfg.seed = seed;
        cfg.center_jitter_sigma = 0.05;
        cfg.waist_jitter_rel = 0.03;
        cfg.impurity_eps = 0.15;
        cfg.pol_crosstalk_rad = 0.05;
        cfg.intensity_noise_rel = 0.03;
        cfg.background_rel = 0.02;
        return cfg;
    }

    bool operator==(const NoiseConfig&) const = default;
};

/// Render `state` with beam-center jitter, waist jitter, p=1 mode impurity
/// and a global polarization rotation, all drawn deterministically from
/// (cfg.seed, sample_index). An all-zero config reproduces render() bit for
/// bit.
JonesField perturb_field(const VVBState& state, const GridSpec& grid,
                         const NoiseConfig& cfg, std::uint64_t sample_index);

/// Detector-side noise: rebuild the six analyzer intensities from (S, I),
/// add relative Gaussian noise and a uniform background, clamp at zero and
/// recompute the Stokes ratios. Triples that leave the unit ball are
/// projected back onto it. The dark-pixel convention is re-applied with the
/// post-noise threshold when intensities were actually perturbed.
StokesImage perturb_stokes(const StokesImage& img, const NoiseConfig& cfg,
                           std::uint64_t sample_index);

} // namespace vvb
