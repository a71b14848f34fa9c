#include "vvb/noise.hpp"

#include <algorithm>
#include <cmath>

#include "vvb/rng.hpp"

namespace vvb {

JonesField perturb_field(const VVBState& state, const GridSpec& grid,
                         const NoiseConfig& cfg, std::uint64_t sample_index) {
    cfg.validate();

    Rng rng(cfg.seed, sample_index, Rng::Stage::field_noise);
    RenderParams p;
    p.center_x = rng.normal(cfg.center_jitter_sigma * grid.waist);
    p.center_y = rng.normal(cfg.center_jitter_sigma * grid.waist);
    p.waist_factor = 1.0 + rng.normal(cfg.waist_jitter_rel);
    // A pathological draw could make the waist non-positive; keep it physical.
    p.waist_factor = std::max(p.waist_factor, 0.05);
    p.impurity_eps = cfg.impurity_eps;
    p.pol_rotation = rng.normal(cfg.pol_crosstalk_rad);
    return render_with_params(state, grid, p);
}

StokesImage perturb_stokes(const StokesImage& img, const NoiseConfig& cfg,
                           std::uint64_t sample_index) {
    cfg.validate();

    // Without intensity-side noise the analyzer model reduces to the identity;
    // running it anyway would garble Stokes components near the rounding floor
    // of 1 +/- s (the recomputed ratio is only faithful above ~1e-15).
    if (!cfg.perturbs_intensities()) return img;

    const std::size_t n = img.pixel_count();
    StokesImage out(img.resolution);
    Rng rng(cfg.seed, sample_index, Rng::Stage::stokes_noise);

    const double sigma = cfg.intensity_noise_rel;
    const double bg = cfg.background_rel; // intensity plane peaks at 1

    // Six analyzer intensities per pixel; peak of the noisy total fixes the
    // rescaling and the dark mask.
    std::vector<double> basis(n * 6);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double i0 = img.intensity[k];
        const double s[3] = {img.s1[k], img.s2[k], img.s3[k]};
        double* b = &basis[k * 6];
        for (int j = 0; j < 3; ++j) {
            b[2 * j + 0] = i0 * (1.0 + s[j]) * 0.5;
            b[2 * j + 1] = i0 * (1.0 - s[j]) * 0.5;
        }
        if (cfg.perturbs_intensities()) {
            for (int j = 0; j < 6; ++j)
                b[j] = std::max(0.0, b[j] * (1.0 + rng.normal(sigma)) + bg);
        }
        peak = std::max(peak, b[0] + b[1]);
    }
    if (peak <= 0.0) return out;

    const double threshold =
        cfg.perturbs_intensities() ? kDarkThresholdNoisy : kDarkThresholdClean;
    const double cutoff = threshold * peak;
    const double inv_peak = 1.0 / peak;
    for (std::size_t k = 0; k < n; ++k) {
        const double* b = &basis[k * 6];
        const double total = b[0] + b[1];
        out.intensity[k] = static_cast<float>(total * inv_peak);
        if (total < cutoff || total <= 0.0) continue;

        auto ratio = [](double p1, double p2) {
            const double s = p1 + p2;
            return s > 0.0 ? (p1 - p2) / s : 0.0;
        };
        store_stokes_triple(ratio(b[0], b[1]), ratio(b[2], b[3]), ratio(b[4], b[5]),
                            k, out);
    }
    return out;
}

} // namespace vvb
