#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "vvb/errors.hpp"
#include "vvb/field.hpp"
#include "vvb/grid.hpp"

namespace vvb {

/// A vector vortex beam state on the higher-order Poincare sphere:
/// left-circular LG_{m1,0} weighted by cos(theta/2), right-circular
/// LG_{m2,0} weighted by e^{i phi} sin(theta/2).
struct VVBState {
    int m1 = -1;
    int m2 = 1;
    double theta = std::numbers::pi / 2;
    double phi = 0.0;

    VVBState() = default;
    VVBState(int m1_, int m2_, double theta_, double phi_)
        : m1(m1_), m2(m2_), theta(theta_), phi(reduce_phi(phi_)) {
        if (m1 == m2)
            throw DomainError("VVBState: m1 and m2 must differ");
        if (!(theta >= 0.0 && theta <= std::numbers::pi))
            throw DomainError("VVBState: theta must lie in [0, pi]");
    }

    /// Reduce an angle to [0, 2*pi). fmod is exact, so values already in
    /// range pass through unchanged.
    static double reduce_phi(double phi) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double r = std::fmod(phi, two_pi);
        if (r < 0.0) r += two_pi;
        if (r >= two_pi) r = 0.0;
        return r;
    }
};

/// Unnormalized Laguerre-Gauss amplitude LG_{m,p=0} at the beam waist:
/// (r*sqrt(2)/w)^|m| * exp(-r^2/w^2) * exp(i*m*az).
std::complex<double> lg_amplitude(int m, double r, double az, double w);

/// Same with radial index p = 1; carries the generalized Laguerre factor
/// L_1^{|m|}(2 r^2 / w^2) = |m| + 1 - 2 r^2 / w^2.
std::complex<double> lg_amplitude_p1(int m, double r, double az, double w);

/// Rendering knobs shared by the clean path and the noise module. The
/// defaults reproduce render() exactly; perturb_field() fills them from
/// seeded draws.
struct RenderParams {
    double center_x = 0.0;      // beam-center offset, waist units
    double center_y = 0.0;
    double waist_factor = 1.0;  // multiplies the nominal waist
    double impurity_eps = 0.0;  // p=1 admixture amplitude, in [0, 1)
    double pol_rotation = 0.0;  // global polarization rotation, radians
};

/// Synthesize the Jones field of `state` on `grid`. Each LG component is
/// L2-normalized on the grid before the cos/sin weighting, so the output
/// has total power 1 regardless of theta.
JonesField render(const VVBState& state, const GridSpec& grid);

/// render() with explicit imperfection parameters; render(state, grid) is
/// bit-identical to render_with_params(state, grid, {}).
JonesField render_with_params(const VVBState& state, const GridSpec& grid,
                              const RenderParams& params);

} // namespace vvb
