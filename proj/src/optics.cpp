#include "vvb/optics.hpp"

#include <vector>

namespace vvb {

namespace {

double ipow(double x, int n) {
    double acc = 1.0;
    for (int k = 0; k < n; ++k) acc *= x;
    return acc;
}

double radial_envelope(int m, double r, double w) {
    const double rho = r * std::numbers::sqrt2 / w;
    return ipow(rho, std::abs(m)) * std::exp(-(r * r) / (w * w));
}

std::complex<double> azimuthal_phase(int m, double az) {
    return std::polar(1.0, m * az);
}

} // namespace

std::complex<double> lg_amplitude(int m, double r, double az, double w) {
    if (!(w > 0.0))
        throw DomainError("lg_amplitude: waist must be > 0");
    return radial_envelope(m, r, w) * azimuthal_phase(m, az);
}

std::complex<double> lg_amplitude_p1(int m, double r, double az, double w) {
    if (!(w > 0.0))
        throw DomainError("lg_amplitude_p1: waist must be > 0");
    const double u = 2.0 * r * r / (w * w);
    const double laguerre = std::abs(m) + 1.0 - u;
    return radial_envelope(m, r, w) * laguerre * azimuthal_phase(m, az);
}

namespace {

/// One polarization component: sqrt(1-eps^2)*LG_{m,0} + eps*LG_{m,1},
/// sampled over the (possibly shifted/rescaled) grid and L2-normalized.
std::vector<std::complex<double>> sampled_mode(int m, const GridSpec& grid,
                                               const RenderParams& p) {
    const int res = grid.resolution;
    const double w = grid.waist * p.waist_factor;
    const double c0 = std::sqrt(1.0 - p.impurity_eps * p.impurity_eps);
    const double c1 = p.impurity_eps;

    std::vector<std::complex<double>> mode(grid.pixel_count());
    double power = 0.0;
    for (int i = 0; i < res; ++i) {
        const double y = grid.y(i) - p.center_y;
        for (int j = 0; j < res; ++j) {
            const double x = grid.x(j) - p.center_x;
            const double r = std::hypot(x, y);
            const double az = std::atan2(y, x);
            std::complex<double> a = c0 * lg_amplitude(m, r, az, w);
            if (c1 != 0.0) a += c1 * lg_amplitude_p1(m, r, az, w);
            mode[static_cast<std::size_t>(i) * res + j] = a;
            power += std::norm(a);
        }
    }
    power *= grid.pixel_area();
    const double inv_norm = 1.0 / std::sqrt(power);
    for (auto& a : mode) a *= inv_norm;
    return mode;
}

} // namespace

JonesField render_with_params(const VVBState& state, const GridSpec& grid,
                              const RenderParams& params) {
    grid.validate();
    if (!(params.impurity_eps >= 0.0 && params.impurity_eps < 1.0))
        throw DomainError("render_with_params: impurity_eps must lie in [0, 1)");
    if (!(params.waist_factor > 0.0))
        throw DomainError("render_with_params: waist_factor must be > 0");

    const auto mode_l = sampled_mode(state.m1, grid, params);
    const auto mode_r = sampled_mode(state.m2, grid, params);

    // cos(pi/2) rounds to ~6e-17 rather than 0, which would leave a spurious
    // left component at the south pole; the pole weights are snapped exact.
    const double cl = state.theta == std::numbers::pi ? 0.0 : std::cos(state.theta / 2.0);
    const std::complex<double> cr =
        std::polar(1.0, state.phi) * std::sin(state.theta / 2.0);

    // A frame rotation by alpha multiplies the circular components by
    // e^{-i alpha} and e^{+i alpha}; identity when alpha == 0.
    const std::complex<double> rot_l = std::polar(1.0, -params.pol_rotation);
    const std::complex<double> rot_r = std::polar(1.0, params.pol_rotation);

    JonesField field(grid);
    for (std::size_t k = 0; k < mode_l.size(); ++k) {
        field.left[k] = rot_l * cl * mode_l[k];
        field.right[k] = rot_r * cr * mode_r[k];
    }
    return field;
}

JonesField render(const VVBState& state, const GridSpec& grid) {
    return render_with_params(state, grid, RenderParams{});
}

} // namespace vvb
