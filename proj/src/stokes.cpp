#include "vvb/stokes.hpp"

#include <algorithm>
#include <cmath>

#include "vvb/errors.hpp"

namespace vvb {

void store_stokes_triple(double s1, double s2, double s3, std::size_t k,
                         StokesImage& out) {
    double q = s1 * s1 + s2 * s2 + s3 * s3;
    if (q > 1.0) {
        const double inv = 1.0 / std::sqrt(q);
        s1 *= inv;
        s2 *= inv;
        s3 *= inv;
        q = 1.0;
    }
    float f1 = static_cast<float>(s1);
    float f2 = static_cast<float>(s2);
    float f3 = static_cast<float>(s3);
    // Rounding to float can push the norm past 1; shrink once below the
    // float quantum and re-round. One pass suffices.
    const double qf = double(f1) * f1 + double(f2) * f2 + double(f3) * f3;
    if (qf > 1.0) {
        const double shrink = (1.0 - 2.5e-7) / std::sqrt(qf);
        f1 = static_cast<float>(s1 * shrink);
        f2 = static_cast<float>(s2 * shrink);
        f3 = static_cast<float>(s3 * shrink);
    }
    out.s1[k] = f1;
    out.s2[k] = f2;
    out.s3[k] = f3;
}

StokesImage stokes(const JonesField& field, double dark_threshold) {
    if (!field.is_finite())
        throw DomainError("stokes: field contains non-finite amplitudes");

    const int res = field.resolution();
    const std::size_t n = field.left.size();
    StokesImage out(res);

    // First pass: raw intensities.
    std::vector<double> total(n);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        total[k] = std::norm(field.left[k]) + std::norm(field.right[k]);
        peak = std::max(peak, total[k]);
    }
    if (peak <= 0.0) return out; // all dark

    const double cutoff = dark_threshold * peak;
    const double inv_peak = 1.0 / peak;
    for (std::size_t k = 0; k < n; ++k) {
        out.intensity[k] = static_cast<float>(total[k] * inv_peak);
        if (total[k] < cutoff) continue; // unpolarized convention (zeros)

        const std::complex<double> el = field.left[k];
        const std::complex<double> er = field.right[k];
        const double il = std::norm(el);
        const double ir = std::norm(er);
        const std::complex<double> cross = el * std::conj(er);

        // I_H - I_V = 2 Re(E_L E_R*), I_D - I_A = -2 Im(E_L E_R*),
        // I_L - I_R = |E_L|^2 - |E_R|^2, each over I = |E_L|^2 + |E_R|^2.
        const double inv_i = 1.0 / total[k];
        store_stokes_triple(2.0 * cross.real() * inv_i, -2.0 * cross.imag() * inv_i,
                            (il - ir) * inv_i, k, out);
    }
    return out;
}

RGBImage to_rgb(const StokesImage& img) {
    RGBImage out;
    out.resolution = img.resolution;
    out.rgb.resize(img.pixel_count() * 3);
    auto channel = [](float s) -> std::uint8_t {
        const long v = std::lround(255.0 * (double(s) + 1.0) / 2.0);
        return static_cast<std::uint8_t>(std::clamp(v, 0l, 255l));
    };
    for (std::size_t k = 0; k < img.pixel_count(); ++k) {
        out.rgb[3 * k + 0] = channel(img.s1[k]);
        out.rgb[3 * k + 1] = channel(img.s2[k]);
        out.rgb[3 * k + 2] = channel(img.s3[k]);
    }
    return out;
}

} // namespace vvb
